#ifndef RVW_ENCODER_HPP
#define RVW_ENCODER_HPP

// Bit-counting rubrics. Every ledger item names the rubric that produced
// it; docs/rubrics.md lists them.
//
//   english.per_char   ceil(rate * characters), one item per section
//   english.per_word   width * words
//   equation.edges     |E| * (ceil(log2 |V|) + order-suffix bits)
//   equation.legend    constant_bits per constant + code width per operator
//   arch.layer_type    nn_layer code width per primitive layer occurrence
//   arch.block_ref     ceil(log2(visible names + distinct primitives)) per
//                      reference to a named block
//   arch.hyperparam    per-role width from the calibration profile
//   arch.replication   replication / dense counts
//   arch.chain_edge    a chain of n elements has n edges of ceil(log2 n) bits
//   arch.skip_link     one extra edge per residual link
//   arch.concat_edge   one edge per branch of a concat join

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rvw/arch.hpp"
#include "rvw/codebook.hpp"
#include "rvw/doc.hpp"
#include "rvw/error.hpp"
#include "rvw/graph.hpp"
#include "rvw/ledger.hpp"

namespace rvw {

struct EnglishMode {
  enum class Kind { per_char, per_word };
  Kind kind = Kind::per_char;
  double rate = 1.0;         // bits per character
  std::uint32_t width = 10;  // bits per word

  static EnglishMode per_char(double rate = 1.0) {
    if (!(rate > 0.0))
      throw Error(ErrorCode::invalid_input, "bits per character must be > 0");
    return {Kind::per_char, rate, 10};
  }
  static EnglishMode per_word(std::uint32_t width = 10) {
    if (width < 1)
      throw Error(ErrorCode::invalid_input, "bits per word must be >= 1");
    return {Kind::per_word, 1.0, width};
  }
};

enum class OrderSuffix { all_edges, order_sensitive_only };

/// How operator vertices are charged in an equation's legend.
enum class LegendMode {
  per_symbol,  // each distinct operator symbol once
  per_vertex,  // every operator vertex
};

/// Hyperparameter widths by role plus optional structural overrides.
struct CalibrationProfile {
  std::string name = "uniform8";
  std::map<HyperRole, std::uint32_t> role_bits;  // missing: hyperparam_bits
  std::optional<std::uint32_t> block_ref_bits;
  std::optional<std::uint32_t> chain_edge_bits;

  static CalibrationProfile uniform8() { return {}; }

  /// Reconstruction of the ResNet-152 forward-pass arithmetic
  /// (5 layer types x 4 + 39 hyperparameter bits + 9 edges x 3 = 86).
  /// The 16 hyperparameters split into 9 filter/stride fields at 2 bits and
  /// 7 channel fields at 3 bits; replication counts and block references
  /// carry no separate charge.
  static CalibrationProfile paper_resnet() {
    CalibrationProfile p;
    p.name = "paper-resnet";
    p.role_bits = {{HyperRole::filter, 2},
                   {HyperRole::stride, 2},
                   {HyperRole::channels, 3},
                   {HyperRole::count, 0}};
    p.block_ref_bits = 0;
    p.chain_edge_bits = 3;
    return p;
  }

  static CalibrationProfile by_name(std::string_view name) {
    if (name == "uniform8") return uniform8();
    if (name == "paper-resnet") return paper_resnet();
    throw Error(ErrorCode::invalid_input,
                "unknown calibration profile '" + std::string(name) + "'");
  }
};

struct CountConfig {
  EnglishMode english{};
  std::uint32_t hyperparam_bits = 8;
  std::uint32_t constant_bits = 8;
  OrderSuffix order_suffix = OrderSuffix::all_edges;
  LegendMode legend = LegendMode::per_symbol;
  CalibrationProfile profile{};
  const Codebook* codebook = &Codebook::standard();

  const Codebook& cb() const { return *codebook; }

  std::uint32_t role_width(HyperRole r) const {
    if (auto it = profile.role_bits.find(r); it != profile.role_bits.end())
      return it->second;
    return hyperparam_bits;
  }
};

namespace detail {

/// ceil(x), treating values within 1e-9 of an integer as that integer so
/// that e.g. 1.2 * 10 charges 12 bits, not 13.
inline std::uint64_t ceil_bits(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) < 1e-9) return static_cast<std::uint64_t>(r);
  return static_cast<std::uint64_t>(std::ceil(x));
}

/// Number of UTF-8 code points.
inline std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::string times(std::uint64_t n, std::uint64_t w) {
  return std::to_string(n) + " x " + std::to_string(w);
}

}  // namespace detail

/// Characters counted per line after trimming indentation and trailing
/// whitespace; line breaks are layout, not content.
inline std::size_t english_char_count(std::string_view text) {
  std::size_t n = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    n += detail::utf8_length(detail::trim(text.substr(pos, end - pos)));
    pos = end + 1;
  }
  return n;
}

inline std::size_t english_word_count(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::size_t n = 0;
  std::string w;
  while (is >> w) ++n;
  return n;
}

inline BitLedger count_english(std::string_view text, const EnglishMode& mode) {
  BitLedger l;
  if (mode.kind == EnglishMode::Kind::per_char) {
    const auto chars = english_char_count(text);
    std::ostringstream label;
    label << "english (" << chars << " chars x " << mode.rate << ")";
    l.add(label.str(), detail::ceil_bits(mode.rate * static_cast<double>(chars)),
          "english.per_char");
  } else {
    const auto words = english_word_count(text);
    l.add("english (" + detail::times(words, mode.width) + " words)",
          words * mode.width, "english.per_word");
  }
  return l;
}

/// Code width of an operator symbol: its codebook category, or the local
/// table of equation-defined operators.
inline std::uint32_t operator_width(const std::string& symbol,
                                    const CountConfig& cfg,
                                    const LocalOperators& local) {
  if (local.count(symbol)) {
    return std::max<std::uint32_t>(1, ceil_log2(local.size()));
  }
  return cfg.cb().symbol_width(symbol);
}

inline BitLedger count_equation(const ComputationGraph& graph,
                                const CountConfig& cfg,
                                const LocalOperators& local = {}) {
  const auto g = canonicalize(graph, cfg.cb(), local);
  const std::uint64_t v = g.vertices.size();
  const std::uint64_t index_bits = ceil_log2(v);

  std::uint64_t suffixed = 0;
  for (const auto& e : g.edges) {
    if (cfg.order_suffix == OrderSuffix::all_edges) {
      ++suffixed;
      continue;
    }
    const auto& dst = g.vertices[e.dst];
    if (const auto* op = std::get_if<Operator>(&dst.kind)) {
      const auto info = resolve_operator(op->symbol, cfg.cb(), local);
      if (info && info->order_sensitive) ++suffixed;
    }
  }

  BitLedger l;
  const std::uint64_t e = g.edges.size();
  {
    std::ostringstream label;
    label << "edges (" << e << " x " << index_bits << " index";
    if (cfg.order_suffix == OrderSuffix::all_edges) {
      label << " + 1 order bit)";
    } else {
      label << ", " << suffixed << " order bits)";
    }
    l.add(label.str(), e * index_bits + suffixed, "equation.edges");
  }

  std::uint64_t constants = 0;
  std::uint64_t op_bits = 0;
  std::uint64_t op_count = 0;
  std::set<std::string> seen;
  for (const auto& vx : g.vertices) {
    if (vx.is_constant()) {
      ++constants;
    } else if (const auto* op = std::get_if<Operator>(&vx.kind)) {
      if (cfg.legend == LegendMode::per_symbol && !seen.insert(op->symbol).second)
        continue;
      if (!resolve_operator(op->symbol, cfg.cb(), local)) {
        throw Error(ErrorCode::unknown_symbol,
                    "operator '" + op->symbol + "' is neither in the codebook "
                    "nor defined locally");
      }
      ++op_count;
      op_bits += operator_width(op->symbol, cfg, local);
    }
  }
  std::ostringstream label;
  label << "legend (" << constants << " constant(s) x " << cfg.constant_bits
        << " + " << op_count
        << (cfg.legend == LegendMode::per_symbol ? " operator symbol(s)"
                                                 : " operator(s)")
        << ")";
  l.add(label.str(), constants * cfg.constant_bits + op_bits, "equation.legend");
  return l;
}

/// Counts architecture definitions and forward passes against a growing
/// context of visible names, so a document can be counted section by
/// section.
class ArchCounter {
 public:
  explicit ArchCounter(const CountConfig& cfg) : cfg_(cfg) {}

  /// Registers a hyperparameter-free layer defined elsewhere (an equation).
  void add_external_layer(const std::string& name) {
    names_.insert(name);
    roles_[name] = {};
  }

  /// Role a binding takes from where it is used.
  void set_binding_role(const std::string& name, HyperRole role) {
    binding_roles_[name] = role;
  }

  const RoleTable& roles() const { return roles_; }

  BitLedger count_definition(const Definition& def) {
    const auto roles = definition_roles(def, roles_, cfg_.cb());
    Tally t;
    for (std::size_t i = 0; i < def.defaults.size(); ++i) {
      if (def.defaults[i]) t.hyper(roles[i], cfg_);
    }
    walk(def.body, t, distinct_primitives(def.body));
    roles_[def.name] = roles;
    names_.insert(def.name);
    return t.ledger(def.name);
  }

  BitLedger count_binding(const Binding& b) {
    Tally t;
    auto it = binding_roles_.find(b.name);
    t.hyper(it == binding_roles_.end() ? HyperRole::generic : it->second, cfg_);
    return t.ledger("let " + b.name);
  }

  BitLedger count_forward(const ArchNode& chain) {
    Tally t;
    walk(chain, t, distinct_primitives(chain));
    return t.ledger("forward pass");
  }

 private:
  struct Tally {
    std::uint64_t layers = 0, layer_bits = 0;
    std::uint64_t refs = 0, ref_bits = 0;
    std::uint64_t hypers = 0, hyper_bits = 0;
    std::uint64_t reps = 0, rep_bits = 0;
    std::uint64_t edges = 0, edge_bits = 0;
    std::uint64_t skips = 0, skip_bits = 0;
    std::uint64_t concat_edges = 0, concat_bits = 0;

    void hyper(HyperRole role, const CountConfig& cfg) {
      ++hypers;
      hyper_bits += cfg.role_width(role);
    }

    BitLedger ledger(const std::string& prefix) const {
      BitLedger l;
      auto put = [&](std::uint64_t n, std::uint64_t bits, const char* what,
                     const char* rubric) {
        if (n == 0) return;
        l.add(prefix + ": " + what + " (" + std::to_string(n) + ")", bits,
              rubric);
      };
      put(layers, layer_bits, "layer types", "arch.layer_type");
      put(refs, ref_bits, "block references", "arch.block_ref");
      put(hypers, hyper_bits, "hyperparameters", "arch.hyperparam");
      put(reps, rep_bits, "replication counts", "arch.replication");
      put(edges, edge_bits, "chain edges", "arch.chain_edge");
      put(skips, skip_bits, "skip links", "arch.skip_link");
      put(concat_edges, concat_bits, "concat edges", "arch.concat_edge");
      return l;
    }
  };

  std::set<std::string> distinct_primitives(const ArchNode& n) const {
    std::set<std::string> out;
    collect_primitives(n, out);
    return out;
  }

  static void collect_primitives(const ArchNode& n, std::set<std::string>& out) {
    if (const auto* p = std::get_if<PrimitiveLayer>(&n.v)) {
      out.insert(p->symbol);
    } else if (const auto* c = std::get_if<Chain>(&n.v)) {
      for (const auto& i : c->items) collect_primitives(i, out);
    } else if (const auto* r = std::get_if<Replicate>(&n.v)) {
      collect_primitives(*r->node, out);
    } else if (const auto* s = std::get_if<SkipAdd>(&n.v)) {
      collect_primitives(*s->branch, out);
    } else if (const auto* j = std::get_if<ConcatJoin>(&n.v)) {
      for (const auto& b : j->branches) collect_primitives(b, out);
    } else if (const auto* d = std::get_if<Dense>(&n.v)) {
      collect_primitives(*d->node, out);
    }
  }

  std::uint32_t edge_width(std::uint64_t fan) const {
    return cfg_.profile.chain_edge_bits ? *cfg_.profile.chain_edge_bits
                                        : ceil_log2(fan);
  }

  void walk(const ArchNode& n, Tally& t,
            const std::set<std::string>& primitives) const {
    if (const auto* p = std::get_if<PrimitiveLayer>(&n.v)) {
      ++t.layers;
      t.layer_bits += cfg_.cb().width("nn_layer");
      for (std::size_t i = 0; i < p->args.size(); ++i)
        t.hyper(slot_role(p->symbol, i, roles_, cfg_.cb()), cfg_);
    } else if (const auto* r = std::get_if<NamedRef>(&n.v)) {
      if (!names_.count(r->name)) {
        throw Error(ErrorCode::forward_reference,
                    "'" + r->name + "' is referenced before it is defined");
      }
      ++t.refs;
      t.ref_bits += cfg_.profile.block_ref_bits
                        ? *cfg_.profile.block_ref_bits
                        : ceil_log2(names_.size() + primitives.size());
      for (std::size_t i = 0; i < r->args.size(); ++i)
        t.hyper(slot_role(r->name, i, roles_, cfg_.cb()), cfg_);
    } else if (const auto* c = std::get_if<Chain>(&n.v)) {
      const auto len = c->items.size();
      t.edges += len;
      t.edge_bits += len * edge_width(len);
      for (const auto& i : c->items) walk(i, t, primitives);
    } else if (const auto* rp = std::get_if<Replicate>(&n.v)) {
      walk(*rp->node, t, primitives);
      ++t.reps;
      t.rep_bits += cfg_.role_width(HyperRole::count);
    } else if (const auto* s = std::get_if<SkipAdd>(&n.v)) {
      const auto* inner = std::get_if<Chain>(&s->branch->v);
      const std::uint64_t span = inner ? inner->items.size() : 1;
      ++t.skips;
      t.skip_bits += edge_width(span + 1);
      walk(*s->branch, t, primitives);
    } else if (const auto* j = std::get_if<ConcatJoin>(&n.v)) {
      const auto b = j->branches.size();
      t.concat_edges += b;
      t.concat_bits += b * edge_width(b);
      for (const auto& br : j->branches) walk(br, t, primitives);
    } else if (const auto* d = std::get_if<Dense>(&n.v)) {
      walk(*d->node, t, primitives);
      ++t.reps;
      t.rep_bits += cfg_.role_width(HyperRole::count);
    }
  }

  CountConfig cfg_;
  std::set<std::string> names_;
  RoleTable roles_;
  std::map<std::string, HyperRole> binding_roles_;
};

namespace detail {

/// Role each binding takes from its first use in a forward pass.
inline std::map<std::string, HyperRole> binding_roles(
    const std::vector<const ArchNode*>& forwards, const RoleTable& table,
    const Codebook& cb) {
  std::map<std::string, HyperRole> roles;
  for (const auto* f : forwards) collect_roles(*f, table, roles, cb);
  return roles;
}

}  // namespace detail

/// `external` names equation-defined layers the architecture may reference.
inline BitLedger count_architecture(const ArchitectureSpec& spec,
                                    const CountConfig& cfg,
                                    const std::set<std::string>& external = {}) {
  if (auto rep = validate(spec, cfg.cb(), external); !rep.ok()) {
    const auto& v = rep.violations.front();
    throw Error(v.code == "forward_reference" ? ErrorCode::forward_reference
                                              : ErrorCode::invalid_input,
                v.message);
  }
  ArchCounter counter(cfg);
  for (const auto& name : external) counter.add_external_layer(name);
  BitLedger l;
  for (const auto& d : spec.definitions) l.append(counter.count_definition(d));
  if (spec.forward_pass) {
    for (const auto& [name, role] : detail::binding_roles(
             {&*spec.forward_pass}, counter.roles(), cfg.cb())) {
      counter.set_binding_role(name, role);
    }
  }
  for (const auto& b : spec.bindings) l.append(counter.count_binding(b));
  if (spec.forward_pass) l.append(counter.count_forward(*spec.forward_pass));
  return l;
}

/// Ledger for a whole description. Inherited sections appear with zero
/// cost; their nominal cost is kept so both totals can be reported.
inline BitLedger count_description(const DescriptionDoc& doc,
                                   const CountConfig& cfg) {
  // Binding roles need every definition, so resolve them up front.
  ArchCounter probe(cfg);
  std::vector<const ArchNode*> forwards;
  for (const auto& s : doc.sections) {
    for (const auto& i : s.items) {
      if (const auto* e = std::get_if<EquationItem>(&i)) {
        probe.add_external_layer(e->name);
      } else if (const auto* d = std::get_if<Definition>(&i)) {
        probe.count_definition(*d);
      } else if (const auto* f = std::get_if<ForwardItem>(&i)) {
        forwards.push_back(&f->chain);
      }
    }
  }
  const auto binding_roles =
      detail::binding_roles(forwards, probe.roles(), cfg.cb());

  ArchCounter counter(cfg);
  for (const auto& [name, role] : binding_roles)
    counter.set_binding_role(name, role);
  LocalOperators local_ops;

  BitLedger total;
  for (const auto& s : doc.sections) {
    BitLedger sec;
    std::string english;
    bool has_text = false;
    for (const auto& i : s.items) {
      if (const auto* t = std::get_if<TextItem>(&i)) {
        if (has_text) english += "\n";
        english += t->text;
        has_text = true;
      } else if (const auto* e = std::get_if<EquationItem>(&i)) {
        sec.append(count_equation(e->graph, cfg, local_ops), e->name + ": ");
        local_ops[e->name] = static_cast<int>(e->params.size());
        counter.add_external_layer(e->name);
      } else if (const auto* d = std::get_if<Definition>(&i)) {
        sec.append(counter.count_definition(*d));
      } else if (const auto* b = std::get_if<Binding>(&i)) {
        sec.append(counter.count_binding(*b));
      } else if (const auto* f = std::get_if<ForwardItem>(&i)) {
        sec.append(counter.count_forward(f->chain));
      }
    }
    if (has_text) sec.append(count_english(english, cfg.english));
    if (s.inherited_from_baseline) sec.mark_inherited();
    total.append(sec, s.name + "/");
  }
  return total;
}

}  // namespace rvw

#endif  // RVW_ENCODER_HPP
