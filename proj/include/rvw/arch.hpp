#ifndef RVW_ARCH_HPP
#define RVW_ARCH_HPP

// Recursive network-architecture descriptions: primitive layers, references
// to named blocks, chains, replication, residual (skip) links, concatenation
// joins and dense connectivity.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "rvw/codebook.hpp"
#include "rvw/error.hpp"
#include "rvw/graph.hpp"

namespace rvw {

/// Heap-allocated value with deep copy and value equality.
template <class T>
class Box {
 public:
  Box() : p_(std::make_unique<T>()) {}
  Box(T v) : p_(std::make_unique<T>(std::move(v))) {}  // NOLINT
  Box(const Box& o) : p_(std::make_unique<T>(*o.p_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& o) {
    if (this != &o) p_ = std::make_unique<T>(*o.p_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;

  T& operator*() { return *p_; }
  const T& operator*() const { return *p_; }
  T* operator->() { return p_.get(); }
  const T* operator->() const { return p_.get(); }

  bool operator==(const Box& o) const { return *p_ == *o.p_; }

 private:
  std::unique_ptr<T> p_;
};

// --- hyperparameters -------------------------------------------------------

struct IntLit {
  std::int64_t value = 0;
  bool operator==(const IntLit&) const = default;
};
struct RealLit {
  std::string text;
  bool operator==(const RealLit&) const = default;
};
/// Spatial size such as 3x3.
struct SizeLit {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  bool operator==(const SizeLit&) const = default;
};
/// Non-numeric setting, e.g. `global` pooling.
struct Keyword {
  std::string name;
  bool operator==(const Keyword&) const = default;
};
/// mul * name / div, e.g. `4k` or `k/2`.
struct ParamRef {
  std::string name;
  std::int64_t mul = 1;
  std::int64_t div = 1;
  bool operator==(const ParamRef&) const = default;
};

using HyperParam = std::variant<IntLit, RealLit, SizeLit, Keyword, ParamRef>;

inline const std::set<std::string>& hyper_keywords() {
  static const std::set<std::string> kw{"global", "same", "valid"};
  return kw;
}

inline std::string to_source(const HyperParam& h) {
  struct V {
    std::string operator()(const IntLit& x) const {
      return std::to_string(x.value);
    }
    std::string operator()(const RealLit& x) const { return x.text; }
    std::string operator()(const SizeLit& x) const {
      return std::to_string(x.rows) + "x" + std::to_string(x.cols);
    }
    std::string operator()(const Keyword& x) const { return x.name; }
    std::string operator()(const ParamRef& x) const {
      std::string s = x.mul != 1 ? std::to_string(x.mul) : "";
      s += x.name;
      if (x.div != 1) s += "/" + std::to_string(x.div);
      return s;
    }
  };
  return std::visit(V{}, h);
}

// --- nodes -----------------------------------------------------------------

struct ArchNode;

struct PrimitiveLayer {
  std::string symbol;  // canonical codebook symbol
  std::vector<HyperParam> args;
  bool operator==(const PrimitiveLayer&) const = default;
};
struct NamedRef {
  std::string name;
  std::vector<HyperParam> args;
  bool operator==(const NamedRef&) const = default;
};
struct Chain {
  std::vector<ArchNode> items;
  bool operator==(const Chain&) const;
};
struct Replicate {
  Box<ArchNode> node;
  HyperParam count;
  bool operator==(const Replicate&) const;
};
/// Identity path plus `branch`, summed at the join.
struct SkipAdd {
  Box<ArchNode> branch;
  bool operator==(const SkipAdd&) const;
};
/// Parallel branches joined by channel-wise concatenation.
struct ConcatJoin {
  std::vector<ArchNode> branches;
  bool operator==(const ConcatJoin&) const;
};
/// `count` copies of `node`; each copy consumes the concatenation of the
/// block input and every earlier copy's output.
struct Dense {
  Box<ArchNode> node;
  HyperParam count;
  bool operator==(const Dense&) const;
};

struct ArchNode {
  std::variant<PrimitiveLayer, NamedRef, Chain, Replicate, SkipAdd, ConcatJoin,
               Dense>
      v;
  bool operator==(const ArchNode&) const = default;
};

inline bool Chain::operator==(const Chain& o) const { return items == o.items; }
inline bool Replicate::operator==(const Replicate& o) const {
  return node == o.node && count == o.count;
}
inline bool SkipAdd::operator==(const SkipAdd& o) const {
  return branch == o.branch;
}
inline bool ConcatJoin::operator==(const ConcatJoin& o) const {
  return branches == o.branches;
}
inline bool Dense::operator==(const Dense& o) const {
  return node == o.node && count == o.count;
}

struct Definition {
  std::string name;
  std::vector<std::string> params;
  /// Trailing parameters may carry a default; empty or same size as params.
  std::vector<std::optional<HyperParam>> defaults;
  ArchNode body;
  bool operator==(const Definition&) const = default;

  std::size_t required_params() const {
    std::size_t n = params.size();
    while (n > 0 && n <= defaults.size() && defaults[n - 1]) --n;
    return n;
  }
};

struct Binding {
  std::string name;
  HyperParam value;
  bool operator==(const Binding&) const = default;
};

struct ArchitectureSpec {
  std::vector<Definition> definitions;
  std::vector<Binding> bindings;
  std::optional<ArchNode> forward_pass;
  bool operator==(const ArchitectureSpec&) const = default;

  const Definition* find(const std::string& name) const {
    for (const auto& d : definitions)
      if (d.name == name) return &d;
    return nullptr;
  }
};

// --- rendering -------------------------------------------------------------

namespace detail {

inline std::string args_source(const std::vector<HyperParam>& args) {
  if (args.empty()) return "";
  std::string s = "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) s += ", ";
    s += to_source(args[i]);
  }
  return s + ")";
}

}  // namespace detail

inline std::string to_source(const ArchNode& n);

inline std::string chain_source(const Chain& c) {
  std::string s;
  for (std::size_t i = 0; i < c.items.size(); ++i) {
    if (i) s += " -> ";
    const auto& item = c.items[i];
    // A nested chain inside a chain needs brackets to stay a single item.
    if (std::holds_alternative<Chain>(item.v)) {
      s += "(" + to_source(item) + ")";
    } else {
      s += to_source(item);
    }
  }
  return s;
}

inline std::string to_source(const ArchNode& n) {
  struct V {
    std::string operator()(const PrimitiveLayer& p) const {
      return p.symbol + detail::args_source(p.args);
    }
    std::string operator()(const NamedRef& r) const {
      return r.name + detail::args_source(r.args);
    }
    std::string operator()(const Chain& c) const { return chain_source(c); }
    std::string operator()(const Replicate& r) const {
      const bool wrap = std::holds_alternative<Chain>(r.node->v) ||
                        std::holds_alternative<Replicate>(r.node->v);
      const auto inner = to_source(*r.node);
      return (wrap ? "(" + inner + ")" : inner) + " x " + to_source(r.count);
    }
    std::string operator()(const SkipAdd& s) const {
      return "skip(" + to_source(*s.branch) + ")";
    }
    std::string operator()(const ConcatJoin& c) const {
      std::string s = "concat(";
      for (std::size_t i = 0; i < c.branches.size(); ++i) {
        if (i) s += ", ";
        s += to_source(c.branches[i]);
      }
      return s + ")";
    }
    std::string operator()(const Dense& d) const {
      return "dense(" + to_source(*d.node) + ", " + to_source(d.count) + ")";
    }
  };
  return std::visit(V{}, n.v);
}

// --- roles -----------------------------------------------------------------

/// Parameter roles of every named block (and equation-defined layer) that is
/// visible at some point of a description.
using RoleTable = std::map<std::string, std::vector<HyperRole>>;

namespace detail {

inline void assign_role(std::map<std::string, HyperRole>& roles,
                        const HyperParam& h, HyperRole role) {
  if (const auto* r = std::get_if<ParamRef>(&h)) roles.emplace(r->name, role);
}

}  // namespace detail

/// Role of the i-th argument of a call to `name`.
inline HyperRole slot_role(const std::string& name, std::size_t i,
                           const RoleTable& table,
                           const Codebook& cb = Codebook::standard()) {
  if (auto it = table.find(name); it != table.end()) {
    return i < it->second.size() ? it->second[i] : HyperRole::generic;
  }
  if (const auto* e = cb.find(name); e && i < e->params.size()) {
    return e->params[i].role;
  }
  return HyperRole::generic;
}

/// Walks `node`, recording for each referenced parameter the role of the
/// first slot it fills.
inline void collect_roles(const ArchNode& node, const RoleTable& table,
                          std::map<std::string, HyperRole>& roles,
                          const Codebook& cb = Codebook::standard()) {
  struct V {
    const RoleTable& table;
    std::map<std::string, HyperRole>& roles;
    const Codebook& cb;
    void operator()(const PrimitiveLayer& p) const {
      for (std::size_t i = 0; i < p.args.size(); ++i)
        detail::assign_role(roles, p.args[i], slot_role(p.symbol, i, table, cb));
    }
    void operator()(const NamedRef& r) const {
      for (std::size_t i = 0; i < r.args.size(); ++i)
        detail::assign_role(roles, r.args[i], slot_role(r.name, i, table, cb));
    }
    void operator()(const Chain& c) const {
      for (const auto& n : c.items) collect_roles(n, table, roles, cb);
    }
    void operator()(const Replicate& r) const {
      collect_roles(*r.node, table, roles, cb);
      detail::assign_role(roles, r.count, HyperRole::count);
    }
    void operator()(const SkipAdd& s) const {
      collect_roles(*s.branch, table, roles, cb);
    }
    void operator()(const ConcatJoin& c) const {
      for (const auto& n : c.branches) collect_roles(n, table, roles, cb);
    }
    void operator()(const Dense& d) const {
      collect_roles(*d.node, table, roles, cb);
      detail::assign_role(roles, d.count, HyperRole::count);
    }
  };
  std::visit(V{table, roles, cb}, node.v);
}

inline std::vector<HyperRole> definition_roles(
    const Definition& def, const RoleTable& table,
    const Codebook& cb = Codebook::standard()) {
  std::map<std::string, HyperRole> roles;
  collect_roles(def.body, table, roles, cb);
  std::vector<HyperRole> out;
  for (const auto& p : def.params) {
    auto it = roles.find(p);
    out.push_back(it == roles.end() ? HyperRole::generic : it->second);
  }
  return out;
}

// --- validation ------------------------------------------------------------

namespace detail {

struct ArchScope {
  const Codebook& cb;
  /// Visible block names -> (required, total) hyperparameter counts.
  std::map<std::string, std::pair<std::size_t, std::size_t>> blocks;
  std::set<std::string> params;
};

inline void check_hyper(const HyperParam& h, const ArchScope& scope,
                        const std::string& where, ValidationReport& rep) {
  if (const auto* r = std::get_if<ParamRef>(&h)) {
    if (!scope.params.count(r->name)) {
      rep.violations.push_back({"undefined_name",
                                "'" + r->name + "' is not bound in " + where,
                                std::nullopt, std::nullopt});
    }
    if (r->div == 0) {
      rep.violations.push_back(
          {"invalid_hyperparam", "division by zero in " + where, std::nullopt,
           std::nullopt});
    }
  }
}

inline void check_count(const HyperParam& h, const ArchScope& scope,
                        const std::string& where, ValidationReport& rep) {
  check_hyper(h, scope, where, rep);
  if (const auto* i = std::get_if<IntLit>(&h); i && i->value < 1) {
    rep.violations.push_back({"invalid_count",
                              "replication count must be >= 1 in " + where,
                              std::nullopt, std::nullopt});
  }
  if (!std::holds_alternative<IntLit>(h) && !std::holds_alternative<ParamRef>(h)) {
    rep.violations.push_back({"invalid_count",
                              "replication count must be an integer in " + where,
                              std::nullopt, std::nullopt});
  }
}

inline void check_node(const ArchNode& n, const ArchScope& scope,
                       const std::string& where, ValidationReport& rep) {
  auto add = [&](std::string code, std::string msg) {
    rep.violations.push_back(
        {std::move(code), std::move(msg) + " in " + where, std::nullopt,
         std::nullopt});
  };
  if (const auto* p = std::get_if<PrimitiveLayer>(&n.v)) {
    const auto* e = scope.cb.find(p->symbol);
    if (!e) {
      add("unknown_symbol", "'" + p->symbol + "' is not in the codebook");
    } else if (e->category != "nn_layer") {
      add("not_a_layer", "'" + p->symbol + "' is not a network layer");
    } else if (p->args.size() > e->params.size()) {
      add("arity_mismatch", "'" + p->symbol + "' takes at most " +
                                std::to_string(e->params.size()) +
                                " hyperparameter(s)");
    }
    for (const auto& a : p->args) check_hyper(a, scope, where, rep);
  } else if (const auto* r = std::get_if<NamedRef>(&n.v)) {
    auto it = scope.blocks.find(r->name);
    if (it == scope.blocks.end()) {
      add("forward_reference", "'" + r->name + "' is not defined before use");
    } else if (r->args.size() < it->second.first ||
               r->args.size() > it->second.second) {
      add("arity_mismatch", "'" + r->name + "' takes " +
                                std::to_string(it->second.first) + ".." +
                                std::to_string(it->second.second) +
                                " hyperparameter(s), got " +
                                std::to_string(r->args.size()));
    }
    for (const auto& a : r->args) check_hyper(a, scope, where, rep);
  } else if (const auto* c = std::get_if<Chain>(&n.v)) {
    if (c->items.empty()) add("empty_chain", "chain has no elements");
    for (const auto& i : c->items) check_node(i, scope, where, rep);
  } else if (const auto* rp = std::get_if<Replicate>(&n.v)) {
    check_node(*rp->node, scope, where, rep);
    check_count(rp->count, scope, where, rep);
  } else if (const auto* s = std::get_if<SkipAdd>(&n.v)) {
    check_node(*s->branch, scope, where, rep);
  } else if (const auto* cj = std::get_if<ConcatJoin>(&n.v)) {
    if (cj->branches.size() < 2)
      add("join_arity", "concat join needs at least 2 branches");
    for (const auto& b : cj->branches) check_node(b, scope, where, rep);
  } else if (const auto* d = std::get_if<Dense>(&n.v)) {
    check_node(*d->node, scope, where, rep);
    check_count(d->count, scope, where, rep);
  }
}

}  // namespace detail

/// `external` lists layer names defined outside the architecture (for example by an
/// equation) that take no hyperparameters.
inline ValidationReport validate(const ArchitectureSpec& spec,
                                 const Codebook& cb = Codebook::standard(),
                                 const std::set<std::string>& external = {}) {
  ValidationReport rep;
  detail::ArchScope scope{cb, {}, {}};
  for (const auto& name : external) scope.blocks[name] = {0, 0};
  for (const auto& d : spec.definitions) {
    if (scope.blocks.count(d.name) || cb.contains(d.name)) {
      rep.violations.push_back({"duplicate_definition",
                                "'" + d.name + "' is already defined",
                                std::nullopt, std::nullopt});
    }
    if (!d.defaults.empty() && d.defaults.size() != d.params.size()) {
      rep.violations.push_back({"bad_defaults",
                                "defaults of '" + d.name + "' do not match its parameters",
                                std::nullopt, std::nullopt});
    }
    for (std::size_t i = 0; i < std::min(d.required_params(), d.defaults.size());
         ++i) {
      if (d.defaults[i]) {
        rep.violations.push_back({"bad_defaults",
                                  "parameters with defaults must be trailing in '" +
                                      d.name + "'",
                                  std::nullopt, std::nullopt});
      }
    }
    detail::ArchScope local{cb, scope.blocks, {d.params.begin(), d.params.end()}};
    // The name is not yet visible inside its own body: no self-recursion.
    detail::check_node(d.body, local, "definition of " + d.name, rep);
    scope.blocks[d.name] = {d.required_params(), d.params.size()};
  }
  for (const auto& b : spec.bindings) {
    detail::check_hyper(b.value, scope, "binding of " + b.name, rep);
    scope.params.insert(b.name);
  }
  if (spec.forward_pass) {
    detail::check_node(*spec.forward_pass, scope, "forward pass", rep);
  }
  return rep;
}

}  // namespace rvw

#endif  // RVW_ARCH_HPP
