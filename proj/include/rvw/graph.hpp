#ifndef RVW_GRAPH_HPP
#define RVW_GRAPH_HPP

// Equation computation graphs: variable, constant and operator vertices
// joined by directed edges that carry the 1-based argument position at the
// destination operator.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rvw/codebook.hpp"
#include "rvw/error.hpp"

namespace rvw {

struct Variable {
  std::string name;
  bool operator==(const Variable&) const = default;
};

/// Constants keep their source spelling so bit charges never depend on how
/// a platform formats floating point.
struct Constant {
  std::string text;
  double value = 0.0;
  bool operator==(const Constant& o) const { return text == o.text; }
};

struct Operator {
  std::string symbol;
  bool operator==(const Operator&) const = default;
};

using VertexKind = std::variant<Variable, Constant, Operator>;

struct Vertex {
  VertexKind kind;
  bool operator==(const Vertex&) const = default;

  bool is_variable() const { return std::holds_alternative<Variable>(kind); }
  bool is_constant() const { return std::holds_alternative<Constant>(kind); }
  bool is_operator() const { return std::holds_alternative<Operator>(kind); }

  /// Sort rank of the kind followed by its name/symbol/literal.
  std::pair<int, std::string> label() const {
    if (const auto* v = std::get_if<Variable>(&kind)) return {0, v->name};
    if (const auto* c = std::get_if<Constant>(&kind)) return {1, c->text};
    return {2, std::get<Operator>(kind).symbol};
  }
};

struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;
  std::uint32_t arg_position = 1;
  bool operator==(const Edge&) const = default;
  auto operator<=>(const Edge& o) const {
    if (auto c = dst <=> o.dst; c != 0) return c;
    if (auto c = arg_position <=> o.arg_position; c != 0) return c;
    return src <=> o.src;
  }
};

struct ComputationGraph {
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
  std::size_t input_vertex = 0;
  std::size_t output_vertex = 0;

  bool operator==(const ComputationGraph&) const = default;

  std::size_t in_degree(std::size_t v) const {
    return static_cast<std::size_t>(std::count_if(
        edges.begin(), edges.end(), [v](const Edge& e) { return e.dst == v; }));
  }
  std::size_t out_degree(std::size_t v) const {
    return static_cast<std::size_t>(std::count_if(
        edges.begin(), edges.end(), [v](const Edge& e) { return e.src == v; }));
  }
};

/// Arity of operators defined locally (e.g. by an earlier equation).
using LocalOperators = std::map<std::string, int>;

struct OperatorInfo {
  int arity = 0;
  bool order_sensitive = false;
  bool local = false;
};

inline std::optional<OperatorInfo> resolve_operator(
    const std::string& symbol, const Codebook& cb,
    const LocalOperators& local) {
  if (auto it = local.find(symbol); it != local.end()) {
    return OperatorInfo{it->second, it->second > 1, true};
  }
  if (const auto* e = cb.find(symbol)) {
    return OperatorInfo{e->arity, e->order_sensitive, false};
  }
  return std::nullopt;
}

struct Violation {
  std::string code;
  std::string message;
  std::optional<std::size_t> vertex;
  std::optional<std::size_t> edge;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool has(std::string_view code) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const Violation& v) { return v.code == code; });
  }
};

namespace detail {

/// Kahn topological order; empty optional if the graph has a cycle.
inline std::optional<std::vector<std::size_t>> topo_order(
    const ComputationGraph& g) {
  const std::size_t n = g.vertices.size();
  std::vector<std::size_t> indeg(n, 0);
  std::vector<std::vector<std::size_t>> out(n);
  for (const auto& e : g.edges) {
    if (e.src >= n || e.dst >= n) return std::nullopt;
    ++indeg[e.dst];
    out[e.src].push_back(e.dst);
  }
  std::queue<std::size_t> ready;
  for (std::size_t v = 0; v < n; ++v)
    if (indeg[v] == 0) ready.push(v);
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    const auto v = ready.front();
    ready.pop();
    order.push_back(v);
    for (auto w : out[v])
      if (--indeg[w] == 0) ready.push(w);
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

}  // namespace detail

/// Checks every structural invariant; violations are returned, not thrown.
inline ValidationReport validate(const ComputationGraph& g,
                                 const Codebook& cb = Codebook::standard(),
                                 const LocalOperators& local = {}) {
  ValidationReport r;
  const std::size_t n = g.vertices.size();
  auto add = [&](std::string code, std::string msg,
                 std::optional<std::size_t> v = std::nullopt,
                 std::optional<std::size_t> e = std::nullopt) {
    r.violations.push_back({std::move(code), std::move(msg), v, e});
  };

  if (n == 0) {
    add("empty_graph", "graph has no vertices");
    return r;
  }
  if (g.input_vertex >= n || g.output_vertex >= n) {
    add("bad_index", "input/output vertex index out of range");
    return r;
  }
  bool edges_in_range = true;
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const auto& e = g.edges[i];
    if (e.src >= n || e.dst >= n) {
      add("bad_index", "edge endpoint out of range", std::nullopt, i);
      edges_in_range = false;
    } else if (e.src == e.dst) {
      add("cycle_detected", "self loop", e.src, i);
    }
  }
  if (!edges_in_range) return r;

  if (!detail::topo_order(g) && !r.has("cycle_detected")) {
    add("cycle_detected", "graph contains a directed cycle");
  }

  if (g.in_degree(g.input_vertex) != 0) {
    add("input_has_inputs", "input vertex must have in-degree 0",
        g.input_vertex);
  }
  if (g.out_degree(g.output_vertex) != 0) {
    add("output_has_outputs", "output vertex must have out-degree 0",
        g.output_vertex);
  }
  if (g.input_vertex != 0) {
    add("input_not_lowest", "input vertex must carry the lowest index",
        g.input_vertex);
  }
  if (g.output_vertex != n - 1) {
    add("output_not_highest", "output vertex must carry the highest index",
        g.output_vertex);
  }
  if (!g.vertices[g.input_vertex].is_variable()) {
    add("input_not_variable", "input vertex must be a variable",
        g.input_vertex);
  }
  if (!g.vertices[g.output_vertex].is_variable()) {
    add("output_not_variable", "output vertex must be a variable",
        g.output_vertex);
  }
  if (g.output_vertex != g.input_vertex && g.in_degree(g.output_vertex) != 1) {
    add("output_in_degree", "output vertex must have exactly one producer",
        g.output_vertex);
  }

  std::set<std::string> var_names;
  for (std::size_t v = 0; v < n; ++v) {
    const auto& vx = g.vertices[v];
    if (const auto* var = std::get_if<Variable>(&vx.kind)) {
      if (!var_names.insert(var->name).second) {
        add("duplicate_variable", "variable '" + var->name + "' appears twice",
            v);
      }
      if (v != g.output_vertex && g.in_degree(v) != 0) {
        add("edge_into_operand", "only operators and the output take inputs",
            v);
      }
      continue;
    }
    if (vx.is_constant()) {
      if (g.in_degree(v) != 0) {
        add("edge_into_operand", "constants cannot take inputs", v);
      }
      continue;
    }
    const auto& sym = std::get<Operator>(vx.kind).symbol;
    const auto info = resolve_operator(sym, cb, local);
    if (!info) {
      add("unknown_symbol", "operator '" + sym + "' is not in the codebook",
          v);
      continue;
    }
    std::vector<std::uint32_t> positions;
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
      if (g.edges[i].dst == v) positions.push_back(g.edges[i].arg_position);
    }
    const auto indeg = positions.size();
    const std::size_t expected =
        info->arity == kVariadic ? indeg : static_cast<std::size_t>(info->arity);
    if (info->arity == kVariadic ? indeg == 0 : indeg != expected) {
      add("arity_mismatch",
          "operator '" + sym + "' expects " +
              (info->arity == kVariadic ? std::string("at least 1")
                                        : std::to_string(info->arity)) +
              " argument(s), has " + std::to_string(indeg),
          v);
    }
    std::sort(positions.begin(), positions.end());
    for (std::size_t i = 0; i < positions.size(); ++i) {
      if (positions[i] == 0 || positions[i] > std::max(expected, indeg)) {
        add("arg_position_out_of_range",
            "argument position " + std::to_string(positions[i]) +
                " out of range for '" + sym + "'",
            v);
      }
      if (i > 0 && positions[i] == positions[i - 1]) {
        add("duplicate_arg_position",
            "argument position " + std::to_string(positions[i]) +
                " used twice at '" + sym + "'",
            v);
      }
    }
  }
  return r;
}

namespace detail {

/// FNV-1a, so canonical ordering is identical on every platform.
inline std::uint64_t fnv1a(std::string_view s,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xff;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Relabels vertices in a deterministic topological order. Ties between
/// ready vertices break on (kind, name), then on structural hashes of each
/// vertex's ancestry and descendants, so the result does not depend on the
/// incoming labelling. Input is placed first and output last.
inline ComputationGraph canonicalize(const ComputationGraph& g,
                                     const Codebook& cb = Codebook::standard(),
                                     const LocalOperators& local = {}) {
  if (auto rep = validate(g, cb, local); !rep.ok()) {
    throw Error(ErrorCode::invalid_graph,
                "cannot canonicalize invalid graph: " +
                    rep.violations.front().code);
  }
  const std::size_t n = g.vertices.size();
  const auto topo = *detail::topo_order(g);

  std::vector<std::vector<const Edge*>> in(n), out(n);
  for (const auto& e : g.edges) {
    in[e.dst].push_back(&e);
    out[e.src].push_back(&e);
  }
  std::vector<std::uint64_t> label_hash(n), up(n), down(n);
  for (std::size_t v = 0; v < n; ++v) {
    const auto [rank, name] = g.vertices[v].label();
    label_hash[v] = detail::fnv1a(name, detail::mix(0xcbf29ce484222325ULL,
                                                    static_cast<unsigned>(rank)));
    if (v == g.input_vertex) label_hash[v] = detail::mix(label_hash[v], 1);
    if (v == g.output_vertex) label_hash[v] = detail::mix(label_hash[v], 2);
  }
  for (auto v : topo) {
    std::vector<std::pair<std::uint32_t, std::uint64_t>> parts;
    for (const auto* e : in[v]) parts.emplace_back(e->arg_position, up[e->src]);
    std::sort(parts.begin(), parts.end());
    auto h = label_hash[v];
    for (auto [pos, hv] : parts) h = detail::mix(detail::mix(h, pos), hv);
    up[v] = h;
  }
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    const auto v = *it;
    std::vector<std::pair<std::uint32_t, std::uint64_t>> parts;
    for (const auto* e : out[v])
      parts.emplace_back(e->arg_position, down[e->dst]);
    std::sort(parts.begin(), parts.end());
    auto h = label_hash[v];
    for (auto [pos, hv] : parts) h = detail::mix(detail::mix(h, pos), hv);
    down[v] = h;
  }

  using Key = std::tuple<int, std::string, std::uint64_t, std::uint64_t,
                         std::size_t>;
  auto key = [&](std::size_t v) {
    auto [rank, name] = g.vertices[v].label();
    return Key{rank, name, up[v], down[v], v};
  };

  std::vector<std::size_t> indeg(n, 0);
  for (const auto& e : g.edges) ++indeg[e.dst];
  std::set<Key> ready;
  for (std::size_t v = 0; v < n; ++v) {
    if (indeg[v] == 0 && v != g.input_vertex && v != g.output_vertex)
      ready.insert(key(v));
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  auto emit = [&](std::size_t v) {
    order.push_back(v);
    for (const auto* e : out[v]) {
      if (--indeg[e->dst] == 0 && e->dst != g.output_vertex)
        ready.insert(key(e->dst));
    }
  };
  emit(g.input_vertex);
  while (!ready.empty()) {
    const auto v = std::get<4>(*ready.begin());
    ready.erase(ready.begin());
    emit(v);
  }
  if (g.output_vertex != g.input_vertex) order.push_back(g.output_vertex);

  std::vector<std::size_t> new_index(n);
  for (std::size_t i = 0; i < order.size(); ++i) new_index[order[i]] = i;

  ComputationGraph c;
  c.vertices.reserve(n);
  for (auto v : order) c.vertices.push_back(g.vertices[v]);
  for (const auto& e : g.edges)
    c.edges.push_back({new_index[e.src], new_index[e.dst], e.arg_position});
  std::sort(c.edges.begin(), c.edges.end());
  c.input_vertex = new_index[g.input_vertex];
  c.output_vertex = new_index[g.output_vertex];
  return c;
}

inline nlohmann::json to_json(const ComputationGraph& g) {
  nlohmann::json vs = nlohmann::json::array();
  for (const auto& v : g.vertices) {
    if (const auto* var = std::get_if<Variable>(&v.kind)) {
      vs.push_back({{"kind", "variable"}, {"name", var->name}});
    } else if (const auto* c = std::get_if<Constant>(&v.kind)) {
      vs.push_back({{"kind", "constant"}, {"text", c->text}, {"value", c->value}});
    } else {
      vs.push_back(
          {{"kind", "operator"}, {"symbol", std::get<Operator>(v.kind).symbol}});
    }
  }
  nlohmann::json es = nlohmann::json::array();
  for (const auto& e : g.edges) {
    es.push_back({{"src", e.src}, {"dst", e.dst}, {"arg", e.arg_position}});
  }
  return {{"schema", "rvw.graph/1"},
          {"vertices", vs},
          {"edges", es},
          {"input", g.input_vertex},
          {"output", g.output_vertex}};
}

inline ComputationGraph graph_from_json(const nlohmann::json& j) {
  try {
    ComputationGraph g;
    for (const auto& jv : j.at("vertices")) {
      const auto kind = jv.at("kind").get<std::string>();
      if (kind == "variable") {
        g.vertices.push_back({Variable{jv.at("name").get<std::string>()}});
      } else if (kind == "constant") {
        const auto text = jv.at("text").get<std::string>();
        const double value =
            jv.contains("value") ? jv["value"].get<double>() : std::stod(text);
        g.vertices.push_back({Constant{text, value}});
      } else if (kind == "operator") {
        g.vertices.push_back({Operator{jv.at("symbol").get<std::string>()}});
      } else {
        throw Error(ErrorCode::invalid_input, "unknown vertex kind " + kind);
      }
    }
    for (const auto& je : j.at("edges")) {
      g.edges.push_back({je.at("src").get<std::size_t>(),
                         je.at("dst").get<std::size_t>(),
                         je.at("arg").get<std::uint32_t>()});
    }
    g.input_vertex = j.at("input").get<std::size_t>();
    g.output_vertex = j.at("output").get<std::size_t>();
    return g;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::invalid_input,
                std::string("malformed graph JSON: ") + ex.what());
  }
}

}  // namespace rvw

#endif  // RVW_GRAPH_HPP
