#ifndef RVW_DSL_HPP
#define RVW_DSL_HPP

// Line-oriented description format (.rvw). See docs/grammar.md.
//
//   model ResNet-152
//   baseline AlexNet
//   section Batch-Normalization
//     text at each neuron x apply
//     eq BN(x) = b + g * (x - mu) / sqrt(sigma2 + 0.01)
//   section Architecture
//     def Layer(f, k, s) = BN -> ReLU -> Conv(f, k, s)
//   section Forward-Pass
//     let k = 64
//     forward Conv(7, 64, 2) -> MaxPool(3x3, 2) -> ...
//   section Training @inherit(AlexNet)
//     text ...

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "rvw/arch.hpp"
#include "rvw/codebook.hpp"
#include "rvw/doc.hpp"
#include "rvw/error.hpp"
#include "rvw/graph.hpp"

namespace rvw {

namespace dsl_detail {

/// Source line after alias substitution, with a map back to 1-based
/// code-point columns of the original line.
struct NormLine {
  std::string text;
  std::vector<std::size_t> col;  // one per byte of text, plus end
};

inline const std::vector<std::pair<std::string_view, std::string_view>>&
aliases() {
  // Longest match first where prefixes collide (σ² before σ).
  static const std::vector<std::pair<std::string_view, std::string_view>> a{
      {"\xCF\x83\xC2\xB2", "sigma2"},  // σ²
      {"\xCE\xBC", "mu"},              // μ
      {"\xCF\x83", "sigma"},           // σ
      {"\xCE\xB1", "alpha"},           // α
      {"\xCE\xB2", "beta"},            // β
      {"\xCE\xB3", "gamma"},           // γ
      {"\xCE\xBB", "lambda"},          // λ
      {"\xCE\xB5", "eps"},             // ε
      {"\xCE\xB8", "theta"},           // θ
      {"\xCE\xB7", "eta"},             // η
      {"\xC3\x97", " x "},             // ×
      {"\xE2\x86\x92", "->"},          // →
      {"\xC3\xB7", "/"},               // ÷
      {"\xC2\xB7", "*"},               // ·
      {"\xE2\x88\x92", "-"},           // −
      {"\xE2\x88\x9A", "sqrt"},        // √
  };
  return a;
}

inline NormLine normalize(std::string_view line) {
  NormLine out;
  std::size_t cp = 1;
  std::size_t i = 0;
  while (i < line.size()) {
    bool hit = false;
    for (const auto& [from, to] : aliases()) {
      if (line.substr(i, from.size()) == from) {
        out.text += to;
        out.col.insert(out.col.end(), to.size(), cp);
        i += from.size();
        for (unsigned char c : from)
          if ((c & 0xC0) != 0x80) ++cp;
        hit = true;
        break;
      }
    }
    if (hit) continue;
    out.text += line[i];
    out.col.push_back(cp);
    if (i + 1 >= line.size() ||
        (static_cast<unsigned char>(line[i + 1]) & 0xC0) != 0x80) {
      ++cp;
    }
    ++i;
  }
  out.col.push_back(cp);
  return out;
}

enum class Tok { ident, integer, real, size, punct, arrow, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  std::size_t col = 0;    // 1-based, original line
  bool adjacent = false;  // no whitespace before this token
};

inline bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
inline bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}
inline bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

inline std::vector<Token> lex(const NormLine& nl, std::size_t begin,
                              std::size_t line_no, std::size_t col_offset = 0) {
  const auto& s = nl.text;
  std::vector<Token> out;
  std::size_t i = begin;
  bool adjacent = false;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      adjacent = false;
      ++i;
      continue;
    }
    Token t;
    t.col = nl.col[i];
    t.adjacent = adjacent;
    const std::size_t start = i;
    if (ident_start(c)) {
      while (i < s.size() && ident_char(s[i])) ++i;
      t.kind = Tok::ident;
    } else if (digit(c) || (c == '.' && i + 1 < s.size() && digit(s[i + 1]))) {
      while (i < s.size() && digit(s[i])) ++i;
      t.kind = Tok::integer;
      if (i + 1 < s.size() && s[i] == 'x' && digit(s[i + 1])) {
        ++i;
        while (i < s.size() && digit(s[i])) ++i;
        t.kind = Tok::size;
      } else {
        if (i < s.size() && s[i] == '.') {
          ++i;
          while (i < s.size() && digit(s[i])) ++i;
          t.kind = Tok::real;
        }
        if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
          std::size_t j = i + 1;
          if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
          if (j < s.size() && digit(s[j])) {
            i = j;
            while (i < s.size() && digit(s[i])) ++i;
            t.kind = Tok::real;
          }
        }
      }
    } else if (c == '-' && i + 1 < s.size() && s[i + 1] == '>') {
      i += 2;
      t.kind = Tok::arrow;
    } else if (std::string_view("()=,+-*/^@").find(c) != std::string_view::npos) {
      ++i;
      t.kind = Tok::punct;
    } else {
      throw Error(ErrorCode::syntax_error,
                  "unexpected character '" + std::string(1, c) + "'", line_no,
                  t.col + col_offset);
    }
    t.text = s.substr(start, i - start);
    out.push_back(std::move(t));
    adjacent = true;
  }
  Token end;
  end.kind = Tok::end;
  end.col = nl.col.back();
  out.push_back(end);
  return out;
}

/// Infix spelling of the binary math operators.
inline const std::map<std::string, std::pair<std::string, int>>& infix_ops() {
  static const std::map<std::string, std::pair<std::string, int>> m{
      {"add", {"+", 1}},
      {"subtract", {"-", 1}},
      {"multiply", {"*", 2}},
      {"divide", {"/", 2}},
      {"power", {"^", 3}},
  };
  return m;
}

inline bool is_identifier(std::string_view s) {
  if (s.empty() || !ident_start(s[0])) return false;
  for (char c : s)
    if (!ident_char(c)) return false;
  return true;
}

/// Name to write for a codebook symbol in source (some canonical symbols,
/// e.g. pseudo-inverse, are not identifiers; their alias is used instead).
inline std::string source_name(const std::string& symbol, const Codebook& cb) {
  if (is_identifier(symbol)) return symbol;
  if (const auto* e = cb.find(symbol)) {
    for (const auto& a : e->aliases)
      if (is_identifier(a)) return a;
  }
  return symbol;
}

class Parser {
 public:
  Parser(const Codebook& cb) : cb_(cb) {}

  DescriptionDoc parse(std::string_view source) {
    const auto lines = logical_lines(source);
    prescan(lines);
    for (const auto& ll : lines) handle(ll);
    return std::move(doc_);
  }

 private:
  struct LogicalLine {
    std::size_t line_no = 0;
    std::size_t indent = 0;  // leading code points trimmed from the first line
    std::string raw;    // joined physical lines
    NormLine norm;      // aliases applied
  };

  static std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\f\v");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\f\v");
    return s.substr(b, e - b + 1);
  }

  static std::vector<LogicalLine> logical_lines(std::string_view source) {
    std::vector<LogicalLine> out;
    std::size_t pos = 0, line_no = 0;
    bool continuing = false;
    while (pos < source.size()) {
      auto end = source.find('\n', pos);
      if (end == std::string_view::npos) end = source.size();
      ++line_no;
      const auto physical = source.substr(pos, end - pos);
      const auto raw = trim(physical);
      pos = end + 1;
      if (continuing) {
        auto& last = out.back();
        last.raw += " ";
        last.raw += raw;
      } else {
        if (raw.empty() || raw[0] == '#') continue;
        out.push_back({line_no, static_cast<std::size_t>(raw.data() - physical.data()),
                       std::string(raw), {}});
      }
      // Only chains continue; prose may legitimately end in an arrow.
      const auto& cur = out.back().raw;
      const auto kw = split_keyword(cur).first;
      continuing = (kw == "def" || kw == "forward") && cur.size() >= 2 &&
                   cur.compare(cur.size() - 2, 2, "->") == 0;
    }
    for (auto& l : out) l.norm = normalize(l.raw);
    return out;
  }

  static std::pair<std::string_view, std::string_view> split_keyword(
      std::string_view s) {
    const auto sp = s.find_first_of(" \t");
    if (sp == std::string_view::npos) return {s, {}};
    return {s.substr(0, sp), trim(s.substr(sp))};
  }

  /// Declared equation and block names with the line of their declaration.
  void prescan(const std::vector<LogicalLine>& lines) {
    for (const auto& l : lines) {
      const auto [kw, rest] = split_keyword(l.raw);
      if (kw != "eq" && kw != "def") continue;
      std::size_t i = 0;
      while (i < rest.size() && ident_char(rest[i])) ++i;
      if (i > 0) later_.emplace(std::string(rest.substr(0, i)), l.line_no);
    }
  }

  [[noreturn]] void fail(ErrorCode code, const std::string& msg,
                         std::size_t col) const {
    throw Error(code, msg, line_no_, col + indent_);
  }

  void handle(const LogicalLine& l) {
    line_no_ = l.line_no;
    indent_ = l.indent;
    const auto [kw, rest] = split_keyword(l.raw);
    const std::size_t rest_off = rest.empty() ? l.raw.size() : l.raw.size() - rest.size();
    if (kw == "model") {
      if (!doc_.sections.empty())
        fail(ErrorCode::syntax_error, "'model' must precede every section", 1);
      doc_.model_name = std::string(rest);
      return;
    }
    if (kw == "baseline") {
      if (!doc_.sections.empty())
        fail(ErrorCode::syntax_error, "'baseline' must precede every section", 1);
      if (rest.empty()) fail(ErrorCode::syntax_error, "baseline needs a name", 9);
      doc_.baseline_ref = std::string(rest);
      return;
    }
    if (kw == "section") {
      start_section(rest, l);
      return;
    }
    if (doc_.sections.empty()) {
      fail(ErrorCode::syntax_error,
           "'" + std::string(kw) + "' outside of any section", 1);
    }
    auto& sec = doc_.sections.back();
    if (!sec.raw_text.empty()) sec.raw_text += "\n";
    sec.raw_text += l.raw;

    if (kw == "text") {
      sec.items.emplace_back(TextItem{std::string(rest)});
      return;
    }
    // The keyword is plain ASCII, so raw and normalized text agree up to
    // the start of the item body.
    toks_ = lex(l.norm, rest_off, line_no_, indent_);
    pos_ = 0;
    if (kw == "eq") {
      parse_equation(sec);
    } else if (kw == "def") {
      parse_definition(sec);
    } else if (kw == "let") {
      parse_binding(sec);
    } else if (kw == "forward") {
      ForwardItem f{top_chain()};
      expect_end();
      check_arch(&f.chain);
      sec.items.emplace_back(std::move(f));
    } else {
      fail(ErrorCode::syntax_error, "unknown item '" + std::string(kw) + "'", 1);
    }
  }

  void start_section(std::string_view rest, const LogicalLine& l) {
    Section s;
    auto at = rest.find('@');
    std::string_view name = trim(rest.substr(0, at));
    if (name.empty()) fail(ErrorCode::syntax_error, "section needs a name", 9);
    if (at != std::string_view::npos) {
      auto ann = trim(rest.substr(at));
      const std::string_view kw = "@inherit";
      if (ann.substr(0, kw.size()) != kw)
        fail(ErrorCode::syntax_error, "unknown section annotation",
             l.raw.size() - rest.size() + at + 1);
      ann = trim(ann.substr(kw.size()));
      s.inherited_from_baseline = true;
      if (!ann.empty()) {
        if (ann.front() != '(' || ann.back() != ')')
          fail(ErrorCode::syntax_error, "expected @inherit(baseline)",
               l.raw.size() - rest.size() + at + 1);
        s.inherit_ref = std::string(trim(ann.substr(1, ann.size() - 2)));
      } else if (doc_.baseline_ref) {
        s.inherit_ref = *doc_.baseline_ref;
      }
    }
    s.name = std::string(name);
    if (doc_.find_section(s.name))
      fail(ErrorCode::syntax_error, "duplicate section '" + s.name + "'", 9);
    doc_.sections.push_back(std::move(s));
  }

  // --- token helpers -------------------------------------------------------

  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool is_punct(char c, std::size_t k = 0) const {
    return peek(k).kind == Tok::punct && peek(k).text[0] == c;
  }
  bool accept(char c) {
    if (!is_punct(c)) return false;
    next();
    return true;
  }
  void expect(char c) {
    if (!accept(c)) {
      fail(ErrorCode::syntax_error,
           std::string("expected '") + c + "', found " + describe(peek()),
           peek().col);
    }
  }
  void expect_end() {
    if (peek().kind != Tok::end)
      fail(ErrorCode::syntax_error, "unexpected " + describe(peek()), peek().col);
  }
  static std::string describe(const Token& t) {
    return t.kind == Tok::end ? std::string("end of line") : "'" + t.text + "'";
  }
  std::string expect_ident(const char* what) {
    if (peek().kind != Tok::ident)
      fail(ErrorCode::syntax_error,
           std::string("expected ") + what + ", found " + describe(peek()),
           peek().col);
    return next().text;
  }

  // --- equations -----------------------------------------------------------

  struct GraphBuilder {
    ComputationGraph g;
    std::map<std::string, std::size_t> vars, consts;

    std::size_t var(const std::string& name) {
      auto [it, fresh] = vars.emplace(name, g.vertices.size());
      if (fresh) g.vertices.push_back({Variable{name}});
      return it->second;
    }
    std::size_t constant(const std::string& text) {
      auto [it, fresh] = consts.emplace(text, g.vertices.size());
      if (fresh) g.vertices.push_back({Constant{text, std::stod(text)}});
      return it->second;
    }
    std::size_t op(const std::string& symbol,
                   const std::vector<std::size_t>& args) {
      const auto v = g.vertices.size();
      g.vertices.push_back({Operator{symbol}});
      for (std::size_t i = 0; i < args.size(); ++i)
        g.edges.push_back({args[i], v, static_cast<std::uint32_t>(i + 1)});
      return v;
    }
  };

  void parse_equation(Section& sec) {
    EquationItem eq;
    const auto name_col = peek().col;
    eq.name = expect_ident("equation name");
    if (cb_.contains(eq.name) || defined_.count(eq.name))
      fail(ErrorCode::syntax_error, "'" + eq.name + "' is already defined",
           name_col);
    expect('(');
    do {
      eq.params.push_back(expect_ident("parameter name"));
    } while (accept(','));
    expect(')');
    expect('=');
    eq_name_ = eq.name;
    GraphBuilder b;
    b.var(eq.params[0]);
    for (std::size_t i = 1; i < eq.params.size(); ++i) b.var(eq.params[i]);
    const auto root = expr(b, 0);
    expect_end();
    const auto out = b.g.vertices.size();
    b.g.vertices.push_back({Variable{eq.name}});
    b.g.edges.push_back({root, out, 1});
    b.g.input_vertex = 0;
    b.g.output_vertex = out;
    // Unused extra parameters would be isolated vertices with no meaning.
    for (std::size_t i = 1; i < eq.params.size(); ++i) {
      if (b.g.out_degree(b.vars.at(eq.params[i])) == 0) {
        fail(ErrorCode::syntax_error,
             "parameter '" + eq.params[i] + "' is not used", name_col);
      }
    }
    if (auto rep = validate(b.g, cb_, local_ops_); !rep.ok()) {
      fail(ErrorCode::invalid_graph, rep.violations.front().message, name_col);
    }
    eq.graph = canonicalize(b.g, cb_, local_ops_);
    local_ops_[eq.name] = static_cast<int>(eq.params.size());
    defined_.insert(eq.name);
    sec.items.emplace_back(std::move(eq));
  }

  static int binary_prec(const Token& t) {
    if (t.kind != Tok::punct) return -1;
    switch (t.text[0]) {
      case '+': case '-': return 1;
      case '*': case '/': return 2;
      case '^': return 3;
      default: return -1;
    }
  }

  static const char* binary_symbol(char c) {
    switch (c) {
      case '+': return "add";
      case '-': return "subtract";
      case '*': return "multiply";
      case '/': return "divide";
      default: return "power";
    }
  }

  std::size_t expr(GraphBuilder& b, int min_prec) {
    auto lhs = unary(b);
    for (;;) {
      const auto prec = binary_prec(peek());
      if (prec < 0 || prec < min_prec) break;
      const char c = next().text[0];
      // '^' is right-associative.
      const auto rhs = expr(b, c == '^' ? prec : prec + 1);
      lhs = b.op(binary_symbol(c), {lhs, rhs});
    }
    return lhs;
  }

  std::size_t unary(GraphBuilder& b) {
    if (accept('-')) {
      const auto x = expr(b, 3);
      return b.op("subtract", {b.constant("0"), x});
    }
    return primary(b);
  }

  std::size_t primary(GraphBuilder& b) {
    const Token& t = peek();
    if (t.kind == Tok::integer || t.kind == Tok::real) {
      return b.constant(next().text);
    }
    if (accept('(')) {
      const auto v = expr(b, 0);
      expect(')');
      return v;
    }
    if (t.kind != Tok::ident) {
      fail(ErrorCode::syntax_error, "unexpected " + describe(t), t.col);
    }
    const auto col = t.col;
    const std::string name = next().text;
    if (!is_punct('(')) {
      if (name == eq_name_)
        fail(ErrorCode::syntax_error, "equation refers to itself", col);
      return b.var(name);
    }
    next();
    std::vector<std::size_t> args;
    if (!is_punct(')')) {
      do {
        args.push_back(expr(b, 0));
      } while (accept(','));
    }
    expect(')');
    return b.op(resolve_function(name, args.size(), col), args);
  }

  std::string resolve_function(const std::string& name, std::size_t nargs,
                               std::size_t col) {
    int arity = 0;
    std::string symbol;
    if (auto it = local_ops_.find(name); it != local_ops_.end()) {
      symbol = name;
      arity = it->second;
    } else if (const auto* e = cb_.find(name)) {
      if (e->category == "nn_layer")
        fail(ErrorCode::unknown_symbol,
             "'" + name + "' is a network layer, not a math operation", col);
      symbol = e->symbol;
      arity = e->arity;
    } else {
      unresolved(name, col);
    }
    if (arity == kVariadic ? nargs == 0
                           : nargs != static_cast<std::size_t>(arity)) {
      fail(ErrorCode::syntax_error,
           "'" + name + "' takes " +
               (arity == kVariadic ? std::string("at least 1")
                                   : std::to_string(arity)) +
               " argument(s), got " + std::to_string(nargs),
           col);
    }
    return symbol;
  }

  [[noreturn]] void unresolved(const std::string& name, std::size_t col) {
    if (auto it = later_.find(name); it != later_.end() && it->second >= line_no_) {
      fail(ErrorCode::forward_reference,
           "'" + name + "' is used before its definition on line " +
               std::to_string(it->second),
           col);
    }
    std::string msg = "'" + name + "' is not in the codebook and not defined";
    const auto near = cb_.nearest(name);
    if (!near.empty()) {
      msg += " (nearest:";
      for (const auto& n : near) msg += " " + n;
      msg += ")";
    }
    fail(ErrorCode::unknown_symbol, msg, col);
  }

  // --- architecture --------------------------------------------------------

  HyperParam hyper() {
    const Token& t = peek();
    const auto col = t.col;
    auto div_suffix = [&](ParamRef r) -> HyperParam {
      if (accept('/')) {
        if (peek().kind != Tok::integer)
          fail(ErrorCode::syntax_error, "expected integer divisor", peek().col);
        r.div = std::stoll(next().text);
        if (r.div == 0)
          fail(ErrorCode::syntax_error, "division by zero", col);
      }
      return r;
    };
    switch (t.kind) {
      case Tok::integer: {
        const auto v = std::stoll(next().text);
        if (peek().kind == Tok::ident && peek().adjacent) {
          ParamRef r{next().text, v, 1};
          return div_suffix(r);
        }
        return IntLit{v};
      }
      case Tok::real:
        return RealLit{next().text};
      case Tok::size: {
        const auto s = next().text;
        const auto x = s.find('x');
        return SizeLit{std::stoll(s.substr(0, x)), std::stoll(s.substr(x + 1))};
      }
      case Tok::ident: {
        const auto name = next().text;
        if (hyper_keywords().count(name)) return Keyword{name};
        return div_suffix(ParamRef{name, 1, 1});
      }
      default:
        fail(ErrorCode::syntax_error, "expected a hyperparameter, found " +
                                          describe(t),
             col);
    }
  }

  std::vector<HyperParam> hyper_args() {
    std::vector<HyperParam> out;
    if (!accept('(')) return out;
    if (accept(')')) return out;
    do {
      out.push_back(hyper());
    } while (accept(','));
    expect(')');
    return out;
  }

  static ArchNode unwrap(Chain c) {
    if (c.items.size() == 1) return std::move(c.items.front());
    return ArchNode{std::move(c)};
  }

  /// Top-level chains stay chains, even with a single element.
  ArchNode top_chain() { return ArchNode{chain()}; }

  Chain chain() {
    Chain c;
    do {
      auto t = term();
      if (auto* inner = std::get_if<Chain>(&t.v)) {
        for (auto& i : inner->items) c.items.push_back(std::move(i));
      } else {
        c.items.push_back(std::move(t));
      }
    } while (peek().kind == Tok::arrow && (next(), true));
    return c;
  }

  ArchNode term() {
    ArchNode node = atom();
    while (peek().kind == Tok::ident && peek().text == "x") {
      next();
      const auto col = peek().col;
      auto count = hyper();
      if (const auto* i = std::get_if<IntLit>(&count)) {
        if (i->value < 1) fail(ErrorCode::syntax_error, "replication count must be >= 1", col);
        if (i->value == 1) continue;  // x 1 is the identity
      }
      node = ArchNode{Replicate{std::move(node), std::move(count)}};
    }
    return node;
  }

  ArchNode atom() {
    const Token& t = peek();
    const auto col = t.col;
    if (accept('(')) {
      auto c = chain();
      expect(')');
      return unwrap(std::move(c));
    }
    if (t.kind != Tok::ident)
      fail(ErrorCode::syntax_error, "expected a layer, found " + describe(t), col);
    const std::string name = next().text;
    if (name == "skip" && is_punct('(')) {
      next();
      auto c = chain();
      expect(')');
      return ArchNode{SkipAdd{unwrap(std::move(c))}};
    }
    if (name == "concat" && is_punct('(')) {
      next();
      ConcatJoin j;
      do {
        j.branches.push_back(unwrap(chain()));
      } while (accept(','));
      expect(')');
      if (j.branches.size() < 2)
        fail(ErrorCode::syntax_error, "concat needs at least 2 branches", col);
      return ArchNode{std::move(j)};
    }
    if (name == "dense" && is_punct('(')) {
      next();
      auto c = chain();
      expect(',');
      const auto count_col = peek().col;
      auto count = hyper();
      if (const auto* i = std::get_if<IntLit>(&count); i && i->value < 1)
        fail(ErrorCode::syntax_error, "dense count must be >= 1", count_col);
      expect(')');
      return ArchNode{Dense{unwrap(std::move(c)), std::move(count)}};
    }
    auto args = hyper_args();
    if (const auto* e = cb_.find(name)) {
      if (e->category != "nn_layer")
        fail(ErrorCode::unknown_symbol,
             "'" + name + "' is a " + e->category + ", not a network layer",
             col);
      return ArchNode{PrimitiveLayer{e->symbol, std::move(args)}};
    }
    if (!defined_.count(name)) unresolved(name, col);
    return ArchNode{NamedRef{name, std::move(args)}};
  }

  void parse_definition(Section& sec) {
    Definition d;
    const auto col = peek().col;
    d.name = expect_ident("block name");
    if (cb_.contains(d.name) || defined_.count(d.name))
      fail(ErrorCode::syntax_error, "'" + d.name + "' is already defined", col);
    if (accept('(')) {
      bool any_default = false;
      do {
        d.params.push_back(expect_ident("parameter name"));
        if (accept('=')) {
          d.defaults.resize(d.params.size());
          d.defaults.back() = hyper();
          any_default = true;
        } else if (any_default) {
          fail(ErrorCode::syntax_error,
               "parameter without default after one with a default",
               peek().col);
        }
      } while (accept(','));
      expect(')');
      if (any_default) d.defaults.resize(d.params.size());
    }
    expect('=');
    d.body = top_chain();
    expect_end();
    arch_.definitions.push_back(d);
    check_arch(nullptr);
    defined_.insert(d.name);
    sec.items.emplace_back(std::move(d));
  }

  void parse_binding(Section& sec) {
    Binding b;
    b.name = expect_ident("binding name");
    expect('=');
    b.value = hyper();
    expect_end();
    arch_.bindings.push_back(b);
    check_arch(nullptr);
    sec.items.emplace_back(std::move(b));
  }

  /// Validates everything seen so far; anything flagged is new on this line.
  void check_arch(const ArchNode* forward) {
    ArchitectureSpec spec = arch_;
    if (forward) spec.forward_pass = *forward;
    std::set<std::string> external;
    for (const auto& [name, arity] : local_ops_) external.insert(name);
    const auto rep = validate(spec, cb_, external);
    if (rep.ok()) return;
    const auto& v = rep.violations.front();
    const ErrorCode code = v.code == "forward_reference" ? ErrorCode::forward_reference
                           : v.code == "unknown_symbol"  ? ErrorCode::unknown_symbol
                                                         : ErrorCode::syntax_error;
    fail(code, v.code + ": " + v.message, 1);
  }

  const Codebook& cb_;
  DescriptionDoc doc_;
  // Every eq/def name with its line, so an early use is reported as a
  // forward reference rather than an unknown symbol.
  std::map<std::string, std::size_t> later_;
  std::set<std::string> defined_;
  LocalOperators local_ops_;
  ArchitectureSpec arch_;
  std::string eq_name_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
  std::size_t indent_ = 0;
};

// --- rendering -------------------------------------------------------------

class EquationWriter {
 public:
  EquationWriter(const ComputationGraph& g, const Codebook& cb) : g_(g), cb_(cb) {
    args_.resize(g.vertices.size());
    for (const auto& e : g.edges) args_[e.dst].push_back(e);
    for (auto& a : args_)
      std::sort(a.begin(), a.end(), [](const Edge& x, const Edge& y) {
        return x.arg_position < y.arg_position;
      });
  }

  std::string render_output() const {
    const auto& in = args_[g_.output_vertex];
    if (in.empty()) throw Error(ErrorCode::invalid_graph, "output has no producer");
    return render(in.front().src, 0);
  }

 private:
  std::string render(std::size_t v, int parent_prec) const {
    const auto& vx = g_.vertices[v];
    if (const auto* var = std::get_if<Variable>(&vx.kind)) return var->name;
    if (const auto* c = std::get_if<Constant>(&vx.kind)) return c->text;
    const auto& sym = std::get<Operator>(vx.kind).symbol;
    const auto& a = args_[v];
    if (auto it = infix_ops().find(sym); it != infix_ops().end() && a.size() == 2) {
      const auto& [spelling, prec] = it->second;
      const bool right_assoc = spelling == "^";
      const auto lhs = render(a[0].src, right_assoc ? prec + 1 : prec);
      const auto rhs = render(a[1].src, right_assoc ? prec : prec + 1);
      std::string s = lhs + " " + spelling + " " + rhs;
      return prec < parent_prec ? "(" + s + ")" : s;
    }
    std::string s = source_name(sym, cb_) + "(";
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i) s += ", ";
      s += render(a[i].src, 0);
    }
    return s + ")";
  }

  const ComputationGraph& g_;
  const Codebook& cb_;
  std::vector<std::vector<Edge>> args_;
};

}  // namespace dsl_detail

/// Parses a description. Errors carry the 1-based line and column.
inline DescriptionDoc parse(std::string_view source,
                            const Codebook& cb = Codebook::standard()) {
  return dsl_detail::Parser(cb).parse(source);
}

inline std::string equation_source(const EquationItem& eq,
                                   const Codebook& cb = Codebook::standard()) {
  std::string s = eq.name + "(";
  for (std::size_t i = 0; i < eq.params.size(); ++i) {
    if (i) s += ", ";
    s += eq.params[i];
  }
  return s + ") = " + dsl_detail::EquationWriter(eq.graph, cb).render_output();
}

inline std::string definition_source(const Definition& d) {
  std::string s = d.name;
  if (!d.params.empty()) {
    s += "(";
    for (std::size_t i = 0; i < d.params.size(); ++i) {
      if (i) s += ", ";
      s += d.params[i];
      if (i < d.defaults.size() && d.defaults[i]) s += " = " + to_source(*d.defaults[i]);
    }
    s += ")";
  }
  return s + " = " + to_source(d.body);
}

/// Canonical source; parse(roundtrip(doc)) == doc for every parsed doc.
inline std::string roundtrip(const DescriptionDoc& doc,
                             const Codebook& cb = Codebook::standard()) {
  std::ostringstream os;
  if (!doc.model_name.empty()) os << "model " << doc.model_name << "\n";
  if (doc.baseline_ref) os << "baseline " << *doc.baseline_ref << "\n";
  for (const auto& s : doc.sections) {
    os << "\nsection " << s.name;
    if (s.inherited_from_baseline) {
      os << " @inherit";
      if (!s.inherit_ref.empty()) os << "(" << s.inherit_ref << ")";
    }
    os << "\n";
    for (const auto& item : s.items) {
      os << "  ";
      if (const auto* t = std::get_if<TextItem>(&item)) {
        os << "text " << t->text;
      } else if (const auto* e = std::get_if<EquationItem>(&item)) {
        os << "eq " << equation_source(*e, cb);
      } else if (const auto* d = std::get_if<Definition>(&item)) {
        os << "def " << definition_source(*d);
      } else if (const auto* b = std::get_if<Binding>(&item)) {
        os << "let " << b->name << " = " << to_source(b->value);
      } else if (const auto* f = std::get_if<ForwardItem>(&item)) {
        os << "forward " << to_source(f->chain);
      }
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace rvw

#endif  // RVW_DSL_HPP
