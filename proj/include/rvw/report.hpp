#ifndef RVW_REPORT_HPP
#define RVW_REPORT_HPP

// Rendering of bounds, tables, ledgers, verification reports and parsed
// documents as text, JSON or CSV. JSON documents carry a "schema" tag; the
// matching JSON Schema files live in data/schemas/.

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rvw/bound.hpp"
#include "rvw/doc.hpp"
#include "rvw/dsl.hpp"
#include "rvw/error.hpp"
#include "rvw/graph.hpp"
#include "rvw/ledger.hpp"
#include "rvw/verify.hpp"

namespace rvw {

enum class Format { text, json, csv };

inline Format format_from_string(std::string_view s) {
  if (s == "text") return Format::text;
  if (s == "json") return Format::json;
  if (s == "csv") return Format::csv;
  throw Error(ErrorCode::invalid_input,
              "unknown format '" + std::string(s) + "' (text, json, csv)");
}

/// Shared regime for bound computations.
struct RunConfig {
  std::uint64_t n_test = 50000;
  std::uint64_t cap_c = 5000;
  double delta = 0.05;
  Format format = Format::text;
};

/// Probability as a percentage rounded half-up to two decimals, e.g. "7.39%".
inline std::string format_percent(double p) {
  const double hundredths = std::floor(p * 10000.0 + 0.5);
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << hundredths / 100.0 << "%";
  return os.str();
}

struct TableRow {
  std::string model;
  double test_error = 0.0;
  std::uint64_t desc_bits_with_baseline = 0;
  double bound_with_baseline = 0.0;
  std::uint64_t desc_bits_without = 0;
  double bound_without = 0.0;
};

/// A row given as reported inputs; bounds are computed from them.
struct RowInput {
  std::string model;
  double test_error = 0.0;
  std::uint64_t bits_with_baseline = 0;
  std::uint64_t bits_without = 0;
};

/// Reported (test error, description length) pairs, used as inputs only.
/// option1: English at 1.0 bit per character; option2: 10 bits per word.
inline std::vector<RowInput> paper_preset(std::string_view name) {
  if (name == "option1") {
    return {{"ResNet-152", 0.0449, 426, 729}, {"DenseNet-264", 0.0529, 362, 741}};
  }
  if (name == "option2") {
    return {{"ResNet-152", 0.0449, 556, 1032}, {"DenseNet-264", 0.0529, 454, 980}};
  }
  throw Error(ErrorCode::invalid_input,
              "unknown preset '" + std::string(name) + "' (option1, option2)");
}

inline TableRow make_row(const RowInput& in, const RunConfig& cfg) {
  auto bound = [&](std::uint64_t bits) {
    return solve_bound({in.test_error, bits, cfg.cap_c, cfg.delta, cfg.n_test})
        .p_star;
  };
  return {in.model,
          in.test_error,
          in.bits_with_baseline,
          bound(in.bits_with_baseline),
          in.bits_without,
          bound(in.bits_without)};
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

inline std::string pad(const std::string& s, std::size_t w, bool right = false) {
  if (s.size() >= w) return s;
  const std::string fill(w - s.size(), ' ');
  return right ? fill + s : s + fill;
}

}  // namespace detail

// --- bound -----------------------------------------------------------------

inline nlohmann::json bound_json(const BoundInputs& in, const BoundResult& r) {
  nlohmann::json warnings = nlohmann::json::array();
  for (auto w : r.warnings) warnings.push_back(to_string(w));
  return {{"schema", "rvw.bound/1"},
          {"inputs",
           {{"p_hat", in.p_hat},
            {"desc_bits", in.desc_bits},
            {"cap_c", in.cap_c},
            {"delta", in.delta},
            {"n_test", in.n_test}}},
          {"p_star", r.p_star},
          {"p_star_percent", format_percent(r.p_star)},
          {"slack_k", r.slack_k},
          {"roots", {r.roots.first, r.roots.second}},
          {"margin", r.margin},
          {"folklore", folklore_bound(in.desc_bits, in.n_test, 1.0)},
          {"warnings", warnings}};
}

inline std::string render_bound(const BoundInputs& in, const BoundResult& r,
                                Format f) {
  if (f == Format::json) return bound_json(in, r).dump(2) + "\n";
  std::ostringstream os;
  if (f == Format::csv) {
    os << "p_hat,desc_bits,cap_c,delta,n_test,p_star,slack_k,root_lo,root_hi,"
          "margin,warnings\n";
    std::string w;
    for (auto x : r.warnings) w += (w.empty() ? "" : ";") + to_string(x);
    os << std::setprecision(17) << in.p_hat << "," << in.desc_bits << ","
       << in.cap_c << "," << in.delta << "," << in.n_test << "," << r.p_star
       << "," << r.slack_k << "," << r.roots.first << "," << r.roots.second
       << "," << r.margin << "," << w << "\n";
    return os.str();
  }
  os << "bound      " << format_percent(r.p_star) << "  (p* = "
     << detail::fixed(r.p_star, 6) << ")\n"
     << "test error " << format_percent(in.p_hat) << "\n"
     << "margin     " << detail::fixed(r.margin, 6) << "\n"
     << "K          " << std::setprecision(10) << r.slack_k << "\n"
     << "roots      " << r.roots.first << ", " << r.roots.second << "\n"
     << "folklore   " << detail::fixed(folklore_bound(in.desc_bits, in.n_test, 1.0), 6)
     << "  (sqrt(bits / N))\n";
  for (auto w : r.warnings) os << "warning: " << to_string(w) << "\n";
  return os.str();
}

// --- table -----------------------------------------------------------------

inline nlohmann::json table_json(const std::vector<TableRow>& rows,
                                 const RunConfig& cfg) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"model", r.model},
                   {"test_error", r.test_error},
                   {"desc_bits_with_baseline", r.desc_bits_with_baseline},
                   {"bound_with_baseline", r.bound_with_baseline},
                   {"bound_with_baseline_percent", format_percent(r.bound_with_baseline)},
                   {"desc_bits_without", r.desc_bits_without},
                   {"bound_without", r.bound_without},
                   {"bound_without_percent", format_percent(r.bound_without)}});
  }
  return {{"schema", "rvw.table/1"},
          {"regime",
           {{"n_test", cfg.n_test}, {"cap_c", cfg.cap_c}, {"delta", cfg.delta}}},
          {"rows", out}};
}

inline std::string render_table(const std::vector<TableRow>& rows,
                                const RunConfig& cfg) {
  if (cfg.format == Format::json) return table_json(rows, cfg).dump(2) + "\n";
  std::ostringstream os;
  if (cfg.format == Format::csv) {
    os << "model,test_error,desc_bits_with_baseline,bound_with_baseline,"
          "desc_bits_without,bound_without\n";
    for (const auto& r : rows) {
      os << detail::csv_field(r.model) << "," << std::setprecision(17)
         << r.test_error << "," << r.desc_bits_with_baseline << ","
         << r.bound_with_baseline << "," << r.desc_bits_without << ","
         << r.bound_without << "\n";
    }
    return os.str();
  }
  const std::vector<std::string> head{"Model", "Test error", "Bits (w/ base)",
                                      "Bound (w/ base)", "Bits (w/o)",
                                      "Bound (w/o)"};
  std::vector<std::vector<std::string>> body;
  for (const auto& r : rows) {
    body.push_back({r.model, format_percent(r.test_error),
                    std::to_string(r.desc_bits_with_baseline),
                    format_percent(r.bound_with_baseline),
                    std::to_string(r.desc_bits_without),
                    format_percent(r.bound_without)});
  }
  std::vector<std::size_t> w(head.size());
  for (std::size_t c = 0; c < head.size(); ++c) {
    w[c] = head[c].size();
    for (const auto& b : body) w[c] = std::max(w[c], b[c].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) os << "  ";
      os << detail::pad(cells[c], w[c], c > 0);
    }
    os << "\n";
  };
  line(head);
  std::vector<std::string> rule;
  for (auto x : w) rule.emplace_back(x, '-');
  line(rule);
  for (const auto& b : body) line(b);
  return os.str();
}

// --- ledger ----------------------------------------------------------------

inline std::string render_ledger(const BitLedger& l, Format f) {
  switch (f) {
    case Format::json:
      return l.to_json().dump(2) + "\n";
    case Format::csv: {
      std::ostringstream os;
      os << "label,bits,rubric,inherited,nominal_bits\n";
      for (const auto& i : l.items()) {
        os << detail::csv_field(i.label) << "," << i.bits << "," << i.rubric
           << "," << (i.inherited ? "true" : "false") << "," << i.nominal_bits
           << "\n";
      }
      return os.str();
    }
    case Format::text:
      break;
  }
  return l.to_table();
}

// --- verification ----------------------------------------------------------

struct VerifyCheck {
  std::string name;
  nlohmann::json params;
  nlohmann::json result;
  bool passed = false;
};

inline nlohmann::json verify_json(const std::vector<VerifyCheck>& checks,
                                  const McConfig& cfg) {
  nlohmann::json arr = nlohmann::json::array();
  bool all = true;
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name},
                   {"params", c.params},
                   {"result", c.result},
                   {"passed", c.passed}});
    all = all && c.passed;
  }
  return {{"schema", "rvw.verify/1"},
          {"config",
           {{"trials", cfg.trials}, {"seed", cfg.seed}, {"workers", cfg.workers}}},
          {"checks", arr},
          {"passed", all}};
}

inline std::string render_verify(const std::vector<VerifyCheck>& checks,
                                  const McConfig& cfg, Format f) {
  if (f == Format::json) return verify_json(checks, cfg).dump(2) + "\n";
  std::ostringstream os;
  if (f == Format::csv) {
    os << "name,passed,result\n";
    for (const auto& c : checks)
      os << c.name << "," << (c.passed ? "true" : "false") << ","
         << detail::csv_field(c.result.dump()) << "\n";
    return os.str();
  }
  for (const auto& c : checks) {
    os << (c.passed ? "PASS " : "FAIL ") << c.name << "  " << c.result.dump()
       << "\n";
  }
  return os.str();
}

// --- documents -------------------------------------------------------------

inline nlohmann::json doc_json(const DescriptionDoc& doc,
                               const Codebook& cb = Codebook::standard()) {
  nlohmann::json sections = nlohmann::json::array();
  for (const auto& s : doc.sections) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& i : s.items) {
      if (const auto* t = std::get_if<TextItem>(&i)) {
        items.push_back({{"type", "text"}, {"text", t->text}});
      } else if (const auto* e = std::get_if<EquationItem>(&i)) {
        items.push_back({{"type", "equation"},
                         {"name", e->name},
                         {"params", e->params},
                         {"source", equation_source(*e, cb)},
                         {"graph", to_json(e->graph)}});
      } else if (const auto* d = std::get_if<Definition>(&i)) {
        items.push_back({{"type", "definition"},
                         {"name", d->name},
                         {"params", d->params},
                         {"source", definition_source(*d)}});
      } else if (const auto* b = std::get_if<Binding>(&i)) {
        items.push_back(
            {{"type", "binding"}, {"name", b->name}, {"value", to_source(b->value)}});
      } else if (const auto* f = std::get_if<ForwardItem>(&i)) {
        items.push_back({{"type", "forward"}, {"source", to_source(f->chain)}});
      }
    }
    sections.push_back({{"name", s.name},
                        {"kind", std::string(to_string(s.kind()))},
                        {"inherited", s.inherited_from_baseline},
                        {"inherit_ref", s.inherit_ref},
                        {"items", items}});
  }
  nlohmann::json out{{"schema", "rvw.doc/1"},
                     {"model", doc.model_name},
                     {"sections", sections}};
  out["baseline"] = doc.baseline_ref ? nlohmann::json(*doc.baseline_ref)
                                     : nlohmann::json(nullptr);
  return out;
}

}  // namespace rvw

#endif  // RVW_REPORT_HPP
