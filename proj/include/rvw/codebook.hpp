#ifndef RVW_CODEBOOK_HPP
#define RVW_CODEBOOK_HPP

// Fixed vocabulary of primitives that predate the test set, grouped into
// categories. Each category is a code table; a symbol from it costs
// ceil(log2 |category|) bits.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rvw/error.hpp"

namespace rvw {

/// Semantic slot of a hyperparameter; calibration profiles price by role.
enum class HyperRole { filter, channels, stride, rate, count, generic };

inline std::string_view to_string(HyperRole r) {
  switch (r) {
    case HyperRole::filter: return "filter";
    case HyperRole::channels: return "channels";
    case HyperRole::stride: return "stride";
    case HyperRole::rate: return "rate";
    case HyperRole::count: return "count";
    case HyperRole::generic: return "generic";
  }
  return "generic";
}

inline HyperRole hyper_role_from_string(std::string_view s) {
  for (auto r : {HyperRole::filter, HyperRole::channels, HyperRole::stride,
                 HyperRole::rate, HyperRole::count, HyperRole::generic}) {
    if (to_string(r) == s) return r;
  }
  throw Error(ErrorCode::invalid_input,
              "unknown hyperparameter role '" + std::string(s) + "'");
}

/// ceil(log2 n); 0 for n <= 1.
inline std::uint32_t ceil_log2(std::uint64_t n) {
  std::uint32_t w = 0;
  while (w < 64 && (std::uint64_t{1} << w) < n) ++w;
  return w;
}

struct HyperParamSlot {
  std::string name;
  HyperRole role = HyperRole::generic;
  bool operator==(const HyperParamSlot&) const = default;
};

inline constexpr int kVariadic = -1;

struct CodeEntry {
  std::string symbol;
  std::string category;
  std::uint32_t index = 0;
  int arity = 0;  // kVariadic for any number of arguments
  bool order_sensitive = false;
  std::vector<HyperParamSlot> params;  // layer hyperparameter signature
  std::vector<std::string> aliases;
  bool operator==(const CodeEntry&) const = default;
};

struct CodeCategory {
  std::string name;
  std::vector<CodeEntry> entries;
  /// Size of the code table when entries are not enumerated (ste_word).
  std::optional<std::uint64_t> declared_size;
  std::optional<std::uint32_t> width_override;

  std::uint64_t size() const {
    return declared_size ? *declared_size : entries.size();
  }
  std::uint32_t width_bits() const {
    return width_override ? *width_override : ceil_log2(size());
  }
  bool operator==(const CodeCategory&) const = default;
};

namespace detail {

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const auto lower = [](char c) {
        return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      };
      const std::size_t sub = lower(a[i - 1]) == lower(b[j - 1]) ? 0 : 1;
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

struct EntrySpec {
  const char* symbol;
  int arity;
  bool order_sensitive;
  std::vector<HyperParamSlot> params;
  std::vector<std::string> aliases;
};

inline CodeCategory make_category(std::string name,
                                  std::vector<EntrySpec> specs) {
  CodeCategory cat;
  cat.name = std::move(name);
  std::uint32_t idx = 0;
  for (auto& s : specs) {
    cat.entries.push_back(CodeEntry{s.symbol, cat.name, idx++, s.arity,
                                    s.order_sensitive, std::move(s.params),
                                    std::move(s.aliases)});
  }
  return cat;
}

}  // namespace detail

class Codebook {
 public:
  Codebook() = default;

  explicit Codebook(std::vector<CodeCategory> categories)
      : categories_(std::move(categories)) {
    reindex();
  }

  /// The built-in vocabulary.
  static const Codebook& standard() {
    static const Codebook cb = make_standard();
    return cb;
  }

  const std::vector<CodeCategory>& categories() const { return categories_; }

  bool contains(std::string_view symbol) const {
    return by_name_.count(std::string(symbol)) > 0;
  }

  const CodeEntry* find(std::string_view symbol) const {
    auto it = by_name_.find(std::string(symbol));
    if (it == by_name_.end()) return nullptr;
    return &categories_[it->second.first].entries[it->second.second];
  }

  /// Resolves a symbol or one of its aliases. Throws unknown_symbol with
  /// the closest known names otherwise.
  const CodeEntry& lookup(std::string_view symbol) const {
    if (const auto* e = find(symbol)) return *e;
    throw Error(ErrorCode::unknown_symbol, unknown_message(symbol));
  }

  const CodeCategory& category(std::string_view name) const {
    for (const auto& c : categories_) {
      if (c.name == name) return c;
    }
    throw Error(ErrorCode::unknown_category,
                "no category named '" + std::string(name) + "'");
  }

  std::uint32_t width(std::string_view category_name) const {
    return category(category_name).width_bits();
  }

  /// Width of the code for the category holding `symbol`.
  std::uint32_t symbol_width(std::string_view symbol) const {
    return width(lookup(symbol).category);
  }

  std::vector<std::string> nearest(std::string_view symbol,
                                   std::size_t limit = 3) const {
    std::vector<std::pair<std::size_t, std::string>> scored;
    for (const auto& [name, pos] : by_name_) {
      scored.emplace_back(detail::edit_distance(symbol, name), name);
    }
    std::sort(scored.begin(), scored.end());
    std::vector<std::string> out;
    for (const auto& [d, name] : scored) {
      if (out.size() >= limit || d > std::max<std::size_t>(2, symbol.size() / 2))
        break;
      const auto& canon = find(name)->symbol;
      if (std::find(out.begin(), out.end(), canon) == out.end())
        out.push_back(canon);
    }
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json cats = nlohmann::json::array();
    for (const auto& c : categories_) {
      nlohmann::json jc;
      jc["name"] = c.name;
      jc["size"] = c.size();
      jc["width_bits"] = c.width_bits();
      if (c.declared_size) jc["declared_size"] = *c.declared_size;
      if (c.width_override) jc["width_override"] = *c.width_override;
      nlohmann::json entries = nlohmann::json::array();
      for (const auto& e : c.entries) {
        nlohmann::json je;
        je["symbol"] = e.symbol;
        je["index"] = e.index;
        if (e.arity == kVariadic) {
          je["arity"] = "variadic";
        } else {
          je["arity"] = e.arity;
        }
        je["order_sensitive"] = e.order_sensitive;
        if (!e.params.empty()) {
          nlohmann::json ps = nlohmann::json::array();
          for (const auto& p : e.params) {
            ps.push_back({{"name", p.name}, {"role", to_string(p.role)}});
          }
          je["params"] = ps;
        }
        if (!e.aliases.empty()) je["aliases"] = e.aliases;
        entries.push_back(je);
      }
      jc["entries"] = entries;
      cats.push_back(jc);
    }
    return {{"schema", "rvw.codebook/1"}, {"categories", cats}};
  }

  static Codebook from_json(const nlohmann::json& j) {
    try {
      std::vector<CodeCategory> cats;
      for (const auto& jc : j.at("categories")) {
        CodeCategory c;
        c.name = jc.at("name").get<std::string>();
        if (jc.contains("declared_size"))
          c.declared_size = jc["declared_size"].get<std::uint64_t>();
        if (jc.contains("width_override"))
          c.width_override = jc["width_override"].get<std::uint32_t>();
        std::uint32_t idx = 0;
        for (const auto& je : jc.at("entries")) {
          CodeEntry e;
          e.symbol = je.at("symbol").get<std::string>();
          e.category = c.name;
          e.index = idx++;
          const auto& ar = je.at("arity");
          e.arity = ar.is_string() ? kVariadic : ar.get<int>();
          e.order_sensitive = je.value("order_sensitive", false);
          if (je.contains("params")) {
            for (const auto& p : je["params"]) {
              e.params.push_back({p.at("name").get<std::string>(),
                                  hyper_role_from_string(
                                      p.at("role").get<std::string>())});
            }
          }
          if (je.contains("aliases"))
            e.aliases = je["aliases"].get<std::vector<std::string>>();
          c.entries.push_back(std::move(e));
        }
        cats.push_back(std::move(c));
      }
      return Codebook(std::move(cats));
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::invalid_input,
                  std::string("malformed codebook JSON: ") + ex.what());
    }
  }

  static Codebook load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open codebook " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::invalid_input,
                  "codebook " + path + ": " + ex.what());
    }
    return from_json(j);
  }

  bool operator==(const Codebook& o) const {
    return categories_ == o.categories_;
  }

 private:
  void reindex() {
    by_name_.clear();
    for (std::size_t ci = 0; ci < categories_.size(); ++ci) {
      auto& cat = categories_[ci];
      for (std::size_t ei = 0; ei < cat.entries.size(); ++ei) {
        auto& e = cat.entries[ei];
        e.index = static_cast<std::uint32_t>(ei);
        e.category = cat.name;
        add_name(e.symbol, ci, ei);
        for (const auto& a : e.aliases) add_name(a, ci, ei);
      }
    }
  }

  void add_name(const std::string& name, std::size_t ci, std::size_t ei) {
    if (!by_name_.emplace(name, std::make_pair(ci, ei)).second) {
      throw Error(ErrorCode::invalid_input,
                  "duplicate codebook symbol '" + name + "'");
    }
  }

  std::string unknown_message(std::string_view symbol) const {
    std::ostringstream os;
    os << "'" << symbol << "' is not in the vocabulary";
    const auto near = nearest(symbol);
    if (!near.empty()) {
      os << " (did you mean";
      for (std::size_t i = 0; i < near.size(); ++i) {
        os << (i ? ", " : " ") << near[i];
      }
      os << "?)";
    }
    os << "; define it locally or describe it in English";
    return os.str();
  }

  static Codebook make_standard();

  std::vector<CodeCategory> categories_;
  std::map<std::string, std::pair<std::size_t, std::size_t>> by_name_;
};

inline Codebook Codebook::make_standard() {
  using detail::make_category;
  using R = HyperRole;
  std::vector<CodeCategory> cats;

  cats.push_back(make_category(
      "math_op",
      {
          {"add", 2, false, {}, {}},
          {"subtract", 2, true, {}, {}},
          {"multiply", 2, false, {}, {}},
          {"divide", 2, true, {}, {}},
          {"mod", 2, true, {}, {}},
          {"sin", 1, false, {}, {}},
          {"arcsin", 1, false, {}, {"asin"}},
          {"exp", 1, false, {}, {}},
          {"log", 1, false, {}, {}},
          {"power", 2, true, {}, {"pow"}},
          {"round", 1, false, {}, {}},
          {"clip", 3, true, {}, {}},
          {"sqrt", 1, false, {}, {}},
          {"abs", 1, false, {}, {}},
          {"sign", 1, false, {}, {}},
          {"max", kVariadic, false, {}, {}},
          {"argmax", 1, false, {}, {}},
          {"dot", 2, false, {}, {}},
          {"matmul", 2, true, {}, {}},
          {"svd", 1, false, {}, {}},
          {"pseudo-inverse", 1, false, {}, {"pinv"}},
          {"kronecker-product", 2, true, {}, {"kron"}},
          {"i", 0, false, {}, {}},
          {"Re", 1, false, {}, {}},
          {"Im", 1, false, {}, {}},
      }));

  cats.push_back(make_category(
      "sampling_fn",
      {
          {"N", 2, true, {}, {"Normal"}},
          {"Laplace", 2, true, {}, {}},
          {"Uniform", 2, true, {}, {}},
          {"Bernoulli", 1, false, {}, {}},
          {"Beta", 2, true, {}, {}},
          {"Multinomial", 2, true, {}, {}},
          {"Poisson", 1, false, {}, {}},
          {"RandInt", 2, true, {}, {}},
          {"SetRNGSeed", 1, false, {}, {}},
      }));

  cats.push_back(make_category(
      "tensor_op",
      {
          {"index", 2, true, {}, {}},
          {"concat", kVariadic, true, {}, {}},
          {"split", 2, true, {}, {}},
          {"reshape", 2, true, {}, {}},
          {"copy", 1, false, {}, {}},
      }));

  cats.push_back(make_category(
      "nn_layer",
      {
          {"Conv",
           kVariadic,
           false,
           {{"filter_size", R::filter},
            {"out_channels", R::channels},
            {"stride", R::stride}},
           {}},
          {"FullyConnected",
           kVariadic,
           false,
           {{"out_channels", R::channels}},
           {"FC"}},
          {"ReLU", kVariadic, false, {}, {}},
          {"Sigmoid", kVariadic, false, {}, {}},
          {"Threshold", kVariadic, false, {}, {}},
          {"SoftMax", kVariadic, false, {}, {"Softmax"}},
          {"MaxPooling",
           kVariadic,
           false,
           {{"filter_size", R::filter}, {"stride", R::stride}},
           {"MaxPool"}},
          {"AvgPooling",
           kVariadic,
           false,
           {{"filter_size", R::filter}, {"stride", R::stride}},
           {"AvgPool"}},
          {"Downsample", kVariadic, false, {{"stride", R::stride}},
           {"downsample"}},
          {"Dropout", kVariadic, false, {{"p", R::rate}}, {}},
      }));

  cats.push_back(make_category("optimizer",
                               {
                                   {"SGD", kVariadic, false, {}, {}},
                                   {"GradientDescent", kVariadic, false, {}, {}},
                                   {"AdaGrad", kVariadic, false, {}, {}},
                                   {"AdaDelta", kVariadic, false, {}, {}},
                                   {"RMSProp", kVariadic, false, {}, {}},
                               }));

  CodeCategory ste;
  ste.name = "ste_word";
  ste.declared_size = 875;
  cats.push_back(std::move(ste));

  return Codebook(std::move(cats));
}

}  // namespace rvw

#endif  // RVW_CODEBOOK_HPP
