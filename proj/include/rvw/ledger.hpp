#ifndef RVW_LEDGER_HPP
#define RVW_LEDGER_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace rvw {

struct LedgerItem {
  std::string label;
  std::uint64_t bits = 0;
  std::string rubric;
  bool inherited = false;
  /// What the item costs when baseline inheritance is not applied.
  std::uint64_t nominal_bits = 0;
  bool operator==(const LedgerItem&) const = default;
};

/// Itemized bit accounting. Totals are always recomputed from the items.
class BitLedger {
 public:
  void add(std::string label, std::uint64_t bits, std::string rubric) {
    items_.push_back({std::move(label), bits, std::move(rubric), false, bits});
  }

  /// Appends `other` with every label prefixed by `prefix`.
  void append(const BitLedger& other, const std::string& prefix = "") {
    for (auto item : other.items_) {
      item.label = prefix + item.label;
      items_.push_back(std::move(item));
    }
  }

  /// Zeroes every item but keeps its nominal cost.
  void mark_inherited() {
    for (auto& item : items_) {
      item.inherited = true;
      item.bits = 0;
    }
  }

  const std::vector<LedgerItem>& items() const { return items_; }
  bool empty() const { return items_.empty(); }

  std::uint64_t total_bits() const {
    return std::accumulate(
        items_.begin(), items_.end(), std::uint64_t{0},
        [](std::uint64_t s, const LedgerItem& i) { return s + i.bits; });
  }

  std::uint64_t total_without_inheritance() const {
    return std::accumulate(
        items_.begin(), items_.end(), std::uint64_t{0},
        [](std::uint64_t s, const LedgerItem& i) { return s + i.nominal_bits; });
  }

  /// Sum of items whose label starts with `prefix`.
  std::uint64_t subtotal(const std::string& prefix) const {
    std::uint64_t s = 0;
    for (const auto& i : items_)
      if (i.label.rfind(prefix, 0) == 0) s += i.bits;
    return s;
  }

  const LedgerItem* find(const std::string& label) const {
    for (const auto& i : items_)
      if (i.label == label) return &i;
    return nullptr;
  }

  bool operator==(const BitLedger&) const = default;

  nlohmann::json to_json() const {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& i : items_) {
      items.push_back({{"label", i.label},
                       {"bits", i.bits},
                       {"rubric", i.rubric},
                       {"inherited", i.inherited},
                       {"nominal_bits", i.nominal_bits}});
    }
    return {{"schema", "rvw.ledger/1"},
            {"items", items},
            {"total_bits", total_bits()},
            {"total_bits_without_inheritance", total_without_inheritance()}};
  }

  /// Aligned text table: label, bits, rubric, then the totals.
  std::string to_table() const {
    std::size_t wl = 5, wb = 4, wr = 6;
    for (const auto& i : items_) {
      wl = std::max(wl, i.label.size() + (i.inherited ? 12 : 0));
      wb = std::max(wb, std::to_string(i.nominal_bits).size());
      wr = std::max(wr, i.rubric.size());
    }
    std::ostringstream os;
    auto row = [&](const std::string& l, const std::string& b,
                   const std::string& r) {
      os << l << std::string(wl - l.size() + 2, ' ')
         << std::string(wb - std::min(wb, b.size()), ' ') << b;
      if (!r.empty()) os << "  " << r;
      os << "\n";
    };
    row("label", "bits", "rubric");
    row(std::string(wl, '-'), std::string(wb, '-'), std::string(wr, '-'));
    for (const auto& i : items_) {
      row(i.inherited ? i.label + " [inherited]" : i.label,
          std::to_string(i.bits), i.rubric);
    }
    row(std::string(wl, '-'), std::string(wb, '-'), std::string(wr, '-'));
    row("total", std::to_string(total_bits()), "");
    if (total_without_inheritance() != total_bits()) {
      row("total without inheritance",
          std::to_string(total_without_inheritance()), "");
    }
    return os.str();
  }

 private:
  std::vector<LedgerItem> items_;
};

}  // namespace rvw

#endif  // RVW_LEDGER_HPP
