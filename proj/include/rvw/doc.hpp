#ifndef RVW_DOC_HPP
#define RVW_DOC_HPP

#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "rvw/arch.hpp"
#include "rvw/graph.hpp"

namespace rvw {

struct TextItem {
  std::string text;
  bool operator==(const TextItem&) const = default;
};

struct EquationItem {
  std::string name;
  std::vector<std::string> params;  // params[0] is the input vertex
  ComputationGraph graph;           // canonical form
  bool operator==(const EquationItem&) const = default;
};

struct ForwardItem {
  ArchNode chain;
  bool operator==(const ForwardItem&) const = default;
};

using Item =
    std::variant<TextItem, EquationItem, Definition, Binding, ForwardItem>;

enum class SectionKind { english, equation, architecture, mixed };

inline std::string_view to_string(SectionKind k) {
  switch (k) {
    case SectionKind::english: return "english";
    case SectionKind::equation: return "equation";
    case SectionKind::architecture: return "architecture";
    case SectionKind::mixed: return "mixed";
  }
  return "mixed";
}

struct Section {
  std::string name;
  std::vector<Item> items;
  bool inherited_from_baseline = false;
  std::string inherit_ref;  // baseline named in @inherit(...)
  std::string raw_text;     // source lines, informational only

  SectionKind kind() const {
    bool text = false, eq = false, arch = false;
    for (const auto& i : items) {
      if (std::holds_alternative<TextItem>(i)) {
        text = true;
      } else if (std::holds_alternative<EquationItem>(i)) {
        eq = true;
      } else {
        arch = true;
      }
    }
    const int n = int(text) + int(eq) + int(arch);
    if (n > 1) return SectionKind::mixed;
    if (eq) return SectionKind::equation;
    if (arch) return SectionKind::architecture;
    return SectionKind::english;
  }

  /// Structural equality; raw_text is not part of the structure.
  bool operator==(const Section& o) const {
    return name == o.name && items == o.items &&
           inherited_from_baseline == o.inherited_from_baseline &&
           inherit_ref == o.inherit_ref;
  }
};

struct DescriptionDoc {
  std::string model_name;
  std::optional<std::string> baseline_ref;
  std::vector<Section> sections;

  bool operator==(const DescriptionDoc&) const = default;

  const Section* find_section(const std::string& name) const {
    for (const auto& s : sections)
      if (s.name == name) return &s;
    return nullptr;
  }

  /// Every definition, binding and forward pass, in document order.
  ArchitectureSpec architecture() const {
    ArchitectureSpec spec;
    for (const auto& s : sections) {
      for (const auto& i : s.items) {
        if (const auto* d = std::get_if<Definition>(&i)) {
          spec.definitions.push_back(*d);
        } else if (const auto* b = std::get_if<Binding>(&i)) {
          spec.bindings.push_back(*b);
        } else if (const auto* f = std::get_if<ForwardItem>(&i)) {
          spec.forward_pass = f->chain;
        }
      }
    }
    return spec;
  }

  /// Names defined by equations; usable as hyperparameter-free layers.
  std::set<std::string> equation_names() const {
    std::set<std::string> out;
    for (const auto& s : sections)
      for (const auto& i : s.items)
        if (const auto* e = std::get_if<EquationItem>(&i)) out.insert(e->name);
    return out;
  }

  /// Applies inheritance by section-name match against a baseline document.
  void inherit_from(const DescriptionDoc& baseline) {
    for (auto& s : sections) {
      if (baseline.find_section(s.name)) {
        s.inherited_from_baseline = true;
        if (s.inherit_ref.empty()) s.inherit_ref = baseline.model_name;
      }
    }
  }
};

}  // namespace rvw

#endif  // RVW_DOC_HPP
