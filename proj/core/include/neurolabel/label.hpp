#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>

namespace nlab {

/// A concept description in canonical form: ASCII-lowercased, trimmed, with
/// internal whitespace runs collapsed to one space. Two labels that differ
/// only in case or spacing compare equal.
class ConceptLabel {
 public:
  /// Throws Error{invalid_label} when `raw` has no non-whitespace character.
  static ConceptLabel normalize(std::string_view raw);

  const std::string& text() const noexcept { return text_; }
  std::size_t word_count() const noexcept;

  friend auto operator<=>(const ConceptLabel&, const ConceptLabel&) = default;

 private:
  explicit ConceptLabel(std::string text) : text_(std::move(text)) {}
  std::string text_;
};

inline ConceptLabel normalize_label(std::string_view raw) { return ConceptLabel::normalize(raw); }

}  // namespace nlab

template <>
struct std::hash<nlab::ConceptLabel> {
  std::size_t operator()(const nlab::ConceptLabel& label) const noexcept {
    return std::hash<std::string>{}(label.text());
  }
};
