#include "neurolabel/label.hpp"

#include <cctype>

#include "neurolabel/error.hpp"

namespace nlab {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

ConceptLabel ConceptLabel::normalize(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (out.empty()) {
    throw Error(Errc::invalid_label, "label is empty after normalization");
  }
  return ConceptLabel(std::move(out));
}

std::size_t ConceptLabel::word_count() const noexcept {
  std::size_t words = 1;
  for (char c : text_) {
    if (c == ' ') ++words;
  }
  return words;
}

}  // namespace nlab
