#include "neurolabel/neuron.hpp"

#include <charconv>

#include <fmt/format.h>

#include "neurolabel/error.hpp"

namespace nlab {

namespace {

std::size_t parse_index(std::string_view text, std::string_view context) {
  std::size_t value = 0;
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw Error(Errc::configuration,
                fmt::format("invalid neuron index '{}' in '{}'", text, context));
  }
  return value;
}

std::pair<std::string_view, std::string_view> split_layer(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(Errc::configuration, fmt::format("expected 'layer:index', got '{}'", text));
  }
  return {text.substr(0, colon), text.substr(colon + 1)};
}

}  // namespace

std::string to_string(const NeuronAddress& neuron) {
  return fmt::format("{}:{}", neuron.layer, neuron.index);
}

NeuronAddress parse_neuron(std::string_view text) {
  auto [layer, index] = split_layer(text);
  return NeuronAddress{std::string(layer), parse_index(index, text)};
}

std::vector<NeuronAddress> parse_neuron_selector(std::string_view selector) {
  auto [layer, spec] = split_layer(selector);
  std::vector<NeuronAddress> out;
  while (!spec.empty()) {
    const auto comma = spec.find(',');
    const auto part = spec.substr(0, comma);
    spec = comma == std::string_view::npos ? std::string_view{} : spec.substr(comma + 1);
    const auto dash = part.find('-');
    if (dash == std::string_view::npos) {
      out.push_back({std::string(layer), parse_index(part, selector)});
      continue;
    }
    const auto lo = parse_index(part.substr(0, dash), selector);
    const auto hi = parse_index(part.substr(dash + 1), selector);
    if (hi < lo) {
      throw Error(Errc::configuration, fmt::format("empty neuron range in '{}'", selector));
    }
    for (auto i = lo; i <= hi; ++i) out.push_back({std::string(layer), i});
  }
  if (out.empty()) {
    throw Error(Errc::configuration, fmt::format("selector '{}' names no neurons", selector));
  }
  return out;
}

std::string neuron_file_stem(const NeuronAddress& neuron) {
  std::string layer = neuron.layer;
  for (auto& c : layer) {
    if (c == '/' || c == '\\' || c == ':' || c == ' ') c = '_';
  }
  return fmt::format("{}_{}", layer, neuron.index);
}

}  // namespace nlab
