#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace nlab {

/// A single scalar unit: channel `index` of the named layer.
struct NeuronAddress {
  std::string layer;
  std::size_t index = 0;

  friend auto operator<=>(const NeuronAddress&, const NeuronAddress&) = default;
};

/// "layer:index"
std::string to_string(const NeuronAddress& neuron);

/// Parses "layer:index".
NeuronAddress parse_neuron(std::string_view text);

/// Expands a selector such as "avgpool:0-99" or "avgpool:3,7,12-14" into
/// addresses, in the order written. Ranges are inclusive.
std::vector<NeuronAddress> parse_neuron_selector(std::string_view selector);

/// File-name-safe stem: "layer_index" with path separators replaced.
std::string neuron_file_stem(const NeuronAddress& neuron);

}  // namespace nlab
