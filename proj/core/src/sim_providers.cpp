#include "neurolabel/sim_providers.hpp"

#include <fmt/format.h>

#include "neurolabel/error.hpp"
#include "neurolabel/rng.hpp"

namespace nlab {

std::vector<Image> SimT2i::generate(std::span<const PromptSpec> prompts) {
  std::vector<Image> out;
  out.reserve(prompts.size());
  for (const auto& p : prompts) {
    out.push_back(Image{fmt::format("sim:{}#{}", p.concept_label.text(), to_hex(p.seed)), kEmbeddingMediaType, {},
                        world_.image(p.concept_label, p.seed)});
  }
  return out;
}

std::vector<std::vector<double>> SimVision::activations(std::span<const Image> images, const std::string& layer,
                                                        std::span<const std::size_t> indices) {
  std::vector<std::vector<double>> out;
  out.reserve(images.size());
  for (const auto& image : images) {
    if (image.embedding.empty()) {
      throw Error(Errc::protocol, fmt::format("image '{}' carries no embedding", image.id));
    }
    std::vector<double> row;
    row.reserve(indices.size());
    for (auto index : indices) row.push_back(world_.activation(image.embedding, NeuronAddress{layer, index}));
    out.push_back(std::move(row));
  }
  return out;
}

std::string SimDataset::id() const { return fmt::format("sim-{}", to_hex(world_.seed())); }

std::vector<std::string> SimDataset::classes() const {
  std::vector<std::string> out;
  for (const auto& label : world_.class_labels()) out.push_back(label.text());
  return out;
}

std::vector<Image> SimDataset::images(const std::string& class_label, std::size_t limit) const {
  const auto label = ConceptLabel::normalize(class_label);
  const auto base = seed_for(label, salt_);
  std::vector<Image> out;
  out.reserve(limit);
  for (std::size_t m = 0; m < limit; ++m) {
    out.push_back(Image{fmt::format("{}/{:06}", class_label, m), kEmbeddingMediaType, {},
                        world_.image(label, base + m)});
  }
  return out;
}

Image SimEditor::edit(const Image& image, const std::string& instruction) {
  if (instruction.empty()) return image;
  constexpr std::string_view prefix = "Remove the ";
  constexpr std::string_view suffix = " from the image";
  if (!instruction.starts_with(prefix) || !instruction.ends_with(suffix) ||
      instruction.size() <= prefix.size() + suffix.size()) {
    throw Error(Errc::protocol, fmt::format("sim editor cannot follow instruction '{}'", instruction));
  }
  const auto concept_label = ConceptLabel::normalize(
      std::string_view(instruction).substr(prefix.size(), instruction.size() - prefix.size() - suffix.size()));
  const auto e = world_.embedding(concept_label);
  Image out = image;
  out.id = image.id + "~edited";
  const double coeff = dot(image.embedding, e) / dot(e, e);
  for (std::size_t i = 0; i < out.embedding.size() && i < e.size(); ++i) out.embedding[i] -= coeff * e[i];
  return out;
}

}  // namespace nlab
