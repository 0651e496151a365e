#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "neurolabel/activation.hpp"
#include "neurolabel/eval.hpp"
#include "neurolabel/simworld.hpp"
#include "neurolabel/synthesis.hpp"

namespace nlab {

/// Images are noisy concept embeddings seeded by each prompt's seed.
class SimT2i final : public T2iProvider {
 public:
  explicit SimT2i(const SimWorld& world) : world_(world) {}
  std::vector<Image> generate(std::span<const PromptSpec> prompts) override;

 private:
  const SimWorld& world_;
};

/// activation = gain * <direction, embedding> for each registered neuron.
class SimVision final : public VisionProvider {
 public:
  explicit SimVision(const SimWorld& world) : world_(world) {}
  std::vector<std::vector<double>> activations(std::span<const Image> images, const std::string& layer,
                                               std::span<const std::size_t> indices) override;

 private:
  const SimWorld& world_;
};

/// Natural-image stand-in: one class per non-truth vocabulary label, each
/// with an unbounded supply of noisy images of that label.
class SimDataset final : public LabeledImageSource {
 public:
  SimDataset(const SimWorld& world, std::uint64_t salt) : world_(world), salt_(salt) {}
  std::string id() const override;
  std::vector<std::string> classes() const override;
  std::vector<Image> images(const std::string& class_label, std::size_t limit) const override;

 private:
  const SimWorld& world_;
  std::uint64_t salt_;
};

/// Removes the named concept by projecting its embedding out of the image.
/// An empty instruction returns the image unchanged.
class SimEditor final : public EditProvider {
 public:
  explicit SimEditor(const SimWorld& world) : world_(world) {}
  Image edit(const Image& image, const std::string& instruction) override;

 private:
  const SimWorld& world_;
};

}  // namespace nlab
