#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "neurolabel/label.hpp"
#include "neurolabel/neuron.hpp"

namespace nlab {

struct SimWorldSpec {
  std::size_t dim = 32;
  std::size_t vocabulary_size = 200;
  std::size_t neuron_count = 100;
  std::string layer = "sim";
  double noise_sigma = 0.0;
  double gain_min = 0.5;
  double gain_max = 2.0;
  double max_cosine = 0.95;
  std::uint64_t seed = 0;
};

struct SimNeuron {
  NeuronAddress address;
  double gain = 1.0;
  ConceptLabel truth_label;
  std::vector<double> direction;
};

/// Synthetic ground truth: concepts are unit vectors, a neuron fires as
/// gain * <direction, image>, and an image of a concept is its vector plus
/// isotropic Gaussian noise. Immutable once built.
///
/// Vocabulary vectors are drawn from a seeded Gaussian and normalised; a draw
/// whose cosine with an earlier vector exceeds max_cosine is redrawn. Each
/// neuron's direction is the vector of its (distinct) truth label. Labels
/// that are not any neuron's truth form the class vocabulary used as the
/// natural-image dataset.
class SimWorld {
 public:
  static SimWorld generate(const SimWorldSpec& spec);

  /// Manifest JSON: {dim, seed, noise_sigma, max_cosine, labels, neurons}.
  /// Vectors are not stored; they are regenerated from the seed.
  std::string to_manifest() const;
  static SimWorld from_manifest(std::string_view json);

  std::size_t dim() const noexcept { return dim_; }
  std::uint64_t seed() const noexcept { return seed_; }
  double noise_sigma() const noexcept { return noise_sigma_; }
  const std::vector<ConceptLabel>& vocabulary() const noexcept { return labels_; }
  const std::vector<SimNeuron>& neurons() const noexcept { return neurons_; }
  std::vector<NeuronAddress> neuron_addresses() const;
  /// Vocabulary labels that are nobody's truth label, in vocabulary order.
  std::vector<ConceptLabel> class_labels() const;

  bool knows(const ConceptLabel& label) const noexcept { return vectors_.contains(label); }
  /// Vocabulary vector, or a deterministic unit hash embedding for labels
  /// outside the vocabulary.
  std::vector<double> embedding(const ConceptLabel& label) const;

  /// Throws Error{configuration} for an unregistered neuron.
  const SimNeuron& neuron(const NeuronAddress& address) const;

  /// embedding(concept) + noise_sigma * N(0, I) drawn from `seed`.
  std::vector<double> image(const ConceptLabel& concept_label, std::uint64_t seed) const;

  /// gain * <direction, image>. The projection is divided by the direction's
  /// computed squared norm (1 up to rounding) so an image equal to the
  /// direction yields exactly `gain`.
  double activation(std::span<const double> image, const NeuronAddress& address) const;

 private:
  SimWorld() = default;
  void build_vectors(double max_cosine);

  std::size_t dim_ = 0;
  std::uint64_t seed_ = 0;
  double noise_sigma_ = 0.0;
  double max_cosine_ = 0.95;
  std::vector<ConceptLabel> labels_;
  std::unordered_map<ConceptLabel, std::vector<double>> vectors_;
  std::vector<SimNeuron> neurons_;
  std::vector<double> direction_norm2_;
};

double dot(std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace nlab
