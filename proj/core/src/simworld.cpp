#include "neurolabel/simworld.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "json_util.hpp"
#include "neurolabel/error.hpp"
#include "neurolabel/rng.hpp"

namespace nlab {

namespace {

constexpr std::uint64_t kVocabularyStream = 0x766f636162ULL;
constexpr std::uint64_t kNeuronStream = 0x6e6575726f6eULL;
constexpr std::uint64_t kHashEmbeddingStream = 0x68617368ULL;
constexpr std::size_t kMaxRedraws = 10000;

void normalize_in_place(std::vector<double>& v) {
  const double norm = std::sqrt(dot(v, v));
  for (auto& x : v) x /= norm;
}

std::vector<double> unit_gaussian(Rng& rng, std::size_t dim) {
  for (;;) {
    auto v = rng.normal_vector(dim);
    if (dot(v, v) > 1e-12) {
      normalize_in_place(v);
      return v;
    }
  }
}

std::string vocabulary_name(std::size_t i, std::size_t size) {
  const int width = std::max<int>(3, static_cast<int>(std::to_string(size - 1).size()));
  return fmt::format("concept {:0{}}", i, width);
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double sum = 0.0;
  const auto n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void SimWorld::build_vectors(double max_cosine) {
  max_cosine_ = max_cosine;
  Rng rng(mix_seed(seed_, kVocabularyStream));
  std::vector<const std::vector<double>*> accepted;
  vectors_.clear();
  for (const auto& label : labels_) {
    std::vector<double> v;
    for (std::size_t draw = 0;; ++draw) {
      if (draw == kMaxRedraws) {
        throw Error(Errc::configuration,
                    fmt::format("cannot place {} well-separated vectors in dimension {}",
                                labels_.size(), dim_));
      }
      v = unit_gaussian(rng, dim_);
      const bool collides = std::any_of(accepted.begin(), accepted.end(), [&](const auto* other) {
        return dot(v, *other) > max_cosine;
      });
      if (!collides) break;
    }
    auto [it, inserted] = vectors_.emplace(label, std::move(v));
    if (!inserted) throw Error(Errc::configuration, fmt::format("duplicate label '{}'", label.text()));
    accepted.push_back(&it->second);
  }
  direction_norm2_.clear();
  for (auto& n : neurons_) {
    auto it = vectors_.find(n.truth_label);
    if (it == vectors_.end()) {
      throw Error(Errc::configuration,
                  fmt::format("truth label '{}' is not in the vocabulary", n.truth_label.text()));
    }
    n.direction = it->second;
    direction_norm2_.push_back(dot(n.direction, n.direction));
  }
}

SimWorld SimWorld::generate(const SimWorldSpec& spec) {
  if (spec.dim == 0 || spec.vocabulary_size == 0) {
    throw Error(Errc::configuration, "sim world needs dim >= 1 and a non-empty vocabulary");
  }
  if (spec.neuron_count > spec.vocabulary_size) {
    throw Error(Errc::configuration, "sim world needs at least one distinct vocabulary label per neuron");
  }
  if (!(spec.gain_min > 0.0) || spec.gain_max < spec.gain_min || spec.noise_sigma < 0.0) {
    throw Error(Errc::configuration, "sim world needs 0 < gain_min <= gain_max and noise_sigma >= 0");
  }
  SimWorld world;
  world.dim_ = spec.dim;
  world.seed_ = spec.seed;
  world.noise_sigma_ = spec.noise_sigma;
  for (std::size_t i = 0; i < spec.vocabulary_size; ++i) {
    world.labels_.push_back(ConceptLabel::normalize(vocabulary_name(i, spec.vocabulary_size)));
  }

  Rng rng(mix_seed(spec.seed, kNeuronStream));
  std::vector<std::size_t> order(spec.vocabulary_size);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  for (std::size_t n = 0; n < spec.neuron_count; ++n) {
    const double gain = spec.gain_min + (spec.gain_max - spec.gain_min) * rng.uniform01();
    world.neurons_.push_back(SimNeuron{{spec.layer, n}, gain, world.labels_[order[n]], {}});
  }
  world.build_vectors(spec.max_cosine);
  return world;
}

std::string SimWorld::to_manifest() const {
  nlohmann::json doc;
  doc["dim"] = dim_;
  doc["seed"] = seed_;
  doc["noise_sigma"] = noise_sigma_;
  doc["max_cosine"] = max_cosine_;
  doc["labels"] = nlohmann::json::array();
  for (const auto& l : labels_) doc["labels"].push_back(l.text());
  doc["neurons"] = nlohmann::json::array();
  for (const auto& n : neurons_) {
    doc["neurons"].push_back({{"layer", n.address.layer},
                              {"index", n.address.index},
                              {"gain", n.gain},
                              {"truth_label", n.truth_label.text()}});
  }
  return doc.dump(2) + "\n";
}

SimWorld SimWorld::from_manifest(std::string_view json) {
  const auto doc = detail::parse_json(json, "sim world manifest");
  SimWorld world;
  try {
    world.dim_ = doc.at("dim").get<std::size_t>();
    world.seed_ = doc.at("seed").get<std::uint64_t>();
    world.noise_sigma_ = doc.at("noise_sigma").get<double>();
    for (const auto& l : doc.at("labels")) world.labels_.push_back(ConceptLabel::normalize(l.get<std::string>()));
    for (const auto& n : doc.at("neurons")) {
      world.neurons_.push_back(SimNeuron{{n.at("layer").get<std::string>(), n.at("index").get<std::size_t>()},
                                         n.at("gain").get<double>(),
                                         ConceptLabel::normalize(n.at("truth_label").get<std::string>()),
                                         {}});
    }
    world.build_vectors(doc.value("max_cosine", 0.95));
  } catch (const nlohmann::json::exception& ex) {
    throw Error(Errc::configuration, fmt::format("malformed sim world manifest: {}", ex.what()));
  }
  return world;
}

std::vector<NeuronAddress> SimWorld::neuron_addresses() const {
  std::vector<NeuronAddress> out;
  for (const auto& n : neurons_) out.push_back(n.address);
  return out;
}

std::vector<ConceptLabel> SimWorld::class_labels() const {
  std::vector<ConceptLabel> out;
  for (const auto& label : labels_) {
    const bool is_truth = std::any_of(neurons_.begin(), neurons_.end(),
                                      [&](const SimNeuron& n) { return n.truth_label == label; });
    if (!is_truth) out.push_back(label);
  }
  return out;
}

std::vector<double> SimWorld::embedding(const ConceptLabel& label) const {
  if (auto it = vectors_.find(label); it != vectors_.end()) return it->second;
  Rng rng(mix_seed(mix_seed(seed_, kHashEmbeddingStream), fnv1a64(label.text())));
  return unit_gaussian(rng, dim_);
}

const SimNeuron& SimWorld::neuron(const NeuronAddress& address) const {
  for (const auto& n : neurons_) {
    if (n.address == address) return n;
  }
  throw Error(Errc::configuration, fmt::format("unknown sim neuron {}", to_string(address)));
}

std::vector<double> SimWorld::image(const ConceptLabel& concept_label, std::uint64_t seed) const {
  auto v = embedding(concept_label);
  if (noise_sigma_ > 0.0) {
    Rng rng(seed);
    for (auto& x : v) x += noise_sigma_ * rng.normal();
  }
  return v;
}

double SimWorld::activation(std::span<const double> image, const NeuronAddress& address) const {
  for (std::size_t i = 0; i < neurons_.size(); ++i) {
    if (neurons_[i].address == address) {
      if (image.size() != dim_) {
        throw Error(Errc::layer_shape,
                    fmt::format("sim image has dimension {}, expected {}", image.size(), dim_));
      }
      return neurons_[i].gain * (dot(neurons_[i].direction, image) / direction_norm2_[i]);
    }
  }
  throw Error(Errc::configuration, fmt::format("unknown sim neuron {}", to_string(address)));
}

}  // namespace nlab
