#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "neurolabel/activation.hpp"
#include "neurolabel/engine.hpp"
#include "neurolabel/proposer.hpp"
#include "neurolabel/synthesis.hpp"

namespace nlab {

// Replay mode re-runs a recorded neuron from fixture files instead of live
// models:
//   fixture.json     {neuron:{layer,index}, config:{iterations, batch_size,
//                     init_top, init_random, init_classes, init_images}}
//   init_matrix.json {class_labels:[...], values:[[...], ...]}
//   transcript.json  [{step, raw_response}, ...]
//   activations.json {"<concept>": [a_1, ..., a_P], ...}

struct ReplayFixture {
  NeuronAddress neuron;
  RunConfig config;
  InitMatrix init;
  std::vector<TranscriptEntry> transcript;
  std::map<ConceptLabel, std::vector<double>> activations;
};

ReplayFixture load_replay_fixture(const std::filesystem::path& dir);

/// Hands out placeholder images whose ids name the concept and position.
class ReplayT2i final : public T2iProvider {
 public:
  std::vector<Image> generate(std::span<const PromptSpec> prompts) override;
};

/// Looks up recorded activations by the concept encoded in each image id.
class ReplayVision final : public VisionProvider {
 public:
  ReplayVision(NeuronAddress neuron, std::map<ConceptLabel, std::vector<double>> activations)
      : neuron_(std::move(neuron)), activations_(std::move(activations)) {}
  std::vector<std::vector<double>> activations(std::span<const Image> images, const std::string& layer,
                                               std::span<const std::size_t> indices) override;

 private:
  NeuronAddress neuron_;
  std::map<ConceptLabel, std::vector<double>> activations_;
};

}  // namespace nlab
