#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "neurolabel/engine.hpp"

namespace nlab {

/// Run directory layout:
///   run.json                   manifest: iterations, neurons, failures, config
///   labels.csv                 neuron_layer,neuron_index,label,score,step,origin
///   cumulative_best.csv        step,mean_cumulative_best (0..N, then S)
///   scoreboards/<stem>.json    one per successful neuron
///   traces/<stem>.jsonl        one JSON record per step
struct RunManifest {
  std::size_t iterations = 0;
  std::vector<NeuronAddress> neurons;
  std::vector<NeuronFailure> failures;
  std::string provider;
  std::string config_json;
};

std::string run_config_json(const RunConfig& cfg);
/// Overlays the keys present in `json` onto `base`. Unknown keys and
/// wrongly typed values throw Error{configuration}.
RunConfig run_config_from_json(std::string_view json, RunConfig base = {});

std::string trace_jsonl(const RunTrace& trace);
std::string cumulative_best_csv(const std::vector<double>& mean_cumulative_best);
std::string labels_csv(std::span<const ExplanationResult> results);
std::string manifest_json(const RunManifest& manifest);
RunManifest manifest_from_json(std::string_view json);

/// Writes every artifact of a layer run with atomic renames.
void write_run(const std::filesystem::path& dir, const RunConfig& cfg, const LayerResult& layer,
               std::span<const NeuronAddress> neurons, std::string_view provider);

RunManifest read_manifest(const std::filesystem::path& dir);

}  // namespace nlab
