#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <neurolabel/bridge.hpp>
#include <neurolabel/engine.hpp>
#include <neurolabel/eval.hpp>
#include <neurolabel/proposer.hpp>
#include <neurolabel/simworld.hpp>

namespace nlab::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kProvider = 2, kPartial = 3 };

struct BridgeSettings {
  ModelEndpoint llm;
  ModelEndpoint t2i;
  ModelEndpoint vision;
  ModelEndpoint edit;
  std::string model_id = "model";
  std::filesystem::path dataset_dir;
  std::string t2i_options = "{}";
};

/// Everything a command needs. Loaded from a JSON file, then overridden by
/// flags. `seed` is the single source of randomness: the run seed, the sim
/// world seed and the control-set seed all derive from it.
struct ToolConfig {
  std::string provider = "sim";
  std::uint64_t seed = 0;
  std::optional<std::string> neurons;
  RunConfig run;
  SimWorldSpec sim;
  SimStrategy strategy = SimStrategy::greedy;
  std::filesystem::path fixture;
  BridgeSettings bridge;
  std::optional<std::filesystem::path> image_cache;
  std::filesystem::path init_cache = "init_cache";
  EvalConfig eval;
  std::map<std::string, std::filesystem::path> methods;

  /// Resolves derived seeds and checks the provider name.
  void finalize();
};

/// Keys: provider, seed, neurons, run{...}, sim{dim, vocabulary_size,
/// neuron_count, layer, noise_sigma, gain_min, gain_max, max_cosine,
/// strategy}, replay{fixture}, bridge{base_url, api_key, timeout_ms,
/// max_in_flight, model_id, dataset_dir, t2i_options, roles{llm|t2i|vision|
/// edit: {base_url, ...}}}, cache{images, init}, eval{run_salt,
/// control_size, batch_size, methods{name: labels.csv}}.
/// Unknown keys throw Error{configuration}.
ToolConfig load_tool_config(std::string_view json, ToolConfig base = {});
ToolConfig load_tool_config_file(const std::filesystem::path& path, ToolConfig base = {});
std::string tool_config_json(const ToolConfig& cfg);

int cmd_init_cache(ToolConfig cfg, std::ostream& log);
int cmd_explain(ToolConfig cfg, const std::filesystem::path& out, std::ostream& log);
int cmd_eval(ToolConfig cfg, const std::filesystem::path& out, std::ostream& log);
int cmd_simulate(ToolConfig cfg, const std::filesystem::path& out, std::ostream& log);
int cmd_report(const std::filesystem::path& run_dir, bool as_json, std::ostream& out, std::ostream& log);

}  // namespace nlab::cli
