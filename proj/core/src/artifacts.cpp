#include "neurolabel/artifacts.hpp"

#include <fmt/format.h>

#include "csv_util.hpp"
#include "json_util.hpp"
#include "neurolabel/error.hpp"
#include "neurolabel/io.hpp"

namespace nlab {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json config_object(const RunConfig& cfg) {
  ordered_json j;
  j["iterations"] = cfg.iterations;
  j["batch_size"] = cfg.batch_size;
  j["init_top"] = cfg.init_top;
  j["init_random"] = cfg.init_random;
  j["init_classes"] = cfg.init_classes;
  j["init_images"] = cfg.init_images;
  j["max_retries"] = cfg.max_retries;
  j["concept_list_cap"] = cfg.concept_list_cap;
  j["run_salt"] = cfg.run_salt;
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  j["provider_retry"] = {{"attempts", cfg.provider_retry.attempts}, {"backoff_ms", cfg.provider_retry.backoff_ms}};
  return j;
}

template <class T>
T get_as(const json& j, std::string_view key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::configuration, fmt::format("config key '{}' has the wrong type", key));
  }
}

std::size_t get_size(const json& j, std::string_view key) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    throw Error(Errc::configuration, fmt::format("config key '{}' must be a non-negative integer", key));
  return get_as<std::size_t>(j, key);
}

}  // namespace

std::string run_config_json(const RunConfig& cfg) { return config_object(cfg).dump(2) + "\n"; }

RunConfig run_config_from_json(std::string_view text, RunConfig base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& ex) {
    throw Error(Errc::configuration, fmt::format("malformed config JSON: {}", ex.what()));
  }
  if (!j.is_object()) throw Error(Errc::configuration, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "iterations") base.iterations = get_size(value, key);
    else if (key == "batch_size") base.batch_size = get_size(value, key);
    else if (key == "init_top") base.init_top = get_size(value, key);
    else if (key == "init_random") base.init_random = get_size(value, key);
    else if (key == "init_classes") base.init_classes = get_size(value, key);
    else if (key == "init_images") base.init_images = get_size(value, key);
    else if (key == "max_retries") base.max_retries = get_size(value, key);
    else if (key == "concept_list_cap") base.concept_list_cap = get_size(value, key);
    else if (key == "run_salt") base.run_salt = get_size(value, key);
    else if (key == "seed") base.seed = get_size(value, key);
    else if (key == "workers") base.workers = get_size(value, key);
    else if (key == "provider_retry") {
      if (!value.is_object()) throw Error(Errc::configuration, "config key 'provider_retry' must be an object");
      for (const auto& [k, v] : value.items()) {
        if (k == "attempts") base.provider_retry.attempts = get_size(v, k);
        else if (k == "backoff_ms") base.provider_retry.backoff_ms = get_size(v, k);
        else throw Error(Errc::configuration, fmt::format("unknown config key 'provider_retry.{}'", k));
      }
    } else {
      throw Error(Errc::configuration, fmt::format("unknown config key '{}'", key));
    }
  }
  return base;
}

std::string trace_jsonl(const RunTrace& trace) {
  std::string out;
  for (const auto& s : trace.steps) {
    ordered_json j;
    j["step"] = s.step;
    j["concept"] = s.concept_label ? json(s.concept_label->text()) : json(nullptr);
    j["score"] = s.score ? json(*s.score) : json(nullptr);
    j["reasoning"] = s.reasoning;
    j["image_refs"] = s.image_refs;
    j["cache_hit"] = s.cache_hit;
    j["attempts"] = s.attempts;
    j["error"] = s.error ? json(*s.error) : json(nullptr);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string cumulative_best_csv(const std::vector<double>& mean_cumulative_best) {
  std::string out = "step,mean_cumulative_best\n";
  for (std::size_t i = 0; i < mean_cumulative_best.size(); ++i) {
    const bool summary = i + 1 == mean_cumulative_best.size() && i > 0;
    out += summary ? fmt::format("S,{:.6f}\n", mean_cumulative_best[i])
                   : fmt::format("{},{:.6f}\n", i, mean_cumulative_best[i]);
  }
  return out;
}

std::string labels_csv(std::span<const ExplanationResult> results) {
  std::string out = "neuron_layer,neuron_index,label,score,step,origin\n";
  for (const auto& r : results)
    out += fmt::format("{},{},{},{:.6f},{},{}\n", detail::csv_field(r.neuron.layer), r.neuron.index,
                       detail::csv_field(r.best_label.text()), r.best_score, r.best_step, to_string(r.origin));
  return out;
}

std::string manifest_json(const RunManifest& m) {
  ordered_json j;
  j["iterations"] = m.iterations;
  j["provider"] = m.provider;
  ordered_json neurons = ordered_json::array();
  for (const auto& n : m.neurons) neurons.push_back(to_string(n));
  j["neurons"] = std::move(neurons);
  ordered_json failures = ordered_json::array();
  for (const auto& f : m.failures) failures.push_back(ordered_json{{"neuron", to_string(f.neuron)}, {"message", f.message}});
  j["failures"] = std::move(failures);
  j["config"] = m.config_json.empty() ? ordered_json::object() : ordered_json::parse(m.config_json);
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(std::string_view text) {
  const auto j = detail::parse_json(text, "run manifest");
  RunManifest m;
  try {
    m.iterations = j.at("iterations").get<std::size_t>();
    m.provider = j.value("provider", std::string());
    for (const auto& n : j.at("neurons")) m.neurons.push_back(parse_neuron(n.get<std::string>()));
    if (j.contains("failures"))
      for (const auto& f : j["failures"])
        m.failures.push_back({parse_neuron(f.at("neuron").get<std::string>()), f.value("message", std::string())});
    if (j.contains("config")) m.config_json = j["config"].dump();
  } catch (const json::exception& ex) {
    throw Error(Errc::io, fmt::format("invalid run manifest: {}", ex.what()));
  }
  return m;
}

void write_run(const fs::path& dir, const RunConfig& cfg, const LayerResult& layer,
               std::span<const NeuronAddress> neurons, std::string_view provider) {
  for (const auto& r : layer.results) {
    const auto stem = neuron_file_stem(r.neuron);
    write_file_atomic(dir / "scoreboards" / (stem + ".json"), to_json(r.scoreboard));
    write_file_atomic(dir / "traces" / (stem + ".jsonl"), trace_jsonl(r.trace));
  }
  write_file_atomic(dir / "labels.csv", labels_csv(layer.results));
  write_file_atomic(dir / "cumulative_best.csv", cumulative_best_csv(layer.summary.mean_cumulative_best));
  RunManifest m;
  m.iterations = cfg.iterations;
  m.neurons.assign(neurons.begin(), neurons.end());
  m.failures = layer.failures;
  m.provider = std::string(provider);
  m.config_json = config_object(cfg).dump();
  write_file_atomic(dir / "config.json", run_config_json(cfg));
  write_file_atomic(dir / "run.json", manifest_json(m));
}

RunManifest read_manifest(const fs::path& dir) {
  const auto path = dir / "run.json";
  if (!fs::exists(path)) throw Error(Errc::io, fmt::format("'{}' is not a run directory (no run.json)", dir.string()));
  return manifest_from_json(read_file(path));
}

}  // namespace nlab
