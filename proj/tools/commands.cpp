#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include <neurolabel/activation.hpp>
#include <neurolabel/artifacts.hpp>
#include <neurolabel/image_cache.hpp>
#include <neurolabel/io.hpp>
#include <neurolabel/log.hpp>
#include <neurolabel/replay.hpp>
#include <neurolabel/report.hpp>
#include <neurolabel/rng.hpp>
#include <neurolabel/sim_providers.hpp>

namespace nlab::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void config_error(const std::string& message) { throw Error(Errc::configuration, message); }

void allow_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) config_error(fmt::format("config section '{}' must be an object", where));
  for (const auto& [key, _] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      config_error(fmt::format("unknown config key '{}{}{}'", where, where.empty() ? "" : ".", key));
  }
}

template <class T>
T as(const json& j, std::string_view key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    config_error(fmt::format("config key '{}' has the wrong type", key));
  }
}

void apply_endpoint(ModelEndpoint& ep, const json& j, std::string_view where) {
  allow_keys(j, where, {"base_url", "api_key", "timeout_ms", "max_in_flight", "retry_attempts", "backoff_ms",
                        "max_payload_bytes"});
  if (j.contains("base_url")) ep.base_url = as<std::string>(j["base_url"], "base_url");
  if (j.contains("api_key")) ep.api_key = as<std::string>(j["api_key"], "api_key");
  if (j.contains("timeout_ms")) ep.timeout_ms = as<int>(j["timeout_ms"], "timeout_ms");
  if (j.contains("max_in_flight")) ep.max_in_flight = as<std::size_t>(j["max_in_flight"], "max_in_flight");
  if (j.contains("retry_attempts")) ep.retry.attempts = as<std::size_t>(j["retry_attempts"], "retry_attempts");
  if (j.contains("backoff_ms")) ep.retry.backoff_ms = as<std::size_t>(j["backoff_ms"], "backoff_ms");
  if (j.contains("max_payload_bytes"))
    ep.max_payload_bytes = as<std::size_t>(j["max_payload_bytes"], "max_payload_bytes");
}

ordered_json endpoint_json(const ModelEndpoint& ep) {
  ordered_json j;
  j["base_url"] = ep.base_url;
  j["api_key"] = ep.api_key ? "<set>" : "<unset>";
  j["timeout_ms"] = ep.timeout_ms;
  j["max_in_flight"] = ep.max_in_flight;
  j["retry_attempts"] = ep.retry.attempts;
  j["backoff_ms"] = ep.retry.backoff_ms;
  j["max_payload_bytes"] = ep.max_payload_bytes;
  return j;
}

int exit_code_for(const Error& err) {
  switch (err.code()) {
    case Errc::provider:
    case Errc::protocol:
    case Errc::payload_too_large:
    case Errc::malformed_response:
    case Errc::transcript_exhausted:
    case Errc::forbidden_exhausted:
      return kProvider;
    default:
      return kUsage;
  }
}

template <class Fn>
int guarded(std::ostream& log, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& err) {
    log << "error: " << err.what() << '\n';
    return exit_code_for(err);
  } catch (const std::invalid_argument& ex) {
    log << "error: " << ex.what() << '\n';
    return kUsage;
  } catch (const std::exception& ex) {
    log << "error: " << ex.what() << '\n';
    return kProvider;
  }
}

void echo_config(const ToolConfig& cfg, const fs::path& out) {
  write_file_atomic(out / "effective_config.json", tool_config_json(cfg));
}

std::vector<NeuronAddress> sim_neurons(const ToolConfig& cfg, const SimWorld& world) {
  if (!cfg.neurons) return world.neuron_addresses();
  auto selected = parse_neuron_selector(*cfg.neurons);
  const auto known = world.neuron_addresses();
  for (const auto& n : selected) {
    if (n.layer != cfg.sim.layer)
      config_error(fmt::format("unknown layer '{}'; available layers: {}", n.layer, cfg.sim.layer));
    if (std::find(known.begin(), known.end(), n) == known.end())
      config_error(fmt::format("neuron {} is outside {}:0-{}", to_string(n), cfg.sim.layer, known.size() - 1));
  }
  return selected;
}

// Clamp K to what the sim dataset can offer rather than failing the run.
void fit_sim_init(ToolConfig& cfg, const SimWorld& world, std::ostream& log) {
  const auto classes = world.class_labels().size();
  if (cfg.run.init_classes > classes) {
    log << fmt::format("note: init_classes {} exceeds the {} simulated classes; using {}\n", cfg.run.init_classes,
                       classes, classes);
    cfg.run.init_classes = classes;
  }
}

std::map<NeuronAddress, InitMatrix> init_matrices(VisionProvider& vision, const LabeledImageSource& dataset,
                                                  const std::vector<NeuronAddress>& neurons, const RunConfig& run) {
  std::map<std::string, std::vector<std::size_t>> by_layer;
  for (const auto& n : neurons) by_layer[n.layer].push_back(n.index);
  std::map<NeuronAddress, InitMatrix> out;
  for (const auto& [layer, indices] : by_layer) {
    auto mats = build_init_matrices(vision, dataset, layer, indices, run.init_classes, run.init_images,
                                    run.provider_retry);
    for (std::size_t i = 0; i < indices.size(); ++i) out.emplace(NeuronAddress{layer, indices[i]}, std::move(mats[i]));
  }
  return out;
}

int finish(const ToolConfig& cfg, const fs::path& out, const LayerResult& layer,
           const std::vector<NeuronAddress>& neurons, std::ostream& log) {
  write_run(out, cfg.run, layer, neurons, cfg.provider);
  for (const auto& f : layer.failures) log << fmt::format("failed {}: {}\n", to_string(f.neuron), f.message);
  log << fmt::format("explained {}/{} neurons into {}\n", layer.results.size(), neurons.size(), out.string());
  if (layer.results.empty()) return kProvider;
  return layer.failures.empty() ? kOk : kPartial;
}

struct SimSession {
  SimWorld world;
  SimT2i t2i;
  SimVision vision;
  explicit SimSession(const SimWorldSpec& spec) : world(SimWorld::generate(spec)), t2i(world), vision(world) {}
};

LayerResult run_sim(ToolConfig& cfg, SimSession& s, const std::vector<NeuronAddress>& neurons, std::ostream& log) {
  fit_sim_init(cfg, s.world, log);
  SimDataset dataset(s.world, cfg.run.run_salt);
  const auto inits = init_matrices(s.vision, dataset, neurons, cfg.run);
  ImageCache cache = cfg.image_cache ? ImageCache(*cfg.image_cache) : ImageCache();
  EngineProviders providers;
  providers.proposer_for = [&](const NeuronAddress& n) -> std::unique_ptr<ConceptProposer> {
    return std::make_unique<SimProposer>(s.world, n, cfg.strategy, std::vector<TranscriptEntry>{}, cfg.run.max_retries);
  };
  providers.init_for = [&](const NeuronAddress& n) { return inits.at(n); };
  providers.t2i = &s.t2i;
  providers.vision = &s.vision;
  providers.cache = &cache;
  return explain_layer(cfg.run, neurons, providers);
}

std::vector<ModelEndpoint*> endpoints(BridgeSettings& b) { return {&b.llm, &b.t2i, &b.vision, &b.edit}; }

}  // namespace

void ToolConfig::finalize() {
  if (provider != "sim" && provider != "bridge" && provider != "replay")
    config_error(fmt::format("unknown provider '{}'; expected sim, bridge or replay", provider));
  run.seed = seed;
  sim.seed = mix_seed(seed, fnv1a64("simworld"));
  eval.control_seed = mix_seed(seed, fnv1a64("control"));
  eval.loop_salt = run.run_salt;
}

ToolConfig load_tool_config(std::string_view text, ToolConfig cfg) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& ex) {
    config_error(fmt::format("malformed config JSON: {}", ex.what()));
  }
  allow_keys(j, "", {"provider", "seed", "neurons", "run", "sim", "replay", "bridge", "cache", "eval"});
  if (j.contains("provider")) cfg.provider = as<std::string>(j["provider"], "provider");
  if (j.contains("seed")) cfg.seed = as<std::uint64_t>(j["seed"], "seed");
  if (j.contains("neurons")) cfg.neurons = as<std::string>(j["neurons"], "neurons");
  if (j.contains("run")) {
    if (j["run"].contains("seed")) config_error("set the seed at the top level, not in 'run'");
    cfg.run = run_config_from_json(j["run"].dump(), cfg.run);
  }
  if (j.contains("sim")) {
    const auto& s = j["sim"];
    allow_keys(s, "sim", {"dim", "vocabulary_size", "neuron_count", "layer", "noise_sigma", "gain_min", "gain_max",
                          "max_cosine", "strategy"});
    if (s.contains("dim")) cfg.sim.dim = as<std::size_t>(s["dim"], "sim.dim");
    if (s.contains("vocabulary_size")) cfg.sim.vocabulary_size = as<std::size_t>(s["vocabulary_size"], "sim.vocabulary_size");
    if (s.contains("neuron_count")) cfg.sim.neuron_count = as<std::size_t>(s["neuron_count"], "sim.neuron_count");
    if (s.contains("layer")) cfg.sim.layer = as<std::string>(s["layer"], "sim.layer");
    if (s.contains("noise_sigma")) cfg.sim.noise_sigma = as<double>(s["noise_sigma"], "sim.noise_sigma");
    if (s.contains("gain_min")) cfg.sim.gain_min = as<double>(s["gain_min"], "sim.gain_min");
    if (s.contains("gain_max")) cfg.sim.gain_max = as<double>(s["gain_max"], "sim.gain_max");
    if (s.contains("max_cosine")) cfg.sim.max_cosine = as<double>(s["max_cosine"], "sim.max_cosine");
    if (s.contains("strategy")) cfg.strategy = parse_sim_strategy(as<std::string>(s["strategy"], "sim.strategy"));
  }
  if (j.contains("replay")) {
    allow_keys(j["replay"], "replay", {"fixture"});
    if (j["replay"].contains("fixture")) cfg.fixture = as<std::string>(j["replay"]["fixture"], "replay.fixture");
  }
  if (j.contains("bridge")) {
    auto b = j["bridge"];
    allow_keys(b, "bridge", {"base_url", "api_key", "timeout_ms", "max_in_flight", "retry_attempts", "backoff_ms",
                             "max_payload_bytes", "model_id", "dataset_dir", "t2i_options", "roles"});
    if (b.contains("model_id")) cfg.bridge.model_id = as<std::string>(b["model_id"], "bridge.model_id");
    if (b.contains("dataset_dir")) cfg.bridge.dataset_dir = as<std::string>(b["dataset_dir"], "bridge.dataset_dir");
    if (b.contains("t2i_options")) {
      if (!b["t2i_options"].is_object()) config_error("bridge.t2i_options must be an object");
      cfg.bridge.t2i_options = b["t2i_options"].dump();
    }
    json shared = json::object();
    for (const auto& [k, v] : b.items())
      if (k != "model_id" && k != "dataset_dir" && k != "t2i_options" && k != "roles") shared[k] = v;
    for (auto* ep : endpoints(cfg.bridge)) apply_endpoint(*ep, shared, "bridge");
    if (b.contains("roles")) {
      const auto& roles = b["roles"];
      allow_keys(roles, "bridge.roles", {"llm", "t2i", "vision", "edit"});
      if (roles.contains("llm")) apply_endpoint(cfg.bridge.llm, roles["llm"], "bridge.roles.llm");
      if (roles.contains("t2i")) apply_endpoint(cfg.bridge.t2i, roles["t2i"], "bridge.roles.t2i");
      if (roles.contains("vision")) apply_endpoint(cfg.bridge.vision, roles["vision"], "bridge.roles.vision");
      if (roles.contains("edit")) apply_endpoint(cfg.bridge.edit, roles["edit"], "bridge.roles.edit");
    }
  }
  if (j.contains("cache")) {
    allow_keys(j["cache"], "cache", {"images", "init"});
    if (j["cache"].contains("images")) cfg.image_cache = as<std::string>(j["cache"]["images"], "cache.images");
    if (j["cache"].contains("init")) cfg.init_cache = as<std::string>(j["cache"]["init"], "cache.init");
  }
  if (j.contains("eval")) {
    const auto& e = j["eval"];
    allow_keys(e, "eval", {"run_salt", "control_size", "batch_size", "methods"});
    if (e.contains("run_salt")) cfg.eval.run_salt = as<std::uint64_t>(e["run_salt"], "eval.run_salt");
    if (e.contains("control_size")) cfg.eval.control_size = as<std::size_t>(e["control_size"], "eval.control_size");
    if (e.contains("batch_size")) cfg.eval.batch_size = as<std::size_t>(e["batch_size"], "eval.batch_size");
    if (e.contains("methods")) {
      if (!e["methods"].is_object()) config_error("eval.methods must map method names to labels CSV paths");
      for (const auto& [name, path] : e["methods"].items()) cfg.methods[name] = as<std::string>(path, "eval.methods");
    }
  }
  return cfg;
}

ToolConfig load_tool_config_file(const fs::path& path, ToolConfig base) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& err) {
    config_error(fmt::format("cannot read config '{}': {}", path.string(), err.what()));
  }
  auto cfg = load_tool_config(text, std::move(base));
  // Relative paths in a config file are relative to the file.
  const auto base_dir = path.parent_path();
  auto rebase = [&](fs::path& p) {
    if (!p.empty() && p.is_relative()) p = base_dir / p;
  };
  rebase(cfg.fixture);
  rebase(cfg.bridge.dataset_dir);
  rebase(cfg.init_cache);
  if (cfg.image_cache) rebase(*cfg.image_cache);
  for (auto& [_, p] : cfg.methods) rebase(p);
  return cfg;
}

std::string tool_config_json(const ToolConfig& cfg) {
  ordered_json j;
  j["provider"] = cfg.provider;
  j["seed"] = cfg.seed;
  j["neurons"] = cfg.neurons ? ordered_json(*cfg.neurons) : ordered_json(nullptr);
  j["run"] = ordered_json::parse(run_config_json(cfg.run));
  j["sim"] = {{"dim", cfg.sim.dim},
              {"vocabulary_size", cfg.sim.vocabulary_size},
              {"neuron_count", cfg.sim.neuron_count},
              {"layer", cfg.sim.layer},
              {"noise_sigma", cfg.sim.noise_sigma},
              {"gain_min", cfg.sim.gain_min},
              {"gain_max", cfg.sim.gain_max},
              {"max_cosine", cfg.sim.max_cosine},
              {"strategy", std::string(to_string(cfg.strategy))},
              {"world_seed", cfg.sim.seed}};
  j["replay"] = {{"fixture", cfg.fixture.generic_string()}};
  j["bridge"] = {{"model_id", cfg.bridge.model_id},
                 {"dataset_dir", cfg.bridge.dataset_dir.generic_string()},
                 {"t2i_options", ordered_json::parse(cfg.bridge.t2i_options)},
                 {"roles",
                  {{"llm", endpoint_json(cfg.bridge.llm)},
                   {"t2i", endpoint_json(cfg.bridge.t2i)},
                   {"vision", endpoint_json(cfg.bridge.vision)},
                   {"edit", endpoint_json(cfg.bridge.edit)}}}};
  j["cache"] = {{"images", cfg.image_cache ? ordered_json(cfg.image_cache->generic_string()) : ordered_json(nullptr)},
                {"init", cfg.init_cache.generic_string()}};
  ordered_json methods = ordered_json::object();
  for (const auto& [name, path] : cfg.methods) methods[name] = path.generic_string();
  j["eval"] = {{"run_salt", cfg.eval.run_salt},
               {"control_size", cfg.eval.control_size},
               {"control_seed", cfg.eval.control_seed},
               {"batch_size", cfg.eval.batch_size},
               {"methods", std::move(methods)}};
  return j.dump(2) + "\n";
}

int cmd_init_cache(ToolConfig cfg, std::ostream& log) {
  return guarded(log, [&] {
    cfg.finalize();
    std::unique_ptr<SimSession> sim;
    std::unique_ptr<BridgeClient> client;
    std::unique_ptr<BridgeVision> bridge_vision;
    std::unique_ptr<LabeledImageSource> dataset;
    VisionProvider* vision = nullptr;
    std::vector<NeuronAddress> neurons;
    std::string model_id;
    if (cfg.provider == "sim") {
      sim = std::make_unique<SimSession>(cfg.sim);
      fit_sim_init(cfg, sim->world, log);
      neurons = sim_neurons(cfg, sim->world);
      dataset = std::make_unique<SimDataset>(sim->world, cfg.run.run_salt);
      vision = &sim->vision;
      model_id = fmt::format("simworld-{}", to_hex(cfg.sim.seed));
    } else if (cfg.provider == "bridge") {
      if (!cfg.neurons) config_error("--neurons is required with the bridge provider");
      if (cfg.bridge.dataset_dir.empty()) config_error("bridge.dataset_dir is required for init-cache");
      neurons = parse_neuron_selector(*cfg.neurons);
      client = std::make_unique<BridgeClient>(cfg.bridge.vision);
      bridge_vision = std::make_unique<BridgeVision>(*client);
      dataset = std::make_unique<DirectoryDataset>(cfg.bridge.dataset_dir);
      vision = bridge_vision.get();
      model_id = cfg.bridge.model_id;
    } else {
      config_error("init-cache needs the sim or bridge provider; replay fixtures carry their own matrix");
    }

    std::vector<NeuronAddress> missing;
    for (const auto& n : neurons) {
      const auto path = init_cache_path(cfg.init_cache, model_id, n, dataset->id());
      if (!fs::exists(path)) {
        missing.push_back(n);
        continue;
      }
      try {
        const auto m = read_init_matrix(path);
        if (m.rows != cfg.run.init_classes || m.cols != cfg.run.init_images) {
          log_warning(fmt::format("cached matrix {} is {}x{}, want {}x{}; regenerating", path.string(), m.rows, m.cols,
                                  cfg.run.init_classes, cfg.run.init_images));
          missing.push_back(n);
        }
      } catch (const Error& err) {
        log_warning(fmt::format("cached matrix {} is unreadable ({}); regenerating", path.string(), err.what()));
        missing.push_back(n);
      }
    }
    if (!missing.empty()) {
      const auto mats = init_matrices(*vision, *dataset, missing, cfg.run);
      for (const auto& [n, m] : mats) write_init_matrix(init_cache_path(cfg.init_cache, model_id, n, dataset->id()), m);
    }
    log << fmt::format("init cache: {} neurons, {} built, {} reused\n", neurons.size(), missing.size(),
                       neurons.size() - missing.size());
    return static_cast<int>(kOk);
  });
}

int cmd_explain(ToolConfig cfg, const fs::path& out, std::ostream& log) {
  return guarded(log, [&] {
    if (cfg.provider == "replay") {
      if (cfg.fixture.empty()) config_error("the replay provider needs replay.fixture");
      const auto fx = load_replay_fixture(cfg.fixture);
      cfg.run.iterations = fx.config.iterations;
      cfg.run.batch_size = fx.config.batch_size;
      cfg.run.init_top = fx.config.init_top;
      cfg.run.init_random = fx.config.init_random;
      cfg.run.init_classes = fx.config.init_classes;
      cfg.run.init_images = fx.config.init_images;
      cfg.run.max_retries = fx.config.max_retries;
      cfg.finalize();
      echo_config(cfg, out);
      if (cfg.neurons) {
        const auto sel = parse_neuron_selector(*cfg.neurons);
        if (sel.size() != 1 || sel.front() != fx.neuron)
          config_error(fmt::format("the replay fixture only covers {}", to_string(fx.neuron)));
      }
      ScriptedLlm llm(fx.transcript);
      ReplayT2i t2i;
      ReplayVision vision(fx.neuron, fx.activations);
      ImageCache cache;
      EngineProviders providers;
      providers.proposer_for = [&](const NeuronAddress&) -> std::unique_ptr<ConceptProposer> {
        return std::make_unique<LlmProposer>(llm, cfg.run.max_retries);
      };
      providers.init_for = [&](const NeuronAddress&) { return fx.init; };
      providers.t2i = &t2i;
      providers.vision = &vision;
      providers.cache = &cache;
      cfg.run.workers = 1;
      const std::vector<NeuronAddress> neurons{fx.neuron};
      const auto layer = explain_layer(cfg.run, neurons, providers);
      return finish(cfg, out, layer, neurons, log);
    }

    cfg.finalize();
    if (cfg.provider == "sim") {
      SimSession s(cfg.sim);
      const auto neurons = sim_neurons(cfg, s.world);
      fit_sim_init(cfg, s.world, log);
      echo_config(cfg, out);
      const auto layer = run_sim(cfg, s, neurons, log);
      return finish(cfg, out, layer, neurons, log);
    }

    if (!cfg.neurons) config_error("--neurons is required with the bridge provider");
    if (cfg.bridge.dataset_dir.empty()) config_error("bridge.dataset_dir is required");
    const auto neurons = parse_neuron_selector(*cfg.neurons);
    echo_config(cfg, out);
    BridgeClient llm_client(cfg.bridge.llm), t2i_client(cfg.bridge.t2i), vision_client(cfg.bridge.vision);
    BridgeLlm llm(llm_client);
    BridgeT2i t2i(t2i_client, cfg.bridge.t2i_options);
    BridgeVision vision(vision_client);
    DirectoryDataset dataset(cfg.bridge.dataset_dir);
    ImageCache cache = cfg.image_cache ? ImageCache(*cfg.image_cache) : ImageCache();
    EngineProviders providers;
    providers.proposer_for = [&](const NeuronAddress&) -> std::unique_ptr<ConceptProposer> {
      return std::make_unique<LlmProposer>(llm, cfg.run.max_retries);
    };
    providers.init_for = [&](const NeuronAddress& n) {
      const auto path = init_cache_path(cfg.init_cache, cfg.bridge.model_id, n, dataset.id());
      if (fs::exists(path)) {
        try {
          return read_init_matrix(path);
        } catch (const Error& err) {
          log_warning(fmt::format("cached matrix {} is unreadable ({}); rebuilding", path.string(), err.what()));
        }
      }
      auto m = build_init_matrix(vision, dataset, n, cfg.run.init_classes, cfg.run.init_images, cfg.run.provider_retry);
      write_init_matrix(path, m);
      return m;
    };
    providers.t2i = &t2i;
    providers.vision = &vision;
    providers.cache = &cache;
    const auto layer = explain_layer(cfg.run, neurons, providers);
    return finish(cfg, out, layer, neurons, log);
  });
}

int cmd_simulate(ToolConfig cfg, const fs::path& out, std::ostream& log) {
  return guarded(log, [&] {
    if (cfg.provider != "sim") config_error("simulate only runs with the sim provider");
    cfg.finalize();
    SimSession s(cfg.sim);
    const auto neurons = sim_neurons(cfg, s.world);
    fit_sim_init(cfg, s.world, log);
    echo_config(cfg, out);
    write_file_atomic(out / "world.json", s.world.to_manifest());
    const auto layer = run_sim(cfg, s, neurons, log);

    std::string truth = "neuron_layer,neuron_index,truth,label,score,gain,match\n";
    std::size_t matches = 0;
    for (const auto& r : layer.results) {
      const auto& n = s.world.neuron(r.neuron);
      const bool match = n.truth_label == r.best_label;
      matches += match ? 1 : 0;
      truth += fmt::format("{},{},{},{},{:.6f},{:.6f},{}\n", r.neuron.layer, r.neuron.index, n.truth_label.text(),
                           r.best_label.text(), r.best_score, n.gain, match ? 1 : 0);
    }
    write_file_atomic(out / "truth.csv", truth);
    log << fmt::format("recovered {}/{} ground-truth labels\n", matches, layer.results.size());
    return finish(cfg, out, layer, neurons, log);
  });
}

int cmd_eval(ToolConfig cfg, const fs::path& out, std::ostream& log) {
  return guarded(log, [&] {
    cfg.finalize();
    if (cfg.methods.empty()) config_error("eval needs at least one labels file (--labels NAME=PATH)");
    MethodAssignments assignments;
    for (const auto& [name, path] : cfg.methods) assignments[name] = parse_labels_csv(read_file(path));

    std::set<NeuronAddress> all;
    for (const auto& [_, labels] : assignments)
      for (const auto& [n, _l] : labels) all.insert(n);
    std::map<std::string, std::vector<std::size_t>> by_layer;
    for (const auto& n : all) by_layer[n.layer].push_back(n.index);

    echo_config(cfg, out);
    std::unique_ptr<SimSession> sim;
    std::unique_ptr<BridgeClient> t2i_client, vision_client;
    std::unique_ptr<T2iProvider> bridge_t2i;
    std::unique_ptr<VisionProvider> bridge_vision;
    std::unique_ptr<LabeledImageSource> dataset;
    T2iProvider* t2i = nullptr;
    VisionProvider* vision = nullptr;
    if (cfg.provider == "sim") {
      sim = std::make_unique<SimSession>(cfg.sim);
      for (const auto& [layer, _] : by_layer)
        if (layer != cfg.sim.layer)
          config_error(fmt::format("unknown layer '{}'; available layers: {}", layer, cfg.sim.layer));
      dataset = std::make_unique<SimDataset>(sim->world, cfg.eval.control_seed);
      t2i = &sim->t2i;
      vision = &sim->vision;
    } else if (cfg.provider == "bridge") {
      if (cfg.bridge.dataset_dir.empty()) config_error("bridge.dataset_dir is required");
      t2i_client = std::make_unique<BridgeClient>(cfg.bridge.t2i);
      vision_client = std::make_unique<BridgeClient>(cfg.bridge.vision);
      bridge_t2i = std::make_unique<BridgeT2i>(*t2i_client, cfg.bridge.t2i_options);
      bridge_vision = std::make_unique<BridgeVision>(*vision_client);
      dataset = std::make_unique<DirectoryDataset>(cfg.bridge.dataset_dir);
      t2i = bridge_t2i.get();
      vision = bridge_vision.get();
    } else {
      config_error("eval needs the sim or bridge provider");
    }

    std::map<NeuronAddress, ActivationSet> controls;
    for (const auto& [layer, indices] : by_layer) {
      auto sets = build_control_sets(*vision, *dataset, layer, indices, cfg.eval.control_size, cfg.eval.control_seed,
                                     cfg.eval.retry);
      for (std::size_t i = 0; i < indices.size(); ++i) controls.emplace(NeuronAddress{layer, indices[i]}, std::move(sets[i]));
    }
    ImageCache cache = cfg.image_cache ? ImageCache(*cfg.image_cache) : ImageCache();
    const auto report = eval_methods(
        assignments, [&](const NeuronAddress& n) -> const ActivationSet& { return controls.at(n); }, *t2i, *vision,
        &cache, cfg.eval);
    write_file_atomic(out / "eval.csv", report_csv(report));
    write_file_atomic(out / "eval.json", report_sidecar_json(report));
    for (const auto& [method, agg] : report.aggregates)
      log << fmt::format("{}: n={} auc {:.4f}±{:.4f} mad {:.4f}±{:.4f}\n", method, agg.count, agg.auc.mean, agg.auc.std,
                         agg.mad.mean, agg.mad.std);
    for (const auto& m : report.missing)
      log << fmt::format("missing {} {}: {}\n", m.method, to_string(m.neuron), m.reason);
    if (report.rows.empty()) return static_cast<int>(kProvider);
    return static_cast<int>(report.missing.empty() ? kOk : kPartial);
  });
}

int cmd_report(const fs::path& run_dir, bool as_json, std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    const auto report = report_run(run_dir);
    out << (as_json ? report_json(report) : report_text(report));
    return static_cast<int>(kOk);
  });
}

}  // namespace nlab::cli
