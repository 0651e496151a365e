#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

struct Flags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> neurons;
  std::optional<std::string> provider;
  std::string out = "run";
  std::optional<std::size_t> iterations;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> workers;
  std::optional<std::string> strategy;
  std::optional<double> noise;
  std::optional<std::string> fixture;
  std::vector<std::string> labels;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config file");
  cmd->add_option("--seed", f.seed, "Top-level seed for all randomness");
  cmd->add_option("--neurons", f.neurons, "Neuron selector, e.g. avgpool:0-99");
  cmd->add_option("--provider", f.provider, "Model provider")->check(CLI::IsMember({"sim", "bridge", "replay"}));
  cmd->add_option("--iterations", f.iterations, "Refinement iterations N");
  cmd->add_option("--batch-size", f.batch_size, "Images per concept P");
  cmd->add_option("--workers", f.workers, "Neurons processed in parallel");
  cmd->add_option("--strategy", f.strategy, "Sim proposer")->check(CLI::IsMember({"greedy", "oracle"}));
  cmd->add_option("--noise", f.noise, "Sim image noise sigma");
  cmd->add_option("--fixture", f.fixture, "Replay fixture directory");
}

nlab::cli::ToolConfig resolve(const Flags& f) {
  nlab::cli::ToolConfig cfg;
  if (f.config) cfg = nlab::cli::load_tool_config_file(*f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.neurons) cfg.neurons = *f.neurons;
  if (f.provider) cfg.provider = *f.provider;
  if (f.iterations) cfg.run.iterations = *f.iterations;
  if (f.batch_size) {
    cfg.run.batch_size = *f.batch_size;
    cfg.eval.batch_size = *f.batch_size;
  }
  if (f.workers) cfg.run.workers = *f.workers;
  if (f.strategy) cfg.strategy = nlab::parse_sim_strategy(*f.strategy);
  if (f.noise) cfg.sim.noise_sigma = *f.noise;
  if (f.fixture) cfg.fixture = *f.fixture;
  for (const auto& spec : f.labels) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) cfg.methods[std::filesystem::path(spec).stem().string()] = spec;
    else cfg.methods[spec.substr(0, eq)] = spec.substr(eq + 1);
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative neuron labelling with proposal, synthesis and activation scoring"};
  app.require_subcommand(1);
  Flags f;

  auto* init = app.add_subcommand("init-cache", "Build the per-neuron class activation cache");
  add_common(init, f);
  auto* explain = app.add_subcommand("explain", "Label neurons and write scoreboards and traces");
  add_common(explain, f);
  explain->add_option("--out", f.out, "Output directory");
  auto* eval = app.add_subcommand("eval", "Score label sets with AUC and MAD");
  add_common(eval, f);
  eval->add_option("--out", f.out, "Output directory");
  eval->add_option("--labels", f.labels, "Labels CSV as NAME=PATH (repeatable)");
  auto* simulate = app.add_subcommand("simulate", "Convergence study on a synthetic world");
  add_common(simulate, f);
  simulate->add_option("--out", f.out, "Output directory");
  auto* report = app.add_subcommand("report", "Origin breakdown and discovery histogram of a run");
  std::string run_dir;
  bool as_json = false;
  report->add_option("run_dir", run_dir, "Run directory")->required();
  report->add_flag("--json", as_json, "Print JSON instead of text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : nlab::cli::kUsage;
  }

  if (report->parsed()) return nlab::cli::cmd_report(run_dir, as_json, std::cout, std::cerr);

  nlab::cli::ToolConfig cfg;
  try {
    cfg = resolve(f);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return nlab::cli::kUsage;
  }
  if (init->parsed()) return nlab::cli::cmd_init_cache(cfg, std::cerr);
  if (explain->parsed()) return nlab::cli::cmd_explain(cfg, f.out, std::cerr);
  if (eval->parsed()) return nlab::cli::cmd_eval(cfg, f.out, std::cerr);
  return nlab::cli::cmd_simulate(cfg, f.out, std::cerr);
}
