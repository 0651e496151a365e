#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neurolabel/activation.hpp"
#include "neurolabel/image_cache.hpp"
#include "neurolabel/proposer.hpp"
#include "neurolabel/retry.hpp"
#include "neurolabel/scoreboard.hpp"
#include "neurolabel/synthesis.hpp"

namespace nlab {

struct RunConfig {
  std::size_t iterations = 10;
  std::size_t batch_size = 5;
  std::size_t init_top = 5;
  std::size_t init_random = 5;
  std::size_t init_classes = 1000;
  std::size_t init_images = 50;
  std::size_t max_retries = 3;
  /// Scoreboard entries shown to the proposer; 0 shows all.
  std::size_t concept_list_cap = 0;
  std::uint64_t run_salt = 0;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  RetryPolicy provider_retry{3, 0};

  /// Throws Error{configuration}.
  void validate() const;
  std::size_t summary_step() const noexcept { return iterations + 1; }
};

struct StepRecord {
  std::size_t step = 0;
  std::optional<ConceptLabel> concept_label;
  std::optional<double> score;
  std::string reasoning;
  std::vector<std::string> image_refs;
  bool cache_hit = false;
  std::size_t attempts = 0;
  std::optional<std::string> error;
};

struct RunTrace {
  std::vector<StepRecord> steps;
  /// Best score after step 0 (initialisation), 1..N and the summary: N + 2 values.
  std::vector<double> cumulative_best;
};

struct ExplanationResult {
  NeuronAddress neuron;
  ConceptLabel best_label;
  double best_score = 0.0;
  std::size_t best_step = 0;
  Origin origin = Origin::predefined;
  Scoreboard scoreboard;
  RunTrace trace;
};

/// Seeds a scoreboard from the class activation matrix: each class is scored
/// by its mean activation, the init_top best classes are inserted (best
/// first), then init_random of the remaining classes drawn without
/// replacement using `rng_seed`. All entries are step 0, predefined.
Scoreboard initialize(const RunConfig& cfg, const InitMatrix& init, const NeuronAddress& neuron,
                      std::uint64_t rng_seed);

/// State of one neuron's refinement. Steps run strictly in order.
class NeuronRun {
 public:
  NeuronRun(const RunConfig& cfg, Scoreboard initial, ConceptProposer& proposer, T2iProvider& t2i,
            VisionProvider& vision, ImageCache& cache, Sleeper sleeper = sleep_for);

  /// One propose -> synthesize -> extract -> score -> insert pass. Failures
  /// are recorded in the trace and leave the scoreboard unchanged.
  void run_iteration(std::size_t step);
  /// Summary proposal over the top three entries, scored at step N + 1.
  void run_summary();

  const Scoreboard& scoreboard() const noexcept { return board_; }
  const RunTrace& trace() const noexcept { return trace_; }
  ExplanationResult result() const;

 private:
  void evaluate(StepRecord& record, const Proposal& proposal, Origin origin);
  std::vector<ScoredConcept> concept_view(std::size_t limit) const;
  std::uint64_t sampling_seed(std::size_t step) const;
  void close_step(StepRecord record);

  const RunConfig& cfg_;
  Scoreboard board_;
  ConceptProposer& proposer_;
  T2iProvider& t2i_;
  VisionProvider& vision_;
  ImageCache& cache_;
  Sleeper sleeper_;
  RunTrace trace_;
  std::size_t last_step_ = 0;
};

struct EngineProviders {
  std::function<std::unique_ptr<ConceptProposer>(const NeuronAddress&)> proposer_for;
  std::function<InitMatrix(const NeuronAddress&)> init_for;
  T2iProvider* t2i = nullptr;
  VisionProvider* vision = nullptr;
  ImageCache* cache = nullptr;
  Sleeper sleeper = sleep_for;
};

/// initialize -> N iterations -> summary. Throws when initialisation fails.
ExplanationResult explain_neuron(const RunConfig& cfg, const NeuronAddress& neuron, EngineProviders& providers);

struct NeuronFailure {
  NeuronAddress neuron;
  std::string message;
};

struct LayerSummary {
  std::size_t predefined_wins = 0;
  std::size_t generated_wins = 0;
  std::size_t summary_wins = 0;
  /// Mean over successful neurons of cumulative_best at each step, N + 2 values.
  std::vector<double> mean_cumulative_best;
};

struct LayerResult {
  std::vector<ExplanationResult> results;
  std::vector<NeuronFailure> failures;
  LayerSummary summary;
};

/// Independent per-neuron runs on cfg.workers threads, sharing the image
/// cache. Results keep the order of `neurons`; failures are isolated.
LayerResult explain_layer(const RunConfig& cfg, std::span<const NeuronAddress> neurons,
                          EngineProviders& providers);

LayerSummary summarize(std::span<const ExplanationResult> results, std::size_t iterations);

/// Per-neuron seed derived from the run seed.
std::uint64_t neuron_seed(std::uint64_t run_seed, const NeuronAddress& neuron) noexcept;

}  // namespace nlab
