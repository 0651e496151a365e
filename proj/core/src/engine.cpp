#include "neurolabel/engine.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "neurolabel/error.hpp"
#include "neurolabel/rng.hpp"
#include "neurolabel/scoring.hpp"

namespace nlab {

void RunConfig::validate() const {
  if (iterations == 0) throw Error(Errc::configuration, "iterations must be >= 1");
  if (batch_size == 0) throw Error(Errc::configuration, "batch_size must be >= 1");
  if (init_top + init_random == 0) throw Error(Errc::configuration, "init_top + init_random must be >= 1");
  if (init_classes == 0 || init_images == 0) throw Error(Errc::configuration, "init matrix needs K, M >= 1");
  if (init_classes < init_top + init_random) {
    throw Error(Errc::configuration, fmt::format("K = {} is smaller than init_top + init_random = {}",
                                                 init_classes, init_top + init_random));
  }
  if (max_retries == 0) throw Error(Errc::configuration, "max_retries must be >= 1");
  if (provider_retry.attempts == 0) throw Error(Errc::configuration, "provider retry attempts must be >= 1");
}

std::uint64_t neuron_seed(std::uint64_t run_seed, const NeuronAddress& neuron) noexcept {
  return mix_seed(run_seed, fnv1a64(to_string(neuron)));
}

Scoreboard initialize(const RunConfig& cfg, const InitMatrix& init, const NeuronAddress& neuron,
                      std::uint64_t rng_seed) {
  try {
    init.validate();
  } catch (const std::invalid_argument& ex) {
    throw Error(Errc::configuration, ex.what());
  }
  if (init.rows != cfg.init_classes || init.cols != cfg.init_images) {
    throw Error(Errc::configuration, fmt::format("init matrix is {}x{}, config expects {}x{}", init.rows,
                                                 init.cols, cfg.init_classes, cfg.init_images));
  }
  if (init.rows < cfg.init_top + cfg.init_random) {
    throw Error(Errc::configuration, fmt::format("K = {} is smaller than init_top + init_random = {}", init.rows,
                                                 cfg.init_top + cfg.init_random));
  }

  std::vector<double> scores(init.rows);
  for (std::size_t k = 0; k < init.rows; ++k) {
    scores[k] = score_avg(ActivationSet({init.row(k).begin(), init.row(k).end()}));
  }
  std::vector<std::size_t> order(init.rows);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return init.class_labels[a] < init.class_labels[b];
  });

  std::vector<std::size_t> picks(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cfg.init_top));
  std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(cfg.init_top), order.end());
  std::sort(rest.begin(), rest.end());
  Rng rng(rng_seed);
  for (std::size_t i = 0; i < cfg.init_random; ++i) {
    std::swap(rest[i], rest[i + rng.below(rest.size() - i)]);
    picks.push_back(rest[i]);
  }

  Scoreboard board(neuron);
  for (auto k : picks) {
    board.insert(ScoreboardEntry{ConceptLabel::normalize(init.class_labels[k]), scores[k], 0, Origin::predefined, {}});
  }
  return board;
}

NeuronRun::NeuronRun(const RunConfig& cfg, Scoreboard initial, ConceptProposer& proposer, T2iProvider& t2i,
                     VisionProvider& vision, ImageCache& cache, Sleeper sleeper)
    : cfg_(cfg),
      board_(std::move(initial)),
      proposer_(proposer),
      t2i_(t2i),
      vision_(vision),
      cache_(cache),
      sleeper_(std::move(sleeper)) {
  trace_.cumulative_best.push_back(board_.best().score);
}

std::vector<ScoredConcept> NeuronRun::concept_view(std::size_t limit) const {
  std::vector<ScoredConcept> out;
  for (const auto& e : board_.top_k(limit == 0 ? board_.size() : limit)) out.push_back({e.label, e.score});
  return out;
}

std::uint64_t NeuronRun::sampling_seed(std::size_t step) const {
  return mix_seed(neuron_seed(cfg_.seed, board_.neuron()), step);
}

void NeuronRun::close_step(StepRecord record) {
  last_step_ = record.step;
  trace_.steps.push_back(std::move(record));
  trace_.cumulative_best.push_back(board_.best().score);
}

void NeuronRun::evaluate(StepRecord& record, const Proposal& proposal, Origin origin) {
  record.concept_label = proposal.concept_label;
  record.reasoning = proposal.thinking;
  record.attempts = proposal.attempts;

  // A repeated concept reuses its score: seeding is deterministic, so the
  // images (and activations) would be identical.
  if (const auto* existing = board_.find(proposal.concept_label)) {
    record.score = existing->score;
    record.cache_hit = true;
    record.image_refs = existing->image_refs;
    board_.insert(ScoreboardEntry{proposal.concept_label, existing->score, record.step, origin, {}});
    return;
  }

  try {
    auto lookup = cache_.get_or_create(proposal.concept_label, cfg_.run_salt, [&] {
      const auto prompts =
          build_prompts(proposal.concept_label, cfg_.batch_size, seed_for(proposal.concept_label, cfg_.run_salt));
      return generate(t2i_, prompts, cfg_.provider_retry, sleeper_);
    });
    const auto activations = extract(vision_, lookup.batch->images, board_.neuron(), cfg_.provider_retry, sleeper_);
    const double score = score_avg(activations);
    std::vector<std::string> refs;
    for (const auto& image : lookup.batch->images) refs.push_back(image.id);
    record.score = score;
    record.cache_hit = lookup.hit;
    record.image_refs = refs;
    board_.insert(ScoreboardEntry{proposal.concept_label, score, record.step, origin, std::move(refs)});
  } catch (const Error& err) {
    board_.note_proposal(proposal.concept_label);
    record.error = err.what();
  }
}

void NeuronRun::run_iteration(std::size_t step) {
  if (step == 0 || step > cfg_.iterations || step <= last_step_) {
    throw Error(Errc::configuration, fmt::format("iteration step {} is out of order or range", step));
  }
  StepRecord record;
  record.step = step;
  ProposalRequest request{ProposalMode::main, concept_view(cfg_.concept_list_cap), board_.forbidden_set()};
  try {
    const auto proposal = proposer_.propose(request, sampling_seed(step));
    evaluate(record, proposal, Origin::generated);
  } catch (const ForbiddenExhausted& err) {
    record.error = err.what();
    record.attempts = err.attempts();
    if (const auto& last = err.last()) {
      // The repeat is kept in the history; a known score is reported but the
      // scoreboard is not touched.
      record.concept_label = last->concept_label;
      record.reasoning = last->thinking;
      board_.note_proposal(last->concept_label);
      if (const auto* existing = board_.find(last->concept_label)) {
        record.score = existing->score;
        record.cache_hit = true;
      }
    }
  } catch (const Error& err) {
    record.error = err.what();
  }
  close_step(std::move(record));
}

void NeuronRun::run_summary() {
  StepRecord record;
  record.step = cfg_.summary_step();
  if (record.step <= last_step_) throw Error(Errc::configuration, "summary step already ran");
  ProposalRequest request{ProposalMode::summary, concept_view(3), {}};
  try {
    const auto proposal = proposer_.propose(request, sampling_seed(record.step));
    evaluate(record, proposal, Origin::summary);
  } catch (const ForbiddenExhausted& err) {
    record.error = err.what();
    record.attempts = err.attempts();
  } catch (const Error& err) {
    record.error = err.what();
  }
  close_step(std::move(record));
}

ExplanationResult NeuronRun::result() const {
  const auto& best = board_.best();
  return ExplanationResult{board_.neuron(), best.label, best.score, best.step, best.origin, board_, trace_};
}

ExplanationResult explain_neuron(const RunConfig& cfg, const NeuronAddress& neuron, EngineProviders& providers) {
  cfg.validate();
  if (!providers.proposer_for || !providers.init_for || !providers.t2i || !providers.vision || !providers.cache) {
    throw Error(Errc::configuration, "engine providers are incomplete");
  }
  const auto init = providers.init_for(neuron);
  auto board = initialize(cfg, init, neuron, neuron_seed(cfg.seed, neuron));
  auto proposer = providers.proposer_for(neuron);
  NeuronRun run(cfg, std::move(board), *proposer, *providers.t2i, *providers.vision, *providers.cache,
                providers.sleeper);
  for (std::size_t step = 1; step <= cfg.iterations; ++step) run.run_iteration(step);
  run.run_summary();
  return run.result();
}

LayerSummary summarize(std::span<const ExplanationResult> results, std::size_t iterations) {
  LayerSummary out;
  out.mean_cumulative_best.assign(iterations + 2, 0.0);
  for (const auto& r : results) {
    switch (r.origin) {
      case Origin::predefined: ++out.predefined_wins; break;
      case Origin::generated: ++out.generated_wins; break;
      case Origin::summary: ++out.summary_wins; break;
    }
    for (std::size_t s = 0; s < out.mean_cumulative_best.size() && s < r.trace.cumulative_best.size(); ++s) {
      out.mean_cumulative_best[s] += r.trace.cumulative_best[s];
    }
  }
  if (!results.empty()) {
    for (auto& v : out.mean_cumulative_best) v /= static_cast<double>(results.size());
  }
  return out;
}

LayerResult explain_layer(const RunConfig& cfg, std::span<const NeuronAddress> neurons, EngineProviders& providers) {
  cfg.validate();
  if (neurons.empty()) throw Error(Errc::configuration, "no neurons to explain");

  std::vector<std::optional<ExplanationResult>> slots(neurons.size());
  std::vector<std::optional<std::string>> errors(neurons.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < neurons.size(); i = next.fetch_add(1)) {
      try {
        slots[i] = explain_neuron(cfg, neurons[i], providers);
      } catch (const std::exception& ex) {
        errors[i] = ex.what();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(cfg.workers, 1, neurons.size());
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  LayerResult out;
  for (std::size_t i = 0; i < neurons.size(); ++i) {
    if (slots[i]) {
      out.results.push_back(std::move(*slots[i]));
    } else {
      out.failures.push_back({neurons[i], errors[i].value_or("unknown failure")});
    }
  }
  out.summary = summarize(out.results, cfg.iterations);
  return out;
}

}  // namespace nlab
