#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neurolabel/error.hpp"
#include "neurolabel/label.hpp"
#include "neurolabel/neuron.hpp"

namespace nlab {

class SimWorld;

enum class ProposalMode { main, summary };

struct ScoredConcept {
  ConceptLabel label;
  double score = 0.0;
};

struct ProposalRequest {
  ProposalMode mode = ProposalMode::main;
  /// Scoreboard view shown to the model, best first.
  std::vector<ScoredConcept> concept_list;
  /// Labels already proposed; ignored in summary mode.
  std::vector<ConceptLabel> forbidden;

  bool forbids(const ConceptLabel& label) const noexcept;
};

struct Proposal {
  std::string thinking;
  ConceptLabel concept_label;
  std::size_t attempts = 1;
};

/// Main-loop prompt with the scoreboard as "label: score" lines (two
/// decimals) and the forbidden labels comma-joined.
std::string render_main_prompt(const ProposalRequest& request);

/// Summary prompt; throws Error{arity} unless given exactly three concepts.
std::string render_summary_prompt(std::span<const ScoredConcept> top3);

/// Extracts the first <thinking> and <answer> blocks. Throws
/// Error{malformed_response} when the answer is missing or blank.
Proposal parse_response(std::string_view raw);

struct ChatOptions {
  double temperature = 0.5;
  double top_p = 0.9;
  std::optional<std::uint64_t> seed;
  int max_tokens = 512;
};

class LlmProvider {
 public:
  virtual ~LlmProvider() = default;
  virtual std::string chat(const std::string& prompt, const ChatOptions& options) = 0;
};

/// No acceptable concept within the retry budget. Carries the last parsed
/// proposal, if any attempt parsed at all.
class ForbiddenExhausted : public Error {
 public:
  ForbiddenExhausted(std::size_t attempts, std::optional<Proposal> last);
  std::size_t attempts() const noexcept { return attempts_; }
  const std::optional<Proposal>& last() const noexcept { return last_; }

 private:
  std::size_t attempts_;
  std::optional<Proposal> last_;
};

/// Renders the prompt for `request`, queries the model up to `max_retries`
/// times, and returns the first well-formed, non-forbidden concept. Each
/// attempt's seed is offset by its attempt number so a seed-honouring model
/// can answer differently. Provider errors propagate unchanged.
Proposal propose(LlmProvider& backend, const ProposalRequest& request, std::size_t max_retries,
                 const ChatOptions& options = {});

/// Source of concepts for the refinement loop.
class ConceptProposer {
 public:
  virtual ~ConceptProposer() = default;
  virtual Proposal propose(const ProposalRequest& request, std::uint64_t sampling_seed) = 0;
};

class LlmProposer final : public ConceptProposer {
 public:
  LlmProposer(LlmProvider& backend, std::size_t max_retries, ChatOptions options = {})
      : backend_(backend), max_retries_(max_retries), options_(options) {}
  Proposal propose(const ProposalRequest& request, std::uint64_t sampling_seed) override;

 private:
  LlmProvider& backend_;
  std::size_t max_retries_;
  ChatOptions options_;
};

struct TranscriptEntry {
  std::size_t step = 0;
  std::string raw_response;
};

/// JSON array of {step, raw_response}.
std::vector<TranscriptEntry> parse_transcript(std::string_view json);

/// Replays recorded model responses in order, one per chat() call,
/// regardless of the prompt. Throws Error{transcript_exhausted} past the end.
class ScriptedLlm final : public LlmProvider {
 public:
  explicit ScriptedLlm(std::vector<TranscriptEntry> transcript) : transcript_(std::move(transcript)) {}
  std::string chat(const std::string& prompt, const ChatOptions& options) override;
  std::size_t consumed() const noexcept { return next_; }
  const std::vector<std::string>& prompts() const noexcept { return prompts_; }

 private:
  std::vector<TranscriptEntry> transcript_;
  std::size_t next_ = 0;
  std::vector<std::string> prompts_;
};

enum class SimStrategy { scripted, greedy, oracle };

std::string_view to_string(SimStrategy strategy) noexcept;
SimStrategy parse_sim_strategy(std::string_view text);

/// Offline stand-in for the language model.
///  - oracle: the neuron's truth label (falls back to greedy if the truth is
///    already forbidden in main mode).
///  - greedy: the vocabulary concept, neither on the list nor forbidden,
///    whose vector has the largest inner product with the score-weighted mean
///    of the top-3 listed concepts' vectors (weights clamp at zero; uniform
///    if all are zero). Exact ties go to a label drawn with `rng_seed`.
/// The scripted strategy needs a transcript; use SimProposer.
Proposal sim_propose(const SimWorld& world, const NeuronAddress& neuron, const ProposalRequest& request,
                     SimStrategy strategy, std::uint64_t rng_seed);

class SimProposer final : public ConceptProposer {
 public:
  SimProposer(const SimWorld& world, NeuronAddress neuron, SimStrategy strategy,
              std::vector<TranscriptEntry> transcript = {}, std::size_t max_retries = 3);
  Proposal propose(const ProposalRequest& request, std::uint64_t sampling_seed) override;

 private:
  const SimWorld& world_;
  NeuronAddress neuron_;
  SimStrategy strategy_;
  ScriptedLlm script_;
  std::size_t max_retries_;
};

}  // namespace nlab
