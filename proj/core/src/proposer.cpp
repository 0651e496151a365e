#include "neurolabel/proposer.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

#include "json_util.hpp"
#include "neurolabel/log.hpp"
#include "neurolabel/rng.hpp"
#include "neurolabel/simworld.hpp"

namespace nlab {

namespace detail {
extern const std::string_view kMainLoopTemplate;
extern const std::string_view kSummaryTemplate;
}  // namespace detail

namespace {

constexpr std::string_view kConceptListSlot = "{concept_list}";
constexpr std::string_view kHistorySlot = "{generation_history}";

std::string fill_slot(std::string_view tmpl, std::string_view slot, std::string_view value) {
  const auto pos = tmpl.find(slot);
  if (pos == std::string_view::npos) {
    throw Error(Errc::configuration, fmt::format("prompt template lacks slot {}", slot));
  }
  std::string out;
  out.reserve(tmpl.size() + value.size());
  out.append(tmpl.substr(0, pos));
  out.append(value);
  out.append(tmpl.substr(pos + slot.size()));
  return out;
}

std::string concept_lines(std::span<const ScoredConcept> concepts) {
  std::string out;
  for (std::size_t i = 0; i < concepts.size(); ++i) {
    if (i > 0) out += '\n';
    out += fmt::format("{}: {:.2f}", concepts[i].label.text(), concepts[i].score);
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<std::string_view> tagged(std::string_view raw, std::string_view open, std::string_view close) {
  const auto begin = raw.find(open);
  if (begin == std::string_view::npos) return std::nullopt;
  const auto body = begin + open.size();
  const auto end = raw.find(close, body);
  if (end == std::string_view::npos) return std::nullopt;
  return raw.substr(body, end - body);
}

}  // namespace

bool ProposalRequest::forbids(const ConceptLabel& label) const noexcept {
  return mode == ProposalMode::main && std::find(forbidden.begin(), forbidden.end(), label) != forbidden.end();
}

std::string render_main_prompt(const ProposalRequest& request) {
  std::string history;
  for (std::size_t i = 0; i < request.forbidden.size(); ++i) {
    if (i > 0) history += ", ";
    history += request.forbidden[i].text();
  }
  auto prompt = fill_slot(detail::kMainLoopTemplate, kConceptListSlot, concept_lines(request.concept_list));
  return fill_slot(prompt, kHistorySlot, history);
}

std::string render_summary_prompt(std::span<const ScoredConcept> top3) {
  if (top3.size() != 3) {
    throw Error(Errc::arity, fmt::format("summary prompt takes exactly 3 concepts, got {}", top3.size()));
  }
  return fill_slot(detail::kSummaryTemplate, kConceptListSlot, concept_lines(top3));
}

namespace {

// A scoreboard with fewer than three entries still gets a summary step, over
// whatever entries exist.
std::string summary_prompt_for(std::span<const ScoredConcept> concepts) {
  if (concepts.empty() || concepts.size() > 3) {
    throw Error(Errc::arity, fmt::format("summary takes 1 to 3 concepts, got {}", concepts.size()));
  }
  return fill_slot(detail::kSummaryTemplate, kConceptListSlot, concept_lines(concepts));
}

}  // namespace

Proposal parse_response(std::string_view raw) {
  const auto answer = tagged(raw, "<answer>", "</answer>");
  if (!answer || trim(*answer).empty()) {
    throw Error(Errc::malformed_response, "response has no <answer> content");
  }
  const auto thinking = tagged(raw, "<thinking>", "</thinking>");
  Proposal out{std::string(thinking ? trim(*thinking) : std::string_view{}), ConceptLabel::normalize(*answer), 1};
  if (out.concept_label.word_count() > 3) {
    log_warning(fmt::format("proposed concept '{}' is longer than 3 words", out.concept_label.text()));
  }
  return out;
}

ForbiddenExhausted::ForbiddenExhausted(std::size_t attempts, std::optional<Proposal> last)
    : Error(Errc::forbidden_exhausted,
            fmt::format("no acceptable concept after {} attempts{}", attempts,
                        last ? fmt::format(" (last: '{}')", last->concept_label.text()) : std::string{})),
      attempts_(attempts),
      last_(std::move(last)) {}

Proposal propose(LlmProvider& backend, const ProposalRequest& request, std::size_t max_retries,
                 const ChatOptions& options) {
  if (max_retries == 0) throw Error(Errc::configuration, "max_retries must be >= 1");
  const auto prompt = request.mode == ProposalMode::main ? render_main_prompt(request)
                                                         : summary_prompt_for(request.concept_list);
  std::optional<Proposal> last;
  for (std::size_t attempt = 1; attempt <= max_retries; ++attempt) {
    auto opts = options;
    if (opts.seed) opts.seed = *opts.seed + (attempt - 1);
    const auto raw = backend.chat(prompt, opts);
    try {
      auto proposal = parse_response(raw);
      proposal.attempts = attempt;
      if (!request.forbids(proposal.concept_label)) return proposal;
      last = std::move(proposal);
    } catch (const Error& err) {
      if (err.code() != Errc::malformed_response) throw;
    }
  }
  throw ForbiddenExhausted(max_retries, std::move(last));
}

Proposal LlmProposer::propose(const ProposalRequest& request, std::uint64_t sampling_seed) {
  auto opts = options_;
  opts.seed = sampling_seed;
  return nlab::propose(backend_, request, max_retries_, opts);
}

std::vector<TranscriptEntry> parse_transcript(std::string_view json) {
  const auto doc = detail::parse_json(json, "transcript");
  std::vector<TranscriptEntry> out;
  try {
    for (const auto& e : doc) {
      out.push_back({e.at("step").get<std::size_t>(), e.at("raw_response").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(Errc::io, fmt::format("malformed transcript: {}", ex.what()));
  }
  return out;
}

std::string ScriptedLlm::chat(const std::string& prompt, const ChatOptions&) {
  if (next_ >= transcript_.size()) {
    throw Error(Errc::transcript_exhausted,
                fmt::format("transcript has {} responses; all consumed", transcript_.size()));
  }
  prompts_.push_back(prompt);
  return transcript_[next_++].raw_response;
}

std::string_view to_string(SimStrategy strategy) noexcept {
  switch (strategy) {
    case SimStrategy::scripted: return "scripted";
    case SimStrategy::greedy: return "greedy";
    case SimStrategy::oracle: return "oracle";
  }
  return "greedy";
}

SimStrategy parse_sim_strategy(std::string_view text) {
  if (text == "scripted") return SimStrategy::scripted;
  if (text == "greedy") return SimStrategy::greedy;
  if (text == "oracle") return SimStrategy::oracle;
  throw Error(Errc::configuration, fmt::format("unknown sim strategy '{}'", text));
}

namespace {

Proposal greedy_proposal(const SimWorld& world, const ProposalRequest& request, std::uint64_t rng_seed) {
  std::vector<ScoredConcept> top = request.concept_list;
  std::stable_sort(top.begin(), top.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
  if (top.size() > 3) top.erase(top.begin() + 3, top.end());

  std::vector<double> target(world.dim(), 0.0);
  double total = 0.0;
  for (const auto& c : top) total += std::max(c.score, 0.0);
  for (const auto& c : top) {
    const double w = total > 0.0 ? std::max(c.score, 0.0) / total : 1.0 / static_cast<double>(top.size());
    const auto e = world.embedding(c.label);
    for (std::size_t i = 0; i < target.size(); ++i) target[i] += w * e[i];
  }

  auto listed = [&](const ConceptLabel& l) {
    return std::any_of(request.concept_list.begin(), request.concept_list.end(),
                       [&](const ScoredConcept& c) { return c.label == l; });
  };
  double best = -std::numeric_limits<double>::infinity();
  std::vector<const ConceptLabel*> tied;
  for (const auto& label : world.vocabulary()) {
    if (listed(label) || request.forbids(label)) continue;
    const double score = dot(world.embedding(label), target);
    if (score > best) {
      best = score;
      tied.assign(1, &label);
    } else if (score == best) {
      tied.push_back(&label);
    }
  }
  if (tied.empty()) throw ForbiddenExhausted(1, std::nullopt);
  Rng rng(rng_seed);
  const auto& pick = *tied[tied.size() == 1 ? 0 : rng.below(tied.size())];

  std::string names;
  for (std::size_t i = 0; i < top.size(); ++i) names += (i ? ", " : "") + top[i].label.text();
  return Proposal{fmt::format("Nearest unexplored concept to the weighted top concepts ({}).", names), pick, 1};
}

}  // namespace

Proposal sim_propose(const SimWorld& world, const NeuronAddress& neuron, const ProposalRequest& request,
                     SimStrategy strategy, std::uint64_t rng_seed) {
  switch (strategy) {
    case SimStrategy::oracle: {
      const auto& truth = world.neuron(neuron).truth_label;
      if (!request.forbids(truth)) return Proposal{"Ground-truth concept for this neuron.", truth, 1};
      return greedy_proposal(world, request, rng_seed);
    }
    case SimStrategy::greedy:
      return greedy_proposal(world, request, rng_seed);
    case SimStrategy::scripted:
      break;
  }
  throw Error(Errc::configuration, "scripted sim proposals need a transcript; use SimProposer");
}

SimProposer::SimProposer(const SimWorld& world, NeuronAddress neuron, SimStrategy strategy,
                         std::vector<TranscriptEntry> transcript, std::size_t max_retries)
    : world_(world),
      neuron_(std::move(neuron)),
      strategy_(strategy),
      script_(std::move(transcript)),
      max_retries_(max_retries) {}

Proposal SimProposer::propose(const ProposalRequest& request, std::uint64_t sampling_seed) {
  if (strategy_ == SimStrategy::scripted) return nlab::propose(script_, request, max_retries_);
  return sim_propose(world_, neuron_, request, strategy_, sampling_seed);
}

}  // namespace nlab
