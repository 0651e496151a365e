#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "neurolabel/label.hpp"
#include "neurolabel/neuron.hpp"

namespace nlab {

/// Where a scoreboard entry came from: seeded from the class vocabulary at
/// step 0, proposed during refinement, or produced by the summary step.
enum class Origin { predefined, generated, summary };

std::string_view to_string(Origin origin) noexcept;
Origin parse_origin(std::string_view text);

struct ScoreboardEntry {
  ConceptLabel label;
  double score = 0.0;
  std::size_t step = 0;
  Origin origin = Origin::predefined;
  std::vector<std::string> image_refs;
};

/// Strict total order used by best() and top_k(): higher score first, then
/// earlier step, then lexicographically smaller label.
bool ranks_before(const ScoreboardEntry& a, const ScoreboardEntry& b) noexcept;

/// Per-neuron concept scoreboard. Entries are append-only and unique per
/// label; every label the proposer has emitted is kept in proposal_history,
/// duplicates included.
class Scoreboard;
Scoreboard scoreboard_from_json(std::string_view json);

class Scoreboard {
 public:
  explicit Scoreboard(NeuronAddress neuron) : neuron_(std::move(neuron)) {}

  const NeuronAddress& neuron() const noexcept { return neuron_; }
  const std::vector<ScoreboardEntry>& entries() const noexcept { return entries_; }
  const std::vector<ConceptLabel>& proposal_history() const noexcept { return history_; }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }

  /// Appends `entry` unless its label is already present, in which case the
  /// existing entry is kept unchanged. Non-predefined entries are recorded in
  /// proposal_history either way. Returns true when the entry was appended.
  /// Throws std::invalid_argument if the step would decrease or if the
  /// origin/step pairing is inconsistent (predefined <=> step 0).
  bool insert(ScoreboardEntry entry);

  /// Records a proposal that did not produce an entry (e.g. a rejected
  /// repeat), keeping the forbidden list complete.
  void note_proposal(const ConceptLabel& label);

  const ScoreboardEntry* find(const ConceptLabel& label) const noexcept;
  bool contains(const ConceptLabel& label) const noexcept { return find(label) != nullptr; }

  /// Throws Error{empty_scoreboard}.
  const ScoreboardEntry& best() const;
  std::vector<ScoreboardEntry> top_k(std::size_t k) const;
  std::vector<ScoreboardEntry> sorted() const { return top_k(entries_.size()); }

  /// Deduplicated proposal history in first-proposed order. Predefined
  /// labels that were never proposed are not included.
  std::vector<ConceptLabel> forbidden_set() const;
  bool is_forbidden(const ConceptLabel& label) const noexcept;

 private:
  friend Scoreboard scoreboard_from_json(std::string_view json);

  NeuronAddress neuron_;
  std::vector<ScoreboardEntry> entries_;
  std::vector<ConceptLabel> history_;
};

/// Byte-stable JSON: {neuron, entries:[{label, score, step, origin}],
/// proposal_history:[...]}, scores with six decimals.
std::string to_json(const Scoreboard& board);
Scoreboard scoreboard_from_json(std::string_view json);

}  // namespace nlab
