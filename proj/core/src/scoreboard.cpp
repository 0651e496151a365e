#include "neurolabel/scoreboard.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

#include <fmt/format.h>

#include "json_util.hpp"
#include "neurolabel/error.hpp"

namespace nlab {

std::string_view to_string(Origin origin) noexcept {
  switch (origin) {
    case Origin::predefined: return "predefined";
    case Origin::generated: return "generated";
    case Origin::summary: return "summary";
  }
  return "predefined";
}

Origin parse_origin(std::string_view text) {
  if (text == "predefined") return Origin::predefined;
  if (text == "generated") return Origin::generated;
  if (text == "summary") return Origin::summary;
  throw Error(Errc::configuration, fmt::format("unknown origin '{}'", text));
}

bool ranks_before(const ScoreboardEntry& a, const ScoreboardEntry& b) noexcept {
  if (a.score != b.score) return a.score > b.score;
  if (a.step != b.step) return a.step < b.step;
  return a.label < b.label;
}

bool Scoreboard::insert(ScoreboardEntry entry) {
  if ((entry.origin == Origin::predefined) != (entry.step == 0)) {
    throw std::invalid_argument("scoreboard: predefined entries must be exactly the step-0 entries");
  }
  if (!entries_.empty() && entry.step < entries_.back().step) {
    throw std::invalid_argument("scoreboard: entry steps must be non-decreasing");
  }
  if (entry.origin != Origin::predefined) history_.push_back(entry.label);
  if (contains(entry.label)) return false;
  entries_.push_back(std::move(entry));
  return true;
}

void Scoreboard::note_proposal(const ConceptLabel& label) { history_.push_back(label); }

const ScoreboardEntry* Scoreboard::find(const ConceptLabel& label) const noexcept {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const ScoreboardEntry& e) { return e.label == label; });
  return it == entries_.end() ? nullptr : &*it;
}

const ScoreboardEntry& Scoreboard::best() const {
  if (entries_.empty()) {
    throw Error(Errc::empty_scoreboard, fmt::format("no entries for {}", to_string(neuron_)));
  }
  return *std::min_element(entries_.begin(), entries_.end(), ranks_before);
}

std::vector<ScoreboardEntry> Scoreboard::top_k(std::size_t k) const {
  std::vector<ScoreboardEntry> out = entries_;
  const auto n = std::min(k, out.size());
  std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), out.end(),
                    ranks_before);
  out.erase(out.begin() + static_cast<std::ptrdiff_t>(n), out.end());
  return out;
}

std::vector<ConceptLabel> Scoreboard::forbidden_set() const {
  std::vector<ConceptLabel> out;
  std::unordered_set<ConceptLabel> seen;
  for (const auto& label : history_) {
    if (seen.insert(label).second) out.push_back(label);
  }
  return out;
}

bool Scoreboard::is_forbidden(const ConceptLabel& label) const noexcept {
  return std::find(history_.begin(), history_.end(), label) != history_.end();
}

std::string to_json(const Scoreboard& board) {
  std::string out;
  out += "{\n";
  out += fmt::format("  \"neuron\": {{\"layer\": {}, \"index\": {}}},\n",
                     detail::json_quote(board.neuron().layer), board.neuron().index);
  out += "  \"entries\": [";
  const auto& entries = board.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    out += i == 0 ? "\n" : ",\n";
    out += fmt::format("    {{\"label\": {}, \"score\": {:.6f}, \"step\": {}, \"origin\": \"{}\"}}",
                       detail::json_quote(e.label.text()), e.score, e.step, to_string(e.origin));
  }
  out += entries.empty() ? "],\n" : "\n  ],\n";
  out += "  \"proposal_history\": [";
  const auto& history = board.proposal_history();
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (i > 0) out += ", ";
    out += detail::json_quote(history[i].text());
  }
  out += "]\n}\n";
  return out;
}

Scoreboard scoreboard_from_json(std::string_view text) {
  const auto doc = detail::parse_json(text, "scoreboard");
  try {
    // Entries and history are restored verbatim rather than replayed through
    // insert(), which would append history a second time.
    Scoreboard rebuilt(NeuronAddress{doc.at("neuron").at("layer").get<std::string>(),
                                     doc.at("neuron").at("index").get<std::size_t>()});
    for (const auto& e : doc.at("entries")) {
      ScoreboardEntry entry{ConceptLabel::normalize(e.at("label").get<std::string>()),
                            e.at("score").get<double>(), e.at("step").get<std::size_t>(),
                            parse_origin(e.at("origin").get<std::string>()),
                            {}};
      rebuilt.entries_.push_back(std::move(entry));
    }
    for (const auto& h : doc.at("proposal_history")) {
      rebuilt.history_.push_back(ConceptLabel::normalize(h.get<std::string>()));
    }
    return rebuilt;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(Errc::io, fmt::format("malformed scoreboard JSON: {}", ex.what()));
  }
}

}  // namespace nlab
