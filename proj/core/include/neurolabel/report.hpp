#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "neurolabel/neuron.hpp"
#include "neurolabel/scoreboard.hpp"

namespace nlab {

struct RunReport {
  std::size_t iterations = 0;
  std::size_t neurons = 0;  // selected, including failed ones
  std::size_t failed = 0;
  std::size_t predefined = 0;
  std::size_t generated = 0;
  std::size_t summary = 0;
  /// Count of winning labels by discovery step, bins 0..N+1.
  std::vector<std::size_t> discovery_histogram;
};

/// Aggregates the scoreboards of a run directory. Throws Error{io} when the
/// directory holds no run or no scoreboards.
RunReport report_run(const std::filesystem::path& dir);
RunReport report_boards(const std::vector<Scoreboard>& boards, std::size_t iterations);

std::string report_text(const RunReport& report);
std::string report_json(const RunReport& report);

}  // namespace nlab
