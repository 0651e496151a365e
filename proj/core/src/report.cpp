#include "neurolabel/report.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "json_util.hpp"
#include "neurolabel/artifacts.hpp"
#include "neurolabel/error.hpp"
#include "neurolabel/io.hpp"

namespace nlab {

namespace fs = std::filesystem;

RunReport report_boards(const std::vector<Scoreboard>& boards, std::size_t iterations) {
  RunReport r;
  r.iterations = iterations;
  r.neurons = boards.size();
  r.discovery_histogram.assign(iterations + 2, 0);
  for (const auto& board : boards) {
    const auto& best = board.best();
    switch (best.origin) {
      case Origin::predefined: ++r.predefined; break;
      case Origin::generated: ++r.generated; break;
      case Origin::summary: ++r.summary; break;
    }
    const auto bin = std::min(best.step, iterations + 1);
    ++r.discovery_histogram[bin];
  }
  return r;
}

RunReport report_run(const fs::path& dir) {
  const auto manifest = read_manifest(dir);
  std::vector<Scoreboard> boards;
  for (const auto& n : manifest.neurons) {
    const auto path = dir / "scoreboards" / (neuron_file_stem(n) + ".json");
    if (!fs::exists(path)) continue;
    boards.push_back(scoreboard_from_json(read_file(path)));
  }
  if (boards.empty()) throw Error(Errc::io, fmt::format("run directory '{}' holds no scoreboards", dir.string()));
  auto r = report_boards(boards, manifest.iterations);
  r.neurons = manifest.neurons.size();
  r.failed = r.neurons - boards.size();
  return r;
}

std::string report_text(const RunReport& r) {
  std::string out = fmt::format("neurons: {} ({} failed)\n", r.neurons, r.failed);
  out += fmt::format("winning label origin:\n  predefined {}\n  generated  {}\n  summary    {}\n", r.predefined,
                     r.generated, r.summary);
  out += "discovery step histogram:\n";
  for (std::size_t i = 0; i < r.discovery_histogram.size(); ++i) {
    const auto name = i + 1 == r.discovery_histogram.size() ? std::string("S") : std::to_string(i);
    out += fmt::format("  {:>3} {}\n", name, r.discovery_histogram[i]);
  }
  return out;
}

std::string report_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["iterations"] = r.iterations;
  j["neurons"] = r.neurons;
  j["failed"] = r.failed;
  j["origin"] = {{"predefined", r.predefined}, {"generated", r.generated}, {"summary", r.summary}};
  j["discovery_histogram"] = r.discovery_histogram;
  return j.dump(2) + "\n";
}

}  // namespace nlab
