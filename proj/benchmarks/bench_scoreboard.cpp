#include <string>
#include <vector>

#include <benchmark/benchmark.h>
#include <fmt/format.h>

#include <neurolabel/scoreboard.hpp>

namespace {

std::vector<nlab::ConceptLabel> labels(std::size_t n) {
  std::vector<nlab::ConceptLabel> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(nlab::ConceptLabel::normalize(fmt::format("concept {}", i)));
  return out;
}

nlab::Scoreboard filled(const std::vector<nlab::ConceptLabel>& ls) {
  nlab::Scoreboard b(nlab::NeuronAddress{"layer", 0});
  for (std::size_t i = 0; i < ls.size(); ++i)
    b.insert({ls[i], static_cast<double>((i * 7919) % 1000) / 100.0, 1 + i, nlab::Origin::generated, {}});
  return b;
}

void BM_ScoreboardInsert(benchmark::State& state) {
  const auto ls = labels(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(filled(ls));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ScoreboardInsert)->Range(8, 2048);

void BM_ScoreboardTopK(benchmark::State& state) {
  const auto board = filled(labels(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(board.top_k(5));
}
BENCHMARK(BM_ScoreboardTopK)->Range(8, 2048);

void BM_ScoreboardFind(benchmark::State& state) {
  const auto ls = labels(static_cast<std::size_t>(state.range(0)));
  const auto board = filled(ls);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(board.find(ls[i++ % ls.size()]));
}
BENCHMARK(BM_ScoreboardFind)->Range(8, 2048);

void BM_ScoreboardJson(benchmark::State& state) {
  const auto board = filled(labels(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(nlab::to_json(board));
}
BENCHMARK(BM_ScoreboardJson)->Range(8, 512);

}  // namespace
