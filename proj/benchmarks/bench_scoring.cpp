#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include <neurolabel/scoring.hpp>

namespace {

std::vector<double> draw(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

void BM_AucSorted(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto control = draw(n, 1), concept_values = draw(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(nlab::auc_pair_count(control, concept_values));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AucSorted)->RangeMultiplier(4)->Range(16, 16384)->Complexity(benchmark::oNLogN);

// Reference double loop.
void BM_AucNaive(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto control = draw(n, 1), concept_values = draw(n, 2);
  for (auto _ : state) {
    std::uint64_t less = 0;
    for (double c : control)
      for (double x : concept_values) less += c < x ? 1 : 0;
    benchmark::DoNotOptimize(less);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AucNaive)->RangeMultiplier(4)->Range(16, 4096)->Complexity(benchmark::oNSquared);

void BM_Mad(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const nlab::ActivationSet control(draw(n, 3)), concept_values(draw(n, 4));
  for (auto _ : state) benchmark::DoNotOptimize(nlab::score_mad(nlab::control_stats(control), concept_values));
}
BENCHMARK(BM_Mad)->Range(16, 16384);

}  // namespace
