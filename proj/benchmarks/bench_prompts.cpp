#include <vector>

#include <benchmark/benchmark.h>
#include <fmt/format.h>

#include <neurolabel/proposer.hpp>

namespace {

nlab::ProposalRequest request(std::size_t list, std::size_t history) {
  nlab::ProposalRequest r{nlab::ProposalMode::main, {}, {}};
  for (std::size_t i = 0; i < list; ++i)
    r.concept_list.push_back({nlab::ConceptLabel::normalize(fmt::format("concept {}", i)), 1.0 / (i + 1)});
  for (std::size_t i = 0; i < history; ++i)
    r.forbidden.push_back(nlab::ConceptLabel::normalize(fmt::format("tried {}", i)));
  return r;
}

void BM_RenderMain(benchmark::State& state) {
  const auto req = request(10, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(nlab::render_main_prompt(req));
}
BENCHMARK(BM_RenderMain)->Arg(0)->Arg(10)->Arg(100);

void BM_RenderSummary(benchmark::State& state) {
  const auto req = request(3, 0);
  for (auto _ : state) benchmark::DoNotOptimize(nlab::render_summary_prompt(req.concept_list));
}
BENCHMARK(BM_RenderSummary);

void BM_ParseResponse(benchmark::State& state) {
  const std::string raw = "<thinking>The top concepts share gym equipment.</thinking>\n<answer>Strength Training</answer>";
  for (auto _ : state) benchmark::DoNotOptimize(nlab::parse_response(raw));
}
BENCHMARK(BM_ParseResponse);

}  // namespace
