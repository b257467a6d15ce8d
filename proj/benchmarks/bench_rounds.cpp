#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "brace/adversary.hpp"
#include "brace/aggregators.hpp"
#include "brace/ring.hpp"

using namespace brace;

namespace {

std::vector<GradVec> gradients(std::size_t n, std::size_t d) {
  std::mt19937_64 rng(n * 7919 + d);
  std::normal_distribution<double> g;
  std::vector<GradVec> out(n, GradVec(d));
  for (auto& v : out)
    for (auto& x : v) x = g(rng);
  return out;
}

void BM_BraceRound(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0)), d = static_cast<std::size_t>(state.range(1));
  const auto g = gradients(n, d);
  const ChunkPlan plan(d, n);
  for (auto _ : state) benchmark::DoNotOptimize(run_brace_round(g, plan, 0, 32));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * d));
}

void BM_RarRound(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0)), d = static_cast<std::size_t>(state.range(1));
  const auto g = gradients(n, d);
  const ChunkPlan plan(d, n);
  for (auto _ : state) benchmark::DoNotOptimize(run_rar_round(g, plan, 32));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * d));
}

void BM_Krum(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0)), d = static_cast<std::size_t>(state.range(1));
  const auto g = gradients(n, d);
  for (auto _ : state) benchmark::DoNotOptimize(gar_krum(g, n / 5));
}

void BM_Median(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0)), d = static_cast<std::size_t>(state.range(1));
  const auto g = gradients(n, d);
  for (auto _ : state) benchmark::DoNotOptimize(gar_median(g));
}

void BM_TrimmedMean(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0)), d = static_cast<std::size_t>(state.range(1));
  const auto g = gradients(n, d);
  for (auto _ : state) benchmark::DoNotOptimize(gar_trimmed_mean(g, n / 5));
}

void BM_MinMaxAttack(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0)), d = static_cast<std::size_t>(state.range(1));
  const auto g = gradients(n, d);
  AttackSpec spec;
  spec.kind = AttackKind::MinMax;
  spec.malicious = spread_malicious(n, n / 5);
  const GradVec w(d, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(craft_submissions(spec, g, w, 0, 1));
}

}  // namespace

BENCHMARK(BM_BraceRound)->Args({10, 1000})->Args({30, 200})->Args({100, 10000});
BENCHMARK(BM_RarRound)->Args({10, 1000})->Args({30, 200})->Args({100, 10000});
BENCHMARK(BM_Krum)->Args({10, 1000})->Args({30, 200})->Args({100, 1000});
BENCHMARK(BM_Median)->Args({10, 1000})->Args({30, 200})->Args({100, 1000});
BENCHMARK(BM_TrimmedMean)->Args({10, 1000})->Args({30, 200})->Args({100, 1000});
BENCHMARK(BM_MinMaxAttack)->Args({30, 200});
BENCHMARK_MAIN();
