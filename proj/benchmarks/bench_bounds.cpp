#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ove/bounds.hpp"

namespace {

std::vector<double> scores(std::size_t K) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 2.0);
  std::vector<double> f(K);
  for (double& v : f) v = g(rng);
  return f;
}

void BM_LogSoftmax(benchmark::State& state) {
  const auto f = scores(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ove::log_softmax_prob(f, 0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_OveBound(benchmark::State& state) {
  const auto f = scores(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ove::ove_log_bound(f, 0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_OptimizeAlpha(benchmark::State& state) {
  const auto f = scores(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ove::optimize_alpha(f));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_LogSoftmax)->RangeMultiplier(8)->Range(8, 4096);
BENCHMARK(BM_OveBound)->RangeMultiplier(8)->Range(8, 4096);
BENCHMARK(BM_OptimizeAlpha)->RangeMultiplier(8)->Range(8, 4096);
