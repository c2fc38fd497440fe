#include <benchmark/benchmark.h>

#include "ove/sgd.hpp"
#include "ove/synthetic.hpp"

namespace {

// One epoch of doubly stochastic training; the cost should track b·(S+1)·nnz,
// not K·D.
void BM_TrainEpoch(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const auto data = ove::gen_sparse_classification(
      {.num_classes = K, .num_features = 20000, .num_rows = 20000, .nnz_per_row = 20, .seed = 1});
  ove::TrainConfig cfg;
  cfg.remaining_classes = static_cast<int>(state.range(1));
  cfg.lr0 = 0.01;
  cfg.lambda = 1.0;
  cfg.log_interval = 1000;
  for (auto _ : state) {
    auto r = ove::train(ove::LinearModel(K, 20000), data, cfg);
    benchmark::DoNotOptimize(r.model.parameters().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(data.size()));
}

void BM_StochasticGradient(benchmark::State& state) {
  const auto data = ove::gen_sparse_classification(
      {.num_classes = 1000, .num_features = 5000, .num_rows = 1000, .nnz_per_row = 20, .seed = 2});
  const ove::LinearModel model(1000, 5000);
  std::vector<std::size_t> batch(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;
  auto rng = ove::make_rng(0, ove::RngStream::kClassSampling);
  for (auto _ : state) benchmark::DoNotOptimize(ove::stochastic_gradient(model, data, batch, 5, rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_TrainEpoch)->Args({100, 1})->Args({1000, 1})->Args({1000, 10})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StochasticGradient)->Arg(1)->Arg(100);
