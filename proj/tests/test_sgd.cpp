#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "ove/bounds.hpp"
#include "ove/errors.hpp"
#include "ove/objectives.hpp"
#include "ove/sampling.hpp"
#include "ove/sgd.hpp"
#include "ove/synthetic.hpp"

using namespace ove;

namespace {

SparseDataset small_data(int K, std::size_t D, std::size_t N, std::uint64_t seed) {
  return gen_sparse_classification({.num_classes = K,
                                    .num_features = D,
                                    .num_rows = N,
                                    .nnz_per_row = static_cast<int>(std::min<std::size_t>(3, D)),
                                    .features_per_class = 2,
                                    .seed = seed});
}

LinearModel random_model(int K, std::size_t D, std::uint64_t seed, double scale = 0.5) {
  LinearModel m(K, D);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, scale);
  for (double& p : m.parameters()) p = g(rng);
  return m;
}

// Dense, eager re-implementation of the trainer: same random streams, every
// weight decayed on every step.
LinearModel eager_reference(LinearModel m, const SparseDataset& data, const TrainConfig& cfg) {
  const int K = data.num_classes();
  const std::size_t N = data.size();
  const double pair_scale = static_cast<double>(K - 1) / cfg.remaining_classes;
  const double c = cfg.objective == ObjectiveKind::kOve ? 1.0 / pair_scale : 1.0;
  Rng shuffle_rng = make_rng(cfg.seed, RngStream::kDataShuffle);
  Rng class_rng = make_rng(cfg.seed, RngStream::kClassSampling);
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), std::size_t{0});
  double lr = cfg.lr0;
  std::vector<int> sampled;
  for (int e = 0; e < cfg.epochs; ++e) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t s = 0; s < N; s += static_cast<std::size_t>(cfg.minibatch_size)) {
      const std::size_t stop = std::min(N, s + static_cast<std::size_t>(cfg.minibatch_size));
      LinearModel grad(K, data.num_features());
      for (std::size_t b = s; b < stop; ++b) {
        const auto x = data.row(order[b]);
        const int y = data.label(order[b]);
        const auto sc = m.scores(x);
        auto add = [&](int k, double w) {
          for (std::size_t j = 0; j < x.nnz(); ++j) grad.weight(k, x.indices[j]) += w * x.values[j];
          grad.bias(k) += w;
        };
        if (cfg.objective == ObjectiveKind::kOve) {
          sample_remaining_into(K, y, cfg.remaining_classes, class_rng, sampled);
          for (int mm : sampled) {
            const double w = pair_scale * sigmoid(sc[mm] - sc[y]);
            add(y, w);
            add(mm, -w);
          }
        } else {
          const auto p = softmax(sc);
          for (int k = 0; k < K; ++k) add(k, (k == y) - p[k]);
        }
      }
      const double decay = 1.0 - c * lr * cfg.lambda * static_cast<double>(stop - s) / N;
      for (double& w : m.weights()) w *= decay;
      for (std::size_t i = 0; i < m.num_parameters(); ++i) m.parameters()[i] += c * lr * grad.parameters()[i];
    }
    lr *= cfg.lr_decay;
  }
  return m;
}

double max_abs_diff(const LinearModel& a, const LinearModel& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.num_parameters(); ++i) {
    d = std::max(d, std::abs(a.parameters()[i] - b.parameters()[i]));
  }
  return d;
}

}  // namespace

TEST(Sampling, ForcedAndComplementCases) {
  Rng rng = make_rng(1, RngStream::kClassSampling);
  EXPECT_EQ(sample_remaining(2, 0, 1, rng), (std::vector<int>{1}));
  auto all = sample_remaining(5, 2, 4, rng);
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, (std::vector<int>{0, 1, 3, 4}));
  EXPECT_THROW(sample_remaining(5, 2, 5, rng), InvalidArgument);
  EXPECT_THROW(sample_remaining(5, 7, 1, rng), InvalidArgument);
  EXPECT_TRUE(sample_remaining(5, 2, 0, rng).empty());
}

TEST(Sampling, DistinctAndUniform) {
  Rng rng = make_rng(2, RngStream::kClassSampling);
  const int K = 10, S = 3, draws = 100000;
  std::vector<int> hits(K, 0);
  for (int d = 0; d < draws; ++d) {
    const auto s = sample_remaining(K, 4, S, rng);
    ASSERT_EQ(std::set<int>(s.begin(), s.end()).size(), static_cast<std::size_t>(S));
    for (int c : s) ++hits[c];
  }
  EXPECT_EQ(hits[4], 0);
  const double p = 1.0 / 3.0;
  const double sd = std::sqrt(draws * p * (1 - p));
  for (int k = 0; k < K; ++k) {
    if (k != 4) {
      EXPECT_NEAR(hits[k], draws * p, 3 * sd) << "class " << k;
    }
  }
}

TEST(Sampling, LargeSampleUsesEveryClassOnce) {
  Rng rng = make_rng(3, RngStream::kClassSampling);
  const auto s = sample_remaining(1000, 0, 900, rng);
  EXPECT_EQ(std::set<int>(s.begin(), s.end()).size(), 900u);
  EXPECT_EQ(std::count(s.begin(), s.end(), 0), 0);
}

TEST(Sampling, StreamsAreIndependent) {
  Rng a = make_rng(5, RngStream::kDataShuffle);
  Rng b = make_rng(5, RngStream::kClassSampling);
  Rng c = make_rng(5, RngStream::kDataShuffle);
  const auto x = a();
  EXPECT_NE(x, b());
  EXPECT_EQ(x, c());
}

TEST(StochasticGradient, ZeroModelSingleInstance) {
  SparseDataset d(3, 4);
  d.add_row(SparseVector({0, 2}, {2.0, -1.0}), 1);
  const LinearModel m(4, 3);
  Rng rng = make_rng(0, RngStream::kClassSampling);
  const std::vector<std::size_t> batch{0};
  const auto delta = stochastic_gradient(m, d, batch, 1, rng);
  ASSERT_EQ(delta.rows.size(), 2u);
  const double mag = 3 * 0.5;  // (K−1)·σ(0)
  const auto& pos = delta.rows.at(1);
  EXPECT_DOUBLE_EQ(pos.weights.at(0), mag * 2.0);
  EXPECT_DOUBLE_EQ(pos.weights.at(2), -mag);
  EXPECT_DOUBLE_EQ(pos.bias, mag);
  const auto neg = std::find_if(delta.rows.begin(), delta.rows.end(), [](const auto& r) { return r.first != 1; });
  EXPECT_DOUBLE_EQ(neg->second.weights.at(0), -mag * 2.0);
  EXPECT_DOUBLE_EQ(neg->second.bias, -mag);
  EXPECT_NEAR(delta.bound_estimate, 3 * std::log(0.5), 1e-15);
}

TEST(StochasticGradient, FullSamplingEqualsExactBatchGradient) {
  const SparseDataset data = small_data(5, 6, 12, 1);
  const LinearModel m = random_model(5, 6, 2);
  const std::vector<std::size_t> batch{0, 3, 4, 9};
  Rng rng = make_rng(0, RngStream::kClassSampling);
  const auto delta = stochastic_gradient(m, data, batch, 4, rng);
  const auto exact = full_gradient(m, data.subset(batch), Objective{ObjectiveKind::kOve, 0.0, {}});
  LinearModel dense(5, 6);
  for (const auto& [k, row] : delta.rows) {
    for (const auto& [j, v] : row.weights) dense.weight(k, j) = v;
    dense.bias(k) = row.bias;
  }
  EXPECT_LT(max_abs_diff(dense, exact), 1e-12);
  EXPECT_NEAR(delta.bound_estimate * 4, ove_loglik(m, data.subset(batch), 0.0), 1e-12);
}

TEST(StochasticGradient, UnbiasedOverDraws) {
  const SparseDataset data = small_data(6, 4, 10, 3);
  const LinearModel m = random_model(6, 4, 4);
  const std::vector<std::size_t> batch{1, 2, 5, 7, 8};
  const auto exact = full_gradient(m, data.subset(batch), Objective{ObjectiveKind::kOve, 0.0, {}});
  Rng rng = make_rng(9, RngStream::kClassSampling);
  const int draws = 10000;
  std::vector<double> sum(m.num_parameters(), 0.0), sq(m.num_parameters(), 0.0);
  for (int d = 0; d < draws; ++d) {
    const auto delta = stochastic_gradient(m, data, batch, 2, rng);
    std::vector<double> g(m.num_parameters(), 0.0);
    for (const auto& [k, row] : delta.rows) {
      for (const auto& [j, v] : row.weights) g[static_cast<std::size_t>(k) * 4 + j] += v;
      g[m.num_weights() + static_cast<std::size_t>(k)] += row.bias;
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      sum[i] += g[i];
      sq[i] += g[i] * g[i];
    }
  }
  for (std::size_t i = 0; i < sum.size(); ++i) {
    const double mean = sum[i] / draws;
    const double se = std::sqrt(std::max(sq[i] / draws - mean * mean, 0.0) / draws);
    EXPECT_LE(std::abs(mean - exact.parameters()[i]), 3 * se + 1e-12) << "coordinate " << i;
  }
}

TEST(Train, LazyDecayMatchesEagerOracle) {
  const SparseDataset data = small_data(7, 9, 40, 5);
  TrainConfig cfg;
  cfg.minibatch_size = 3;
  cfg.remaining_classes = 2;
  cfg.epochs = 4;
  cfg.lr0 = 0.2;
  cfg.lr_decay = 0.7;
  cfg.lambda = 2.0;
  cfg.seed = 17;
  const LinearModel init = random_model(7, 9, 6);
  const auto lazy = train(init, data, cfg);
  const auto eager = eager_reference(init, data, cfg);
  EXPECT_LT(max_abs_diff(lazy.model, eager), 1e-10);
}

TEST(Train, ExactSoftmaxPathMatchesEagerOracle) {
  const SparseDataset data = small_data(4, 5, 30, 6);
  TrainConfig cfg;
  cfg.objective = ObjectiveKind::kExactSoftmax;
  cfg.minibatch_size = 4;
  cfg.epochs = 3;
  cfg.lr0 = 0.1;
  cfg.lambda = 0.5;
  cfg.seed = 2;
  const LinearModel init = random_model(4, 5, 7);
  EXPECT_LT(max_abs_diff(train(init, data, cfg).model, eager_reference(init, data, cfg)), 1e-10);
}

TEST(Train, FullBatchFullSamplingIsGradientAscent) {
  const SparseDataset data = small_data(4, 5, 16, 8);
  TrainConfig cfg;
  cfg.minibatch_size = 16;
  cfg.remaining_classes = 3;
  cfg.epochs = 25;
  cfg.lr0 = 0.05;
  cfg.lambda = 1.0;
  LinearModel ga = random_model(4, 5, 9);
  const auto sgd = train(ga, data, cfg);
  for (int t = 0; t < cfg.epochs; ++t) {
    const auto g = full_gradient(ga, data, Objective{ObjectiveKind::kOve, cfg.lambda, {}});
    for (std::size_t i = 0; i < ga.num_parameters(); ++i) ga.parameters()[i] += cfg.lr0 * g.parameters()[i];
  }
  EXPECT_LT(max_abs_diff(sgd.model, ga), 1e-10);
}

TEST(Train, TouchesOnlyLabelAndSampledRows) {
  const SparseDataset data = small_data(50, 30, 200, 10);
  TrainConfig cfg;
  cfg.minibatch_size = 2;
  cfg.remaining_classes = 3;
  cfg.epochs = 1;
  cfg.lr0 = 0.05;
  cfg.lambda = 0.1;
  long steps = 0;
  auto observer = [&](const StepRecord& r) {
    ++steps;
    std::set<int> allowed(r.batch_labels.begin(), r.batch_labels.end());
    allowed.insert(r.sampled_classes.begin(), r.sampled_classes.end());
    EXPECT_EQ(r.sampled_classes.size(), r.batch_labels.size() * 3);
    for (int row : r.written_rows) EXPECT_TRUE(allowed.count(row)) << "row " << row;
    EXPECT_LE(r.written_rows.size(), 8u);
  };
  const auto result = train(LinearModel(50, 30), data, cfg, observer);
  EXPECT_EQ(steps, 100);
  EXPECT_EQ(result.stats.steps, 100);
  EXPECT_LE(result.stats.max_rows_per_step, 8);
}

TEST(Train, DeterministicAndSeedSensitive) {
  const SparseDataset data = small_data(8, 10, 60, 11);
  TrainConfig cfg;
  cfg.minibatch_size = 5;
  cfg.remaining_classes = 2;
  cfg.epochs = 2;
  cfg.lr0 = 0.1;
  cfg.lambda = 0.5;
  cfg.seed = 4;
  const auto a = train(LinearModel(8, 10), data, cfg);
  const auto b = train(LinearModel(8, 10), data, cfg);
  EXPECT_EQ(max_abs_diff(a.model, b.model), 0.0);
  EXPECT_EQ(a.trace.bound_values(), b.trace.bound_values());
  cfg.seed = 5;
  EXPECT_GT(max_abs_diff(train(LinearModel(8, 10), data, cfg).model, a.model), 0.0);
}

TEST(Train, TraceRowsAndCsv) {
  const SparseDataset data = small_data(4, 5, 20, 12);
  TrainConfig cfg;
  cfg.minibatch_size = 2;
  cfg.epochs = 2;
  cfg.log_interval = 3;
  const auto r = train(LinearModel(4, 5), data, cfg);
  ASSERT_EQ(r.trace.rows.size(), 7u);  // iterations 0,3,...,18
  for (std::size_t i = 1; i < r.trace.rows.size(); ++i) {
    EXPECT_GT(r.trace.rows[i].iteration, r.trace.rows[i - 1].iteration);
  }
  std::ostringstream with, without;
  r.trace.write_csv(with);
  r.trace.write_csv(without, false);
  EXPECT_EQ(with.str().substr(0, with.str().find('\n')), "iteration,raw_bound_estimate,lr,epoch,elapsed_ms");
  EXPECT_EQ(without.str().substr(0, without.str().find('\n')), "iteration,raw_bound_estimate,lr,epoch");
}

TEST(Train, ConfigErrors) {
  const SparseDataset data = small_data(4, 5, 20, 13);
  TrainConfig cfg;
  cfg.remaining_classes = 4;
  EXPECT_THROW(train(LinearModel(4, 5), data, cfg), InvalidArgument);
  cfg.remaining_classes = 1;
  cfg.lr_decay = 1.5;
  EXPECT_THROW(train(LinearModel(4, 5), data, cfg), InvalidArgument);
  cfg.lr_decay = 1.0;
  EXPECT_THROW(train(LinearModel(3, 5), data, cfg), InvalidArgument);
  cfg.objective = ObjectiveKind::kBouchard;
  EXPECT_THROW(train(LinearModel(4, 5), data, cfg), InvalidArgument);
  cfg.objective = ObjectiveKind::kOve;
  cfg.lambda = 100.0;
  cfg.lr0 = 10.0;
  cfg.minibatch_size = 20;
  EXPECT_THROW(train(LinearModel(4, 5), data, cfg), InvalidArgument);
}

TEST(Train, DivergenceAbortsWithDiagnostic) {
  SparseDataset d(1, 3);
  for (int i = 0; i < 10; ++i) d.add_row(SparseVector({0}, {1e300}), i % 3);
  TrainConfig cfg;
  cfg.lr0 = 1e10;
  cfg.epochs = 3;
  EXPECT_THROW(train(LinearModel(3, 1), d, cfg), NumericalError);
}
