#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "ove/bounds.hpp"
#include "ove/errors.hpp"
#include "ove/nonparam.hpp"
#include "ove/synthetic.hpp"

using namespace ove;

namespace {

CountVector random_counts(std::mt19937_64& rng, int K, int max_count) {
  std::uniform_int_distribution<int> c(1, max_count);
  std::vector<std::int64_t> v(static_cast<std::size_t>(K));
  for (auto& x : v) x = c(rng);
  return CountVector(v);
}

double sum_f(const EstimationResult& r) {
  double s = 0.0;
  for (double v : r.f_hat) {
    if (std::isfinite(v)) s += v;
  }
  return s;
}

}  // namespace

TEST(CountVector, Validation) {
  EXPECT_THROW(CountVector({5}), InvalidArgument);
  EXPECT_THROW(CountVector({0, 0}), InvalidArgument);
  EXPECT_THROW(CountVector({1, -1}), InvalidArgument);
  const CountVector c({2, 0, 3});
  EXPECT_EQ(c.total(), 5);
  EXPECT_EQ(c.active_classes(), (std::vector<std::size_t>{0, 2}));
  const std::vector<int> labels{0, 2, 2, 1};
  EXPECT_EQ(CountVector::from_labels(labels, 4).values(), (std::vector<std::int64_t>{1, 1, 2, 0}));
}

TEST(ExactMle, ClosedForm) {
  const auto r = exact_mle(CountVector({2, 3, 5}));
  EXPECT_EQ(r.probs, (std::vector<double>{0.2, 0.3, 0.5}));
  EXPECT_NEAR(sum_f(r), 0.0, 1e-12);
  const auto u = exact_mle(CountVector({100, 1}));
  EXPECT_DOUBLE_EQ(u.probs[0], 100.0 / 101.0);
  EXPECT_DOUBLE_EQ(u.probs[1], 1.0 / 101.0);
}

TEST(ExactMle, ZeroCountClassIsExcluded) {
  const auto r = exact_mle(CountVector({3, 0, 1}));
  EXPECT_EQ(r.probs[1], 0.0);
  EXPECT_TRUE(std::isinf(r.f_hat[1]) && r.f_hat[1] < 0);
  EXPECT_DOUBLE_EQ(r.probs[0], 0.75);
  EXPECT_TRUE(r.to_json()["f_hat"][1].is_null());
}

TEST(OveObjective, HandValues) {
  const std::vector<double> zeros{0, 0};
  EXPECT_NEAR(ove_objective(zeros, CountVector({1, 1})), 2 * std::log(0.5), 1e-14);
  const std::vector<double> f{std::log(3.0), 0.0};
  const double expected = 3 * std::log(0.75) + std::log(0.25);
  EXPECT_NEAR(ove_objective(f, CountVector({3, 1})), expected, 1e-13);
  EXPECT_NEAR(expected, -2.24934057847523, 1e-13);
}

TEST(OveObjective, PairwiseFormAgrees) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 2);
  for (int t = 0; t < 100; ++t) {
    const int K = 2 + t % 15;
    const CountVector c = random_counts(rng, K, 40);
    std::vector<double> f(static_cast<std::size_t>(K));
    for (double& v : f) v = n(rng);
    EXPECT_NEAR(ove_objective(f, c), ove_objective_pairwise(f, c), 1e-9 * (1 + std::abs(ove_objective(f, c))));
  }
}

TEST(OveObjective, IsConcave) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0, 3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 200; ++t) {
    const int K = 2 + t % 8;
    const CountVector c = random_counts(rng, K, 20);
    std::vector<double> a(static_cast<std::size_t>(K)), b(a.size()), m(a.size());
    for (double& v : a) v = n(rng);
    for (double& v : b) v = n(rng);
    const double lam = u(rng);
    for (std::size_t i = 0; i < a.size(); ++i) m[i] = lam * a[i] + (1 - lam) * b[i];
    EXPECT_GE(ove_objective(m, c), lam * ove_objective(a, c) + (1 - lam) * ove_objective(b, c) - 1e-9);
  }
}

TEST(OveObjective, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0, 1.5);
  const double h = 1e-5;
  for (int t = 0; t < 100; ++t) {
    const int K = 2 + t % 10;
    const CountVector c = random_counts(rng, K, 30);
    std::vector<double> f(static_cast<std::size_t>(K));
    for (double& v : f) v = n(rng);
    const auto g = ove_objective_gradient(f, c);
    for (std::size_t k = 0; k < f.size(); ++k) {
      auto fp = f, fm = f;
      fp[k] += h;
      fm[k] -= h;
      const double fd = (ove_objective(fp, c) - ove_objective(fm, c)) / (2 * h);
      EXPECT_NEAR(g[k], fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(OveFit, RecoversCountsOverN) {
  const auto r = ove_fit(CountVector({2, 3, 5}));
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(r.probs[k], (std::vector<double>{0.2, 0.3, 0.5})[k], 1e-6);
  EXPECT_NEAR(sum_f(r), 0.0, 1e-9);
  const auto uniform = ove_fit(CountVector(std::vector<std::int64_t>(10, 1)));
  for (double p : uniform.probs) EXPECT_NEAR(p, 0.1, 1e-9);
}

TEST(OveFit, StationaryConditionHolds) {
  const CountVector c({4, 9, 1, 6});
  const auto r = ove_fit(c);
  const int K = 4;
  for (int k = 0; k < K; ++k) {
    double s = 0.0;
    for (int m = 0; m < K; ++m) {
      if (m == k) continue;
      s += static_cast<double>(c[k] + c[m]) / c[k] * sigmoid(r.f_hat[k] - r.f_hat[m]);
    }
    EXPECT_NEAR(s, K - 1, 1e-6);
  }
}

TEST(OveFit, EachPairTermIsMaximizedAtTheSolution) {
  const CountVector c({5, 2, 8});
  const auto r = ove_fit(c);
  for (int k = 0; k < 3; ++k) {
    for (int m = k + 1; m < 3; ++m) {
      auto pair = [&](double d) {
        return c[k] * log_sigmoid(d) + c[m] * log_sigmoid(-d);
      };
      const double d0 = r.f_hat[k] - r.f_hat[m];
      for (double eps : {-1e-2, 1e-2, -0.3, 0.3}) EXPECT_LE(pair(d0 + eps), pair(d0) + 1e-12);
    }
  }
}

TEST(OveFit, MatchesExactOnRandomCounts) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    const CountVector c = random_counts(rng, 10, 40);
    const auto r = ove_fit(c);
    const auto e = exact_mle(c);
    for (int k = 0; k < 10; ++k) EXPECT_NEAR(r.probs[k], e.probs[k], 1e-6);
  }
}

TEST(OveFit, ZeroCountsAreExcluded) {
  const auto r = ove_fit(CountVector({3, 0, 1}));
  EXPECT_EQ(r.probs[1], 0.0);
  EXPECT_NEAR(r.probs[0], 0.75, 1e-6);
}

TEST(BouchardFit, TwoClassClosedForm) {
  const auto r = bouchard_fit(CountVector({3, 1}));
  EXPECT_NEAR(r.probs[0], 0.9, 1e-6);
  EXPECT_NEAR(r.probs[1], 0.1, 1e-6);
  ASSERT_TRUE(r.alpha.has_value());
  EXPECT_NEAR(*r.alpha, 0.5 * (r.f_hat[0] + r.f_hat[1]), 1e-6);
  EXPECT_NEAR(r.f_hat[0] - r.f_hat[1], 2 * std::log(3.0), 1e-6);
}

TEST(BouchardFit, GridSearchAgreesWithClosedForm) {
  // Coarse-to-fine search of max over (d, α) of F with f = (d/2, −d/2).
  const CountVector c({3, 1});
  double best_d = 0.0, best = -1e300;
  for (double lo = -5, hi = 5, step = 0.1; step > 1e-7; step /= 10) {
    for (double d = lo; d <= hi; d += step) {
      const std::vector<double> f{d / 2, -d / 2};
      const double v = bouchard_objective(f, optimize_alpha(f), c);
      if (v > best) {
        best = v;
        best_d = d;
      }
    }
    lo = best_d - step;
    hi = best_d + step;
  }
  EXPECT_NEAR(best_d, 2 * std::log(3.0), 1e-5);
}

TEST(BouchardFit, SymmetricCounts) {
  const auto r = bouchard_fit(CountVector({1, 1}));
  EXPECT_NEAR(r.probs[0], 0.5, 1e-9);
  EXPECT_NEAR(r.f_hat[0], r.f_hat[1], 1e-9);
}

TEST(BouchardFit, SharpensTheDistribution) {
  const CountVector c({30, 12, 25, 8, 40, 19, 22, 15, 9, 20});
  const auto b = bouchard_fit(c);
  const auto e = exact_mle(c);
  EXPECT_GT(b.probs[4], e.probs[4]);  // largest count
  EXPECT_LT(b.probs[3], e.probs[3]);  // smallest count
}

TEST(BoundOrdering, BothBoundsStayBelowTheLikelihood) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 10; ++t) {
    const CountVector c = random_counts(rng, 3 + t, 25);
    const double exact_max = exact_log_likelihood(exact_mle(c).f_hat, c);
    const auto b = bouchard_fit(c);
    EXPECT_LE(ove_objective(ove_fit(c).f_hat, c), exact_max + 1e-9);
    EXPECT_LE(bouchard_objective(b.f_hat, *b.alpha, c), exact_max + 1e-9);
  }
}

TEST(BoundOrdering, TwoClassesFavourOneVsEach) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 10; ++t) {
    const CountVector c = random_counts(rng, 2, 40);
    const auto b = bouchard_fit(c);
    const double ove_max = ove_objective(ove_fit(c).f_hat, c);
    EXPECT_NEAR(ove_max, exact_log_likelihood(exact_mle(c).f_hat, c), 1e-8);
    EXPECT_LT(bouchard_objective(b.f_hat, *b.alpha, c), ove_max);
  }
}

// With uniform counts the per-instance optima are -(K-1) log 2 for
// one-vs-each and -(log(K-1) + K log(K/(K-1))) for Bouchard, which cross
// between K = 4 and K = 5.
TEST(BoundOrdering, UniformCountsCrossOverAtFiveClasses) {
  for (int K : {3, 4, 5, 10}) {
    const CountVector c(std::vector<std::int64_t>(static_cast<std::size_t>(K), 10));
    const double n = 10.0 * K;
    const double ove_max = ove_objective(ove_fit(c).f_hat, c) / n;
    const auto b = bouchard_fit(c);
    const double bou_max = bouchard_objective(b.f_hat, *b.alpha, c) / n;
    EXPECT_NEAR(ove_max, -(K - 1) * std::log(2.0), 1e-9);
    EXPECT_NEAR(bou_max, -(std::log(K - 1.0) + K * std::log(K / (K - 1.0))), 1e-8);
    if (K <= 4) {
      EXPECT_GT(ove_max, bou_max) << K;
    } else {
      EXPECT_LT(ove_max, bou_max) << K;
    }
  }
}

TEST(OveSgd, GradientIsUnbiased) {
  const std::vector<double> f{0.4, -0.2, 1.0, 0.0, -0.7};
  const std::vector<int> batch{0, 2, 2, 4, 1, 3};
  const CountVector c = CountVector::from_labels(batch, 5);
  const auto full = ove_objective_gradient(f, c);
  Rng rng = make_rng(1, RngStream::kClassSampling);
  const int draws = 10000;
  std::vector<double> mean(5, 0.0), sq(5, 0.0);
  for (int d = 0; d < draws; ++d) {
    const auto g = ove_sgd_gradient(f, batch, 2, rng);
    for (int k = 0; k < 5; ++k) {
      mean[k] += g[k];
      sq[k] += g[k] * g[k];
    }
  }
  for (int k = 0; k < 5; ++k) {
    const double m = mean[k] / draws;
    const double se = std::sqrt(std::max(sq[k] / draws - m * m, 0.0) / draws);
    EXPECT_LE(std::abs(m - full[k]), 3 * se + 1e-12) << "class " << k;
  }
}

TEST(OveSgd, FullSamplingIsExact) {
  const std::vector<double> f{0.4, -0.2, 1.0};
  const std::vector<int> batch{0, 2, 1, 1};
  Rng rng = make_rng(1, RngStream::kClassSampling);
  const auto g = ove_sgd_gradient(f, batch, 2, rng);
  const auto full = ove_objective_gradient(f, CountVector::from_labels(batch, 3));
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(g[k], full[k], 1e-12);
}

TEST(OveSgd, TwoClassStreamConverges) {
  std::vector<int> labels;
  for (int i = 0; i < 20000; ++i) labels.push_back(i % 4 == 3 ? 1 : 0);
  TrainConfig cfg;
  cfg.minibatch_size = 50;
  cfg.remaining_classes = 1;
  cfg.epochs = 20;
  cfg.lr0 = 0.01;
  cfg.lr_decay = 0.8;
  cfg.seed = 3;
  const auto r = ove_sgd_fit(labels, 2, cfg);
  EXPECT_NEAR(r.probs[0], 0.75, 0.01);
}

TEST(OveSgd, DeterministicGivenSeed) {
  const auto sample = gen_powerlaw_categorical(50, 5000, 2);
  TrainConfig cfg;
  cfg.minibatch_size = 20;
  cfg.remaining_classes = 3;
  cfg.epochs = 2;
  cfg.lr0 = 0.05;
  cfg.seed = 99;
  const auto a = ove_sgd_fit(sample.labels, 50, cfg);
  const auto b = ove_sgd_fit(sample.labels, 50, cfg);
  EXPECT_EQ(a.f_hat, b.f_hat);
  cfg.seed = 100;
  EXPECT_NE(ove_sgd_fit(sample.labels, 50, cfg).f_hat, a.f_hat);
}

TEST(OveSgd, SingleClassStreamRaisesThatClass) {
  const std::vector<int> labels(200, 2);
  TrainConfig cfg;
  cfg.remaining_classes = 1;
  cfg.lr0 = 0.1;
  const auto r = ove_sgd_fit(labels, 4, cfg);
  for (int k : {0, 1, 3}) EXPECT_GT(r.f_hat[2], r.f_hat[k]);
}

TEST(OveSgd, ConfigErrors) {
  const std::vector<int> labels{0, 1};
  TrainConfig cfg;
  cfg.remaining_classes = 2;
  EXPECT_THROW(ove_sgd_fit(labels, 2, cfg), InvalidArgument);
  cfg.remaining_classes = 1;
  EXPECT_THROW(ove_sgd_fit(std::vector<int>{}, 2, cfg), InvalidArgument);
  EXPECT_THROW(ove_sgd_fit(std::vector<int>{0, 5}, 2, cfg), InvalidArgument);
  cfg.lr0 = 1e6;
  cfg.epochs = 50;
  std::vector<int> many(1000, 0);
  for (std::size_t i = 0; i < many.size(); i += 3) many[i] = 1;
  // Huge steps either stay finite or abort with a diagnostic, never NaN results.
  try {
    const auto r = ove_sgd_fit(many, 2, cfg);
    for (double p : r.probs) EXPECT_TRUE(std::isfinite(p));
  } catch (const NumericalError&) {
  }
}

TEST(Methods, NamesRoundTrip) {
  for (auto m : {EstimationMethod::kExact, EstimationMethod::kOve, EstimationMethod::kOveSgd,
                 EstimationMethod::kBouchard}) {
    EXPECT_EQ(parse_estimation_method(to_string(m)), m);
  }
  EXPECT_EQ(parse_estimation_method("ove_sgd"), EstimationMethod::kOveSgd);
  EXPECT_THROW(parse_estimation_method("softmax"), InvalidArgument);
}
