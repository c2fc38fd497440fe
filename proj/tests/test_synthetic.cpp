#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "ove/data_io.hpp"
#include "ove/synthetic.hpp"

using namespace ove;

TEST(Toy, EqualClassesAndDeterministic) {
  const auto d = gen_toy_5class(200, 9);
  EXPECT_EQ(d.num_classes(), 5);
  EXPECT_EQ(d.num_features(), 2u);
  std::vector<int> counts(5, 0);
  for (std::size_t n = 0; n < d.size(); ++n) ++counts[static_cast<std::size_t>(d.label(n))];
  for (int c : counts) EXPECT_EQ(c, 40);
  std::ostringstream a, b;
  write_sparse(d, a);
  write_sparse(gen_toy_5class(200, 9), b);
  EXPECT_EQ(a.str(), b.str());
  std::ostringstream c;
  write_sparse(gen_toy_5class(200, 10), c);
  EXPECT_NE(a.str(), c.str());
}

TEST(Toy, ClustersSitOnTheCircle) {
  const auto d = gen_toy_5class(5000, 2);
  std::vector<double> sx(5, 0.0), sy(5, 0.0), n(5, 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto k = static_cast<std::size_t>(d.label(i));
    const auto x = d.row(i);
    for (std::size_t j = 0; j < x.nnz(); ++j) (x.indices[j] == 0 ? sx : sy)[k] += x.values[j];
    n[k] += 1;
  }
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_NEAR(std::hypot(sx[k] / n[k], sy[k] / n[k]), 3.0, 0.15);
  }
}

TEST(Powerlaw, ProbabilitiesAndFrequencies) {
  const long N = 1000000;
  const auto s = gen_powerlaw_categorical(50, N, 4);
  EXPECT_NEAR(std::accumulate(s.true_probs.begin(), s.true_probs.end(), 0.0), 1.0, 1e-12);
  ASSERT_EQ(s.labels.size(), static_cast<std::size_t>(N));
  std::vector<long> counts(50, 0);
  for (int y : s.labels) ++counts[static_cast<std::size_t>(y)];
  for (std::size_t k = 0; k < 50; ++k) {
    const double p = s.true_probs[k];
    EXPECT_NEAR(static_cast<double>(counts[k]) / N, p, 3 * std::sqrt(p * (1 - p) / N) + 1e-12) << k;
  }
  const auto again = gen_powerlaw_categorical(50, N, 4);
  EXPECT_EQ(again.labels, s.labels);
  EXPECT_EQ(again.true_probs, s.true_probs);
}

TEST(SparseSynth, ShapeAndDeterminism) {
  const SparseSynthConfig cfg{.num_classes = 40, .num_features = 500, .num_rows = 2000, .nnz_per_row = 10,
                              .features_per_class = 8, .seed = 6};
  const auto d = gen_sparse_classification(cfg);
  EXPECT_EQ(d.size(), 2000u);
  EXPECT_EQ(d.num_classes(), 40);
  EXPECT_EQ(d.num_features(), 500u);
  std::vector<int> counts(40, 0);
  for (std::size_t n = 0; n < d.size(); ++n) {
    EXPECT_EQ(d.row(n).nnz(), 10u);
    for (double v : d.row(n).values) EXPECT_TRUE(v >= 0.5 && v <= 1.5);
    ++counts[static_cast<std::size_t>(d.label(n))];
  }
  EXPECT_GT(counts[0], 5 * counts[39] + 1);
  std::ostringstream a, b;
  write_sparse(d, a);
  write_sparse(gen_sparse_classification(cfg), b);
  EXPECT_EQ(a.str(), b.str());
}
