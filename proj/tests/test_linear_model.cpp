#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "ove/errors.hpp"
#include "ove/linear_model.hpp"
#include "ove/sparse.hpp"

using namespace ove;

TEST(SparseVector, Validation) {
  EXPECT_NO_THROW(SparseVector({0, 3, 7}, {1.0, -2.0, 0.5}));
  EXPECT_THROW(SparseVector({0, 3}, {1.0}), InvalidArgument);
  EXPECT_THROW(SparseVector({3, 3}, {1.0, 2.0}), InvalidArgument);
  EXPECT_THROW(SparseVector({4, 3}, {1.0, 2.0}), InvalidArgument);
  EXPECT_THROW(SparseVector({1}, {0.0}), InvalidArgument);
  EXPECT_THROW(SparseVector({1}, {std::nan("")}), InvalidArgument);
}

TEST(SparseVector, FromDenseDropsZeros) {
  const std::vector<double> dense{0.0, 1.5, 0.0, -2.0};
  const auto v = SparseVector::from_dense(dense);
  EXPECT_EQ(v.indices(), (std::vector<FeatureIndex>{1, 3}));
  EXPECT_EQ(v.values(), (std::vector<double>{1.5, -2.0}));
}

TEST(SparseDataset, RowsLabelsAndBounds) {
  SparseDataset d(5, 3, "d");
  d.add_row(SparseVector({0, 4}, {1.0, 2.0}), 2);
  d.add_row(SparseVector(), 0);
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.nnz(), 2u);
  EXPECT_EQ(d.row(0).nnz(), 2u);
  EXPECT_EQ(d.row(1).nnz(), 0u);
  EXPECT_EQ(d.label(0), 2);
  EXPECT_THROW(d.add_row(SparseVector({5}, {1.0}), 0), InvalidArgument);
  EXPECT_THROW(d.add_row(SparseVector(), 3), InvalidArgument);
  EXPECT_THROW(d.add_row(SparseVector(), -1), InvalidArgument);
  EXPECT_THROW(SparseDataset(3, 1), InvalidArgument);
}

TEST(SparseDataset, ReshapeAndSubset) {
  SparseDataset d(3, 2);
  d.add_row(SparseVector({2}, {1.0}), 1);
  d.add_row(SparseVector({0}, {3.0}), 0);
  d.reshape(10, 4);
  EXPECT_EQ(d.num_features(), 10u);
  EXPECT_EQ(d.num_classes(), 4);
  EXPECT_THROW(d.reshape(2, 4), InvalidArgument);
  EXPECT_THROW(d.reshape(10, 1), InvalidArgument);
  const std::vector<std::size_t> rows{1};
  const auto s = d.subset(rows);
  EXPECT_EQ(s.size(), 1u);
  EXPECT_EQ(s.label(0), 0);
  EXPECT_EQ(s.row(0).values[0], 3.0);
}

TEST(LinearModel, LayoutAndScores) {
  LinearModel m(3, 2);
  EXPECT_EQ(m.num_parameters(), 9u);
  m.weight(0, 0) = 1.0;
  m.weight(1, 1) = 2.0;
  m.weight(2, 0) = -1.0;
  m.bias(2) = 0.5;
  EXPECT_EQ(m.parameters()[1 * 2 + 1], 2.0);
  EXPECT_EQ(m.parameters()[6 + 2], 0.5);
  const SparseVector x({0, 1}, {2.0, 3.0});
  EXPECT_EQ(m.scores(x.view()), (std::vector<double>{2.0, 6.0, -1.5}));
  EXPECT_EQ(predict(m, x.view()), 1);
  EXPECT_DOUBLE_EQ(m.weight_squared_norm(), 1.0 + 4.0 + 1.0);
  EXPECT_THROW(m.scores(SparseVector({2}, {1.0}).view()), InvalidArgument);
}

TEST(LinearModel, TiesGoToLowestClassAndProbabilitiesNormalize) {
  LinearModel m(4, 1);
  const SparseVector x({0}, {1.0});
  EXPECT_EQ(predict(m, x.view()), 0);
  const auto p = predict_proba(m, x.view());
  for (double v : p) EXPECT_DOUBLE_EQ(v, 0.25);
  m.bias(3) = 800.0;
  const auto q = predict_proba(m, x.view());
  EXPECT_NEAR(q[3], 1.0, 1e-15);
  EXPECT_NEAR(std::accumulate(q.begin(), q.end(), 0.0), 1.0, 1e-15);
}

TEST(LinearModel, ShapeChecks) {
  EXPECT_THROW(LinearModel(1, 3), InvalidArgument);
  EXPECT_THROW(LinearModel(2, 2, std::vector<double>(3), std::vector<double>(2)), InvalidArgument);
  LinearModel m(2, 2);
  EXPECT_TRUE(m.all_finite());
  m.bias(0) = std::numeric_limits<double>::infinity();
  EXPECT_FALSE(m.all_finite());
}
