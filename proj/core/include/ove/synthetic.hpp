#pragma once

#include <cstdint>
#include <vector>

#include "ove/sparse.hpp"

namespace ove {

/// Five 2-D unit-covariance Gaussian clusters with means on a circle of
/// radius 3, equal class proportions (the first n mod 5 classes get one
/// extra point). Rows are grouped by class.
SparseDataset gen_toy_5class(int n, std::uint64_t seed);

struct CategoricalSample {
  std::vector<int> labels;         // 0-based
  std::vector<double> true_probs;  // p(k) ∝ u_k², u_k ~ U[0,1]
};

CategoricalSample gen_powerlaw_categorical(int num_classes, long num_samples, std::uint64_t seed);

struct SparseSynthConfig {
  int num_classes = 3000;
  std::size_t num_features = 50000;
  std::size_t num_rows = 100000;
  int nnz_per_row = 20;
  int features_per_class = 40;  // signature pool each class draws most features from
  double signal_fraction = 0.7; // share of a row's features taken from its class pool
  double label_skew = 1.0;      // Zipf exponent of the class frequencies
  std::uint64_t seed = 0;
};

/// Imbalanced sparse multiclass data: Zipf-distributed labels, rows mixing
/// class-specific and background features, positive values.
SparseDataset gen_sparse_classification(const SparseSynthConfig& cfg);

}  // namespace ove
