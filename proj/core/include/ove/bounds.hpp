#pragma once

// Scalar kernels for the softmax, its one-vs-each lower bound, the
// hierarchical (partition) family of bounds and Bouchard's log-sum-exp bound.
// Everything is evaluated in log space; class indices are 0-based.
//
// The span-taking kernels assume finite scores; ScoreVector is the checked
// entry point for untrusted input.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace ove {

/// K >= 2 finite log-scores.
class ScoreVector {
 public:
  explicit ScoreVector(std::vector<double> scores);
  ScoreVector(std::initializer_list<double> scores) : ScoreVector(std::vector<double>(scores)) {}

  std::size_t size() const noexcept { return scores_.size(); }
  double operator[](std::size_t k) const noexcept { return scores_[k]; }
  std::span<const double> view() const noexcept { return scores_; }
  operator std::span<const double>() const noexcept { return scores_; }
  const std::vector<double>& values() const noexcept { return scores_; }

 private:
  std::vector<double> scores_;
};

/// log(1 + e^z) without overflow.
inline double softplus(double z) noexcept {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

/// log σ(z) = -log(1 + e^{-z}), two-branch form.
inline double log_sigmoid(double z) noexcept {
  return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

inline double sigmoid(double z) noexcept {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_sum_exp(std::span<const double> f);

/// Exact softmax probability of class k.
double softmax_prob(std::span<const double> f, std::size_t k);
double log_softmax_prob(std::span<const double> f, std::size_t k);
std::vector<double> softmax(std::span<const double> f);

/// Σ_{m≠k} log σ(f_k − f_m); never exceeds log softmax_prob(f, k).
double ove_log_bound(std::span<const double> f, std::size_t k);

/// Target class plus a partition of the remaining classes into disjoint,
/// non-empty blocks.
class LabelPartition {
 public:
  /// Validates that the blocks partition {0..num_classes-1} \ {target}.
  LabelPartition(std::size_t num_classes, std::size_t target,
                 std::vector<std::vector<std::size_t>> blocks);

  /// One block per remaining class: reproduces the one-vs-each bound.
  static LabelPartition singletons(std::size_t num_classes, std::size_t target);
  /// A single block holding every remaining class: the exact probability.
  static LabelPartition single_block(std::size_t num_classes, std::size_t target);

  /// Partition obtained by merging blocks i and j (i != j).
  LabelPartition merged(std::size_t i, std::size_t j) const;

  std::size_t num_classes() const noexcept { return num_classes_; }
  std::size_t target() const noexcept { return target_; }
  const std::vector<std::vector<std::size_t>>& blocks() const noexcept { return blocks_; }

 private:
  std::size_t num_classes_;
  std::size_t target_;
  std::vector<std::vector<std::size_t>> blocks_;
};

/// Σ_B log[e^{f_k} / (e^{f_k} + Σ_{m∈B} e^{f_m})] over the blocks of p.
double hierarchical_log_bound(std::span<const double> f, const LabelPartition& p);

/// α + Σ_m log(1 + e^{f_m − α}); an upper bound on log_sum_exp(f) for any α.
double bouchard_lse_upper(std::span<const double> f, double alpha);

/// (f_k − α) − Σ_m log(1 + e^{f_m − α}); a lower bound on log p(y = k).
double bouchard_log_bound(std::span<const double> f, std::size_t k, double alpha);

struct AlphaSolverOptions {
  int max_iterations = 200;
  double tolerance = 1e-10;  // on |Σ_m σ(f_m − α) − 1|
};

/// Minimizer of bouchard_lse_upper(f, ·). Solves Σ_m σ(f_m − α) = 1 by
/// Newton steps safeguarded by a bisection bracket
/// [min f − log K, max f + log K]. Throws NumericalError past the cap.
double optimize_alpha(std::span<const double> f, const AlphaSolverOptions& options = {});

}  // namespace ove
