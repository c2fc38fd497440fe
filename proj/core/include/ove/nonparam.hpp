#pragma once

// Estimation of categorical probabilities without covariates: exact maximum
// likelihood, the one-vs-each surrogate, Bouchard's surrogate, and the doubly
// stochastic one-vs-each estimator.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ove/sampling.hpp"
#include "ove/train_config.hpp"

namespace ove {

/// Per-class observation counts N_k (K >= 2, N >= 1).
class CountVector {
 public:
  explicit CountVector(std::vector<std::int64_t> counts);
  static CountVector from_labels(std::span<const int> labels, int num_classes);

  std::size_t size() const noexcept { return counts_.size(); }
  std::int64_t operator[](std::size_t k) const noexcept { return counts_[k]; }
  std::int64_t total() const noexcept { return total_; }
  const std::vector<std::int64_t>& values() const noexcept { return counts_; }
  /// Indices with N_k > 0.
  std::vector<std::size_t> active_classes() const;

 private:
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

enum class EstimationMethod { kExact, kOve, kOveSgd, kBouchard };

std::string_view to_string(EstimationMethod method);
/// "exact", "ove", "ove-sgd" (or "ove_sgd"), "bouchard".
EstimationMethod parse_estimation_method(std::string_view name);

struct TracePoint {
  long iteration = 0;
  double value = 0.0;
};

struct EstimationResult {
  EstimationMethod method = EstimationMethod::kExact;
  /// Gauge-fixed scores (Σ over active classes = 0). Excluded zero-count
  /// classes carry -inf and are never used in arithmetic.
  std::vector<double> f_hat;
  /// softmax(f_hat); excluded classes get exactly 0.
  std::vector<double> probs;
  std::vector<TracePoint> trace;
  std::optional<double> alpha;  // Bouchard's shared variational parameter
  long iterations = 0;

  nlohmann::json to_json() const;
};

struct FullBatchOptions {
  int max_iterations = 200000;
  double gradient_tolerance = 1e-8;  // on the ∞-norm
  double initial_step = 1e-2;
  double armijo = 1e-4;
};

/// f_k = log N_k (gauge-fixed); probs_k = N_k / N.
EstimationResult exact_mle(const CountVector& counts);

/// Σ_k N_k log p_k for scores f.
double exact_log_likelihood(std::span<const double> f, const CountVector& counts);

/// Σ_k N_k Σ_{m≠k} log σ(f_k − f_m).
double ove_objective(std::span<const double> f, const CountVector& counts);
/// Same value summed as Σ_{k>m} log P(f_k, f_m) over the K(K−1)/2 pairs.
double ove_objective_pairwise(std::span<const double> f, const CountVector& counts);
std::vector<double> ove_objective_gradient(std::span<const double> f, const CountVector& counts);

/// Σ_k N_k (f_k − α) − N Σ_m log(1 + e^{f_m − α}).
double bouchard_objective(std::span<const double> f, double alpha, const CountVector& counts);

/// Full-batch gradient ascent on the one-vs-each objective, starting at f = 0.
EstimationResult ove_fit(const CountVector& counts, const FullBatchOptions& options = {});

/// Gradient ascent on f with α re-solved exactly (shared α) after every step.
EstimationResult bouchard_fit(const CountVector& counts, const FullBatchOptions& options = {});

/// Doubly stochastic one-vs-each gradient for a batch of labels: for every
/// label S remaining classes are drawn and each pairwise term is scaled by
/// (K−1)/S. Its expectation is ove_objective_gradient of the batch counts.
std::vector<double> ove_sgd_gradient(std::span<const double> f, std::span<const int> batch,
                                     int remaining_classes, Rng& rng);

/// Doubly stochastic estimator over a label stream (0-based labels). Uses
/// minibatch_size, remaining_classes, epochs, lr0, lr_decay, seed and
/// log_interval from cfg. Each step adds lr times the minibatch sum of the
/// sampled pair gradients, i.e. the unbiased estimate times S/(K−1); with
/// S = K−1 this is plain minibatch gradient ascent. When `reference` is given the trace holds the L1
/// distance between softmax(f) and it; otherwise the per-instance minibatch
/// bound estimate.
EstimationResult ove_sgd_fit(std::span<const int> labels, int num_classes, const TrainConfig& cfg,
                             std::optional<std::span<const double>> reference = std::nullopt);

}  // namespace ove
