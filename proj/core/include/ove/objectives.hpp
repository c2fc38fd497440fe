#pragma once

// Regularized training objectives of the linear multiclass model: exact
// softmax log likelihood, its one-vs-each lower bound and Bouchard's lower
// bound with per-instance variational parameters. All penalties are
// −½λ‖w‖² on weights only.

#include <span>
#include <vector>

#include "ove/linear_model.hpp"
#include "ove/objective_kind.hpp"
#include "ove/sparse.hpp"

namespace ove {

struct Objective {
  ObjectiveKind kind = ObjectiveKind::kOve;
  double lambda = 0.0;
  /// One α_n per training instance; required iff kind == kBouchard.
  std::vector<double> alphas;

  void validate(const SparseDataset& data) const;
};

double exact_loglik(const LinearModel& model, const SparseDataset& data, double lambda);
double ove_loglik(const LinearModel& model, const SparseDataset& data, double lambda);
double bouchard_loglik(const LinearModel& model, const SparseDataset& data,
                       std::span<const double> alphas, double lambda);

double objective_value(const LinearModel& model, const SparseDataset& data, const Objective& obj);

struct ValueAndGradient {
  double value = 0.0;
  LinearModel gradient;  // same shape as the model
};

/// Objective value and its exact gradient in one pass over the data. Work is
/// split into a fixed number of shards reduced in order, so the result does
/// not depend on the thread count (OVE_NUM_THREADS).
ValueAndGradient evaluate(const LinearModel& model, const SparseDataset& data, const Objective& obj);

LinearModel full_gradient(const LinearModel& model, const SparseDataset& data, const Objective& obj);

/// Per-instance α_n maximizing Bouchard's bound for the current model.
std::vector<double> optimize_alphas(const LinearModel& model, const SparseDataset& data);

/// Threads used by evaluate(); reads OVE_NUM_THREADS, defaults to the
/// hardware concurrency.
int evaluation_threads();

}  // namespace ove
