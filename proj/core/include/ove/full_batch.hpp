#pragma once

#include <vector>

#include "ove/linear_model.hpp"
#include "ove/nonparam.hpp"
#include "ove/objective_kind.hpp"
#include "ove/sparse.hpp"

namespace ove {

struct FullBatchFitOptions {
  int max_iterations = 5000;
  double gradient_tolerance = 1e-6;  // on ‖∇F‖∞ / N, the mean per-instance gradient
  int lbfgs_rank = 20;
};

struct FullBatchFit {
  LinearModel model;
  std::vector<double> alphas;  // Bouchard only
  double objective = 0.0;      // maximized (regularized) objective value
  double gradient_inf_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<TracePoint> trace;  // objective value per L-BFGS iteration
};

/// Deterministic full-batch maximization of the chosen objective with
/// L-BFGS. For Bouchard's bound every evaluation first re-solves all α_n
/// exactly, so the optimizer works on max_α F(w, α).
FullBatchFit fit_full_batch(const SparseDataset& data, ObjectiveKind kind, double lambda,
                            const FullBatchFitOptions& options = {},
                            const LinearModel* init = nullptr);

}  // namespace ove
