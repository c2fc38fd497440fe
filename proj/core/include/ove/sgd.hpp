#pragma once

// Doubly stochastic training of the linear model: minibatches over instances
// crossed with uniform subsampling of the remaining classes, sparse row
// updates and lazily applied L2 decay.

#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "ove/linear_model.hpp"
#include "ove/sampling.hpp"
#include "ove/sparse.hpp"
#include "ove/train_config.hpp"

namespace ove {

struct RowDelta {
  std::map<FeatureIndex, double> weights;
  double bias = 0.0;
};

/// Data-term gradient of a minibatch restricted to the rows it touches.
struct SparseDelta {
  std::map<int, RowDelta> rows;
  /// Per-instance unbiased estimate of the batch's one-vs-each bound.
  double bound_estimate = 0.0;
};

/// One doubly stochastic gradient of the one-vs-each bound (no penalty term).
/// Each instance draws S remaining classes and every sampled pair is scaled by
/// (K−1)/S, so the expectation equals full_gradient over the batch with λ = 0.
SparseDelta stochastic_gradient(const LinearModel& model, const SparseDataset& data,
                                std::span<const std::size_t> batch, int remaining_classes,
                                Rng& rng);

struct TraceRow {
  long iteration = 0;
  double bound_estimate = 0.0;  // per instance, includes −λ‖w‖²/(2N)
  double lr = 0.0;
  int epoch = 0;
  double elapsed_ms = 0.0;
};

struct TrainTrace {
  std::vector<TraceRow> rows;

  std::vector<double> bound_values() const;
  /// CSV with header iteration,raw_bound_estimate,lr,epoch,elapsed_ms.
  void write_csv(std::ostream& out, bool include_timing = true) const;
};

/// What one update step touched, for instrumentation.
struct StepRecord {
  long iteration = 0;
  std::span<const int> batch_labels;
  std::span<const int> sampled_classes;  // all instances of the batch, concatenated
  std::span<const int> written_rows;     // rows whose parameters changed
};

struct TrainStats {
  long steps = 0;
  long row_writes = 0;
  int max_rows_per_step = 0;
};

struct TrainResult {
  LinearModel model;
  TrainTrace trace;
  TrainStats stats;
};

using StepObserver = std::function<void(const StepRecord&)>;

/// Runs cfg.epochs epochs of shuffled minibatches with lr = lr0·decay^epoch.
/// One-vs-each steps add lr times the minibatch sum of sampled pair
/// gradients (the unbiased estimate times S/(K−1)); the traced bound estimate
/// keeps the (K−1)/S scaling. L2 decay is applied lazily to untouched rows.
/// Deterministic given cfg.seed. Throws InvalidArgument for a bad config and
/// NumericalError when a parameter or the bound estimate stops being finite.
TrainResult train(LinearModel model, const SparseDataset& data, const TrainConfig& cfg,
                  const StepObserver& observer = {});

}  // namespace ove
