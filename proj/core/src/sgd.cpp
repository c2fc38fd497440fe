#include "ove/sgd.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>

#include "ove/bounds.hpp"
#include "ove/errors.hpp"

namespace ove {

void TrainConfig::validate() const {
  if (minibatch_size < 1) throw InvalidArgument("minibatch size must be >= 1");
  if (remaining_classes < 1) throw InvalidArgument("remaining-class sample size must be >= 1");
  if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
  if (!(lr0 > 0.0) || !std::isfinite(lr0)) throw InvalidArgument("lr0 must be positive");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw InvalidArgument("lr_decay must lie in (0, 1]");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be >= 0");
  if (log_interval < 1) throw InvalidArgument("log interval must be >= 1");
}

void TrainConfig::validate_for(int num_classes) const {
  validate();
  if (remaining_classes > num_classes - 1) {
    throw InvalidArgument("remaining-class sample size S=" + std::to_string(remaining_classes) +
                          " exceeds K-1=" + std::to_string(num_classes - 1));
  }
}

std::vector<double> TrainTrace::bound_values() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.bound_estimate);
  return out;
}

void TrainTrace::write_csv(std::ostream& out, bool include_timing) const {
  out << (include_timing ? "iteration,raw_bound_estimate,lr,epoch,elapsed_ms\n"
                         : "iteration,raw_bound_estimate,lr,epoch\n");
  char buf[160];
  for (const auto& r : rows) {
    if (include_timing) {
      std::snprintf(buf, sizeof(buf), "%ld,%.17g,%.17g,%d,%.3f\n", r.iteration, r.bound_estimate,
                    r.lr, r.epoch, r.elapsed_ms);
    } else {
      std::snprintf(buf, sizeof(buf), "%ld,%.17g,%.17g,%d\n", r.iteration, r.bound_estimate, r.lr,
                    r.epoch);
    }
    out << buf;
  }
}

SparseDelta stochastic_gradient(const LinearModel& model, const SparseDataset& data,
                                std::span<const std::size_t> batch, int remaining_classes,
                                Rng& rng) {
  if (batch.empty()) throw InvalidArgument("stochastic_gradient: empty batch");
  const int K = model.num_classes();
  if (K != data.num_classes()) throw InvalidArgument("stochastic_gradient: K mismatch");
  const double scale = static_cast<double>(K - 1) / remaining_classes;
  auto score = [&](int k, SparseRowView x) {
    const auto w = model.row(k);
    double s = model.bias(k);
    for (std::size_t i = 0; i < x.nnz(); ++i) s += w[x.indices[i]] * x.values[i];
    return s;
  };
  auto add = [](RowDelta& row, SparseRowView x, double c) {
    for (std::size_t i = 0; i < x.nnz(); ++i) row.weights[x.indices[i]] += c * x.values[i];
    row.bias += c;
  };

  SparseDelta delta;
  std::vector<int> sampled;
  double bound = 0.0;
  for (std::size_t n : batch) {
    if (n >= data.size()) throw InvalidArgument("stochastic_gradient: row out of range");
    const auto x = data.row(n);
    if (x.nnz() > 0 && x.indices.back() >= model.num_features()) {
      throw InvalidArgument("stochastic_gradient: feature index out of range");
    }
    const int y = data.label(n);
    sample_remaining_into(K, y, remaining_classes, rng, sampled);
    const double sy = score(y, x);
    for (int m : sampled) {
      const double d = sy - score(m, x);
      const double w = scale * sigmoid(-d);
      bound += scale * log_sigmoid(d);
      add(delta.rows[y], x, w);
      add(delta.rows[m], x, -w);
    }
  }
  delta.bound_estimate = bound / static_cast<double>(batch.size());
  return delta;
}

namespace {

// Weights stored as w_k = scale_k · exp(L − row_log_k) · v_k, where L is the
// running sum of log decay factors. Decaying every row is then O(1): only L
// moves, and a row's scale is brought up to date when it is next touched.
class LazyModel {
 public:
  explicit LazyModel(LinearModel&& m)
      : model_(std::move(m)),
        K_(model_.num_classes()),
        D_(model_.num_features()),
        v_(model_.weights().data()),
        bias_(model_.biases().data()),
        scale_(static_cast<std::size_t>(K_), 1.0),
        row_log_(static_cast<std::size_t>(K_), 0.0),
        vsq_(static_cast<std::size_t>(K_), 0.0) {
    recompute_norms();
  }

  void sync(int k) {
    const auto i = static_cast<std::size_t>(k);
    if (row_log_[i] == log_decay_) return;
    total_ -= contribution(i);
    scale_[i] *= std::exp(log_decay_ - row_log_[i]);
    row_log_[i] = log_decay_;
    if (scale_[i] < 1e-100) renormalize(i);
    total_ += contribution(i);
  }

  // Requires sync(k) at the current decay level.
  double score(int k, SparseRowView x) const {
    const auto i = static_cast<std::size_t>(k);
    const double* v = v_ + i * D_;
    double s = 0.0;
    for (std::size_t j = 0; j < x.nnz(); ++j) s += v[x.indices[j]] * x.values[j];
    return bias_[i] + scale_[i] * s;
  }

  void decay(double factor) {
    log_decay_ += std::log(factor);
    if (log_decay_ < -30.0) rebase();
  }

  // w_k += amount · x, bias_k += amount. Requires sync(k).
  bool add(int k, SparseRowView x, double amount) {
    const auto i = static_cast<std::size_t>(k);
    total_ -= contribution(i);
    double* v = v_ + i * D_;
    const double step = amount / scale_[i];
    double sq = vsq_[i];
    bool finite = true;
    for (std::size_t j = 0; j < x.nnz(); ++j) {
      double& slot = v[x.indices[j]];
      const double old = slot;
      slot += step * x.values[j];
      sq += slot * slot - old * old;
      finite = finite && std::isfinite(slot);
    }
    vsq_[i] = std::max(sq, 0.0);
    bias_[i] += amount;
    total_ += contribution(i);
    return finite && std::isfinite(bias_[i]);
  }

  double weight_squared_norm() const { return std::exp(2.0 * log_decay_) * total_; }

  void recompute_norms() {
    total_ = 0.0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(K_); ++i) {
      const double* v = v_ + i * D_;
      double sq = 0.0;
      for (std::size_t j = 0; j < D_; ++j) sq += v[j] * v[j];
      vsq_[i] = sq;
      total_ += contribution(i);
    }
  }

  // Folds the pending scales into the weights and hands the model back.
  LinearModel release() && {
    for (std::size_t i = 0; i < static_cast<std::size_t>(K_); ++i) {
      const double s = scale_[i] * std::exp(log_decay_ - row_log_[i]);
      if (s == 1.0) continue;
      double* v = v_ + i * D_;
      for (std::size_t j = 0; j < D_; ++j) v[j] *= s;
    }
    return std::move(model_);
  }

 private:
  double contribution(std::size_t i) const {
    const double s = scale_[i] * std::exp(-row_log_[i]);
    return s * s * vsq_[i];
  }

  void renormalize(std::size_t i) {
    double* v = v_ + i * D_;
    double sq = 0.0;
    for (std::size_t j = 0; j < D_; ++j) {
      v[j] *= scale_[i];
      sq += v[j] * v[j];
    }
    vsq_[i] = sq;
    scale_[i] = 1.0;
  }

  void rebase() {
    for (std::size_t i = 0; i < static_cast<std::size_t>(K_); ++i) {
      scale_[i] *= std::exp(log_decay_ - row_log_[i]);
      row_log_[i] = 0.0;
      if (scale_[i] < 1e-100) renormalize(i);
    }
    log_decay_ = 0.0;
    total_ = 0.0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(K_); ++i) total_ += contribution(i);
  }

  LinearModel model_;
  int K_;
  std::size_t D_;
  double* v_;
  double* bias_;
  std::vector<double> scale_;
  std::vector<double> row_log_;
  std::vector<double> vsq_;
  double log_decay_ = 0.0;
  double total_ = 0.0;  // Σ_k (scale_k e^{−row_log_k})² ‖v_k‖²
};

struct Term {
  int row;
  std::size_t instance;
  double coef;
};

}  // namespace

TrainResult train(LinearModel model, const SparseDataset& data, const TrainConfig& cfg,
                  const StepObserver& observer) {
  if (data.empty()) throw InvalidArgument("train: empty dataset");
  const int K = data.num_classes();
  cfg.validate_for(K);
  if (model.num_classes() != K || model.num_features() < data.num_features()) {
    throw InvalidArgument("train: model shape does not match the dataset");
  }
  if (cfg.objective == ObjectiveKind::kBouchard) {
    throw InvalidArgument(
        "train: Bouchard's bound needs per-instance alphas; use the full-batch fitter");
  }
  if (!model.all_finite()) throw InvalidArgument("train: initial model has non-finite parameters");

  const std::size_t n_rows = data.size();
  const double inv_n = 1.0 / static_cast<double>(n_rows);
  const int S = cfg.remaining_classes;
  const double pair_scale = static_cast<double>(K - 1) / S;
  const bool sampled_ove = cfg.objective == ObjectiveKind::kOve;
  // Pair terms enter the step unscaled, so the penalty shrinks by the same S/(K−1).
  const double step_scale = sampled_ove ? 1.0 / pair_scale : 1.0;

  Rng shuffle_rng = make_rng(cfg.seed, RngStream::kDataShuffle);
  Rng class_rng = make_rng(cfg.seed, RngStream::kClassSampling);
  LazyModel lazy(std::move(model));

  TrainResult result;
  std::vector<std::size_t> order(n_rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Term> terms;
  std::vector<int> sampled;
  std::vector<int> sampled_all;
  std::vector<int> batch_labels;
  std::vector<int> written;
  std::vector<char> is_written(static_cast<std::size_t>(K), 0);
  std::vector<double> scores(static_cast<std::size_t>(K));
  const auto t0 = std::chrono::steady_clock::now();

  long iteration = 0;
  double lr = cfg.lr0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < n_rows; start += static_cast<std::size_t>(cfg.minibatch_size)) {
      const std::size_t stop = std::min(n_rows, start + static_cast<std::size_t>(cfg.minibatch_size));
      const auto batch_size = static_cast<double>(stop - start);
      terms.clear();
      sampled_all.clear();
      batch_labels.clear();
      double bound = 0.0;

      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t n = order[b];
        const auto x = data.row(n);
        const int y = data.label(n);
        batch_labels.push_back(y);
        if (sampled_ove) {
          sample_remaining_into(K, y, S, class_rng, sampled);
          sampled_all.insert(sampled_all.end(), sampled.begin(), sampled.end());
          lazy.sync(y);
          const double sy = lazy.score(y, x);
          for (int m : sampled) {
            lazy.sync(m);
            const double d = sy - lazy.score(m, x);
            const double w = sigmoid(-d);  // lr is per sampled pair term
            bound += pair_scale * log_sigmoid(d);
            terms.push_back({y, n, w});
            terms.push_back({m, n, -w});
          }
        } else {
          for (int k = 0; k < K; ++k) {
            lazy.sync(k);
            scores[static_cast<std::size_t>(k)] = lazy.score(k, x);
          }
          const double lse = log_sum_exp(scores);
          bound += scores[static_cast<std::size_t>(y)] - lse;
          for (int k = 0; k < K; ++k) {
            const double c = (k == y ? 1.0 : 0.0) - std::exp(scores[static_cast<std::size_t>(k)] - lse);
            terms.push_back({k, n, c});
          }
        }
      }

      const double estimate =
          bound / batch_size - 0.5 * cfg.lambda * lazy.weight_squared_norm() * inv_n;
      if (!std::isfinite(estimate)) {
        throw NumericalError("train: bound estimate became non-finite at iteration " +
                             std::to_string(iteration) + " (epoch " + std::to_string(epoch) +
                             ", lr " + std::to_string(lr) + ")");
      }
      if (iteration % cfg.log_interval == 0) {
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        result.trace.rows.push_back({iteration, estimate, lr, epoch, ms});
      }

      // w ← (1 − c·lr·λ·b/N)·w + c·lr·Σ_batch ĝ_n with c = step_scale, decay applied lazily.
      if (cfg.lambda > 0.0) {
        const double factor = 1.0 - lr * step_scale * cfg.lambda * batch_size * inv_n;
        if (!(factor > 0.0)) {
          throw InvalidArgument("train: learning rate too large for lambda: the L2 decay factor is non-positive");
        }
        lazy.decay(factor);
      }
      bool finite = true;
      for (const Term& t : terms) {
        if (t.coef == 0.0) continue;
        lazy.sync(t.row);
        finite = lazy.add(t.row, data.row(t.instance), lr * t.coef) && finite;
        if (!is_written[static_cast<std::size_t>(t.row)]) {
          is_written[static_cast<std::size_t>(t.row)] = 1;
          written.push_back(t.row);
        }
      }
      if (!finite) {
        throw NumericalError("train: non-finite parameter after update at iteration " +
                             std::to_string(iteration) + " (epoch " + std::to_string(epoch) +
                             ", lr " + std::to_string(lr) + ")");
      }
      result.stats.row_writes += static_cast<long>(written.size());
      result.stats.max_rows_per_step =
          std::max(result.stats.max_rows_per_step, static_cast<int>(written.size()));
      if (observer) observer(StepRecord{iteration, batch_labels, sampled_all, written});
      for (int r : written) is_written[static_cast<std::size_t>(r)] = 0;
      written.clear();
      ++iteration;
    }
    lazy.recompute_norms();
    lr *= cfg.lr_decay;
  }
  result.stats.steps = iteration;
  result.model = std::move(lazy).release();
  return result;
}

}  // namespace ove
