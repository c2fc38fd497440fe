#include "ove/nonparam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ove/bounds.hpp"
#include "ove/errors.hpp"

namespace ove {

namespace {

constexpr double kExcluded = -std::numeric_limits<double>::infinity();

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void center(std::vector<double>& f) {
  const double mean = std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());
  for (double& v : f) v -= mean;
}

// Counts restricted to the classes that were observed at least once.
CountVector active_counts(const CountVector& counts, const std::vector<std::size_t>& active) {
  std::vector<std::int64_t> sub;
  sub.reserve(active.size());
  for (std::size_t k : active) sub.push_back(counts[k]);
  return CountVector(std::move(sub));
}

// Expands scores over the active classes back to all K classes.
EstimationResult expand(EstimationMethod method, const CountVector& counts,
                        const std::vector<std::size_t>& active, std::vector<double> f_active) {
  EstimationResult r;
  r.method = method;
  r.f_hat.assign(counts.size(), kExcluded);
  r.probs.assign(counts.size(), 0.0);
  if (f_active.size() == 1) {
    r.f_hat[active[0]] = 0.0;
    r.probs[active[0]] = 1.0;
    return r;
  }
  const std::vector<double> p = softmax(f_active);
  for (std::size_t i = 0; i < active.size(); ++i) {
    r.f_hat[active[i]] = f_active[i];
    r.probs[active[i]] = p[i];
  }
  return r;
}

struct AscentOutcome {
  std::vector<double> x;
  long iterations = 0;
  std::vector<TracePoint> trace;
};

// Gradient ascent with a doubling/halving step. A trial step is accepted when
// the Armijo condition holds or, once differences in the objective drown in
// rounding, when the directional derivative at the trial point is still
// non-negative (for a concave objective that also certifies an ascent).
template <class ValueFn, class GradFn>
AscentOutcome gradient_ascent(std::vector<double> x, ValueFn value, GradFn gradient,
                              const FullBatchOptions& options, const char* what) {
  AscentOutcome out;
  double fx = value(x);
  std::vector<double> g = gradient(x);
  double step = options.initial_step;
  std::vector<double> trial(x.size());
  out.trace.push_back({0, fx});
  long iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    if (inf_norm(g) <= options.gradient_tolerance) break;
    const double gg = dot(g, g);
    bool accepted = false;
    std::vector<double> g_trial;
    double f_trial = 0.0;
    for (int shrink = 0; shrink < 200; ++shrink) {
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + step * g[i];
      f_trial = value(trial);
      g_trial.clear();
      if (std::isfinite(f_trial)) {
        if (f_trial >= fx + options.armijo * step * gg) {
          accepted = true;
        } else {
          g_trial = gradient(trial);
          accepted = dot(g_trial, g) >= 0.0;
        }
      }
      if (accepted) break;
      step *= 0.5;
    }
    if (!accepted) {
      throw NumericalError(std::string(what) + ": line search failed at iteration " +
                           std::to_string(iter) + " (gradient norm " +
                           std::to_string(inf_norm(g)) + ")");
    }
    x.swap(trial);
    fx = f_trial;
    g = g_trial.empty() ? gradient(x) : std::move(g_trial);
    step *= 2.0;
    if ((iter + 1) % 10 == 0) out.trace.push_back({iter + 1, fx});
  }
  if (inf_norm(g) > options.gradient_tolerance) {
    throw NumericalError(std::string(what) + ": no convergence within " +
                         std::to_string(options.max_iterations) + " iterations (gradient norm " +
                         std::to_string(inf_norm(g)) + ")");
  }
  if (out.trace.back().iteration != iter) out.trace.push_back({iter, fx});
  out.x = std::move(x);
  out.iterations = iter;
  return out;
}

void require_shape(std::span<const double> f, const CountVector& counts) {
  if (f.size() != counts.size()) {
    throw InvalidArgument("score vector has K=" + std::to_string(f.size()) +
                          " but counts have K=" + std::to_string(counts.size()));
  }
}

}  // namespace

CountVector::CountVector(std::vector<std::int64_t> counts) : counts_(std::move(counts)) {
  if (counts_.size() < 2) throw InvalidArgument("count vector needs at least 2 classes");
  for (std::int64_t c : counts_) {
    if (c < 0) throw InvalidArgument("counts must be non-negative");
    total_ += c;
  }
  if (total_ < 1) throw InvalidArgument("counts are all zero");
}

CountVector CountVector::from_labels(std::span<const int> labels, int num_classes) {
  if (num_classes < 2) throw InvalidArgument("need at least 2 classes");
  std::vector<std::int64_t> c(static_cast<std::size_t>(num_classes), 0);
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw InvalidArgument("label " + std::to_string(y) + " out of range");
    }
    ++c[static_cast<std::size_t>(y)];
  }
  return CountVector(std::move(c));
}

std::vector<std::size_t> CountVector::active_classes() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    if (counts_[k] > 0) out.push_back(k);
  }
  return out;
}

std::string_view to_string(EstimationMethod method) {
  switch (method) {
    case EstimationMethod::kExact: return "exact";
    case EstimationMethod::kOve: return "ove";
    case EstimationMethod::kOveSgd: return "ove-sgd";
    case EstimationMethod::kBouchard: return "bouchard";
  }
  return "unknown";
}

EstimationMethod parse_estimation_method(std::string_view name) {
  if (name == "exact") return EstimationMethod::kExact;
  if (name == "ove") return EstimationMethod::kOve;
  if (name == "ove-sgd" || name == "ove_sgd") return EstimationMethod::kOveSgd;
  if (name == "bouchard") return EstimationMethod::kBouchard;
  throw InvalidArgument("unknown estimation method '" + std::string(name) + "'");
}

nlohmann::json EstimationResult::to_json() const {
  nlohmann::json j;
  j["method"] = std::string(to_string(method));
  auto& f = j["f_hat"] = nlohmann::json::array();
  for (double v : f_hat) {
    if (std::isfinite(v)) {
      f.push_back(v);
    } else {
      f.push_back(nullptr);
    }
  }
  j["probs"] = probs;
  auto& t = j["trace"] = nlohmann::json::array();
  for (const auto& p : trace) t.push_back({p.iteration, p.value});
  j["alpha"] = alpha ? nlohmann::json(*alpha) : nlohmann::json(nullptr);
  j["iterations"] = iterations;
  return j;
}

EstimationResult exact_mle(const CountVector& counts) {
  const auto active = counts.active_classes();
  std::vector<double> f;
  for (std::size_t k : active) f.push_back(std::log(static_cast<double>(counts[k])));
  center(f);
  EstimationResult r = expand(EstimationMethod::kExact, counts, active, f);
  // Stationary conditions force p_k = N_k / N exactly; avoid exp/log roundoff.
  for (std::size_t k : active) {
    r.probs[k] = static_cast<double>(counts[k]) / static_cast<double>(counts.total());
  }
  return r;
}

double exact_log_likelihood(std::span<const double> f, const CountVector& counts) {
  require_shape(f, counts);
  const double lse = log_sum_exp(f);
  double acc = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (counts[k] > 0) acc += static_cast<double>(counts[k]) * (f[k] - lse);
  }
  return acc;
}

double ove_objective(std::span<const double> f, const CountVector& counts) {
  require_shape(f, counts);
  double acc = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (counts[k] == 0) continue;
    acc += static_cast<double>(counts[k]) * ove_log_bound(f, k);
  }
  return acc;
}

double ove_objective_pairwise(std::span<const double> f, const CountVector& counts) {
  require_shape(f, counts);
  double acc = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    for (std::size_t m = 0; m < k; ++m) {
      const double d = f[k] - f[m];
      acc += static_cast<double>(counts[k]) * log_sigmoid(d) +
             static_cast<double>(counts[m]) * log_sigmoid(-d);
    }
  }
  return acc;
}

std::vector<double> ove_objective_gradient(std::span<const double> f, const CountVector& counts) {
  require_shape(f, counts);
  std::vector<double> g(f.size(), 0.0);
  for (std::size_t k = 0; k < f.size(); ++k) {
    for (std::size_t m = 0; m < k; ++m) {
      const double d = f[k] - f[m];
      // d/df_k of N_k log σ(d) + N_m log σ(−d)
      const double dk = static_cast<double>(counts[k]) * sigmoid(-d) -
                        static_cast<double>(counts[m]) * sigmoid(d);
      g[k] += dk;
      g[m] -= dk;
    }
  }
  return g;
}

double bouchard_objective(std::span<const double> f, double alpha, const CountVector& counts) {
  require_shape(f, counts);
  double acc = 0.0;
  double penalty = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    acc += static_cast<double>(counts[k]) * (f[k] - alpha);
    penalty += softplus(f[k] - alpha);
  }
  return acc - static_cast<double>(counts.total()) * penalty;
}

EstimationResult ove_fit(const CountVector& counts, const FullBatchOptions& options) {
  const auto active = counts.active_classes();
  if (active.size() == 1) return expand(EstimationMethod::kOve, counts, active, {0.0});
  const CountVector sub = active_counts(counts, active);
  auto out = gradient_ascent(
      std::vector<double>(sub.size(), 0.0),
      [&](const std::vector<double>& f) { return ove_objective(f, sub); },
      [&](const std::vector<double>& f) { return ove_objective_gradient(f, sub); }, options,
      "ove_fit");
  center(out.x);
  EstimationResult r = expand(EstimationMethod::kOve, counts, active, out.x);
  r.trace = std::move(out.trace);
  r.iterations = out.iterations;
  return r;
}

EstimationResult bouchard_fit(const CountVector& counts, const FullBatchOptions& options) {
  const auto active = counts.active_classes();
  if (active.size() == 1) {
    EstimationResult r = expand(EstimationMethod::kBouchard, counts, active, {0.0});
    r.alpha = 0.0;
    return r;
  }
  const CountVector sub = active_counts(counts, active);
  const double total = static_cast<double>(sub.total());
  // Profile objective max_α F(f, α); by the envelope theorem its gradient is
  // ∂F/∂f at the re-solved α, and ∂F/∂α vanishes there.
  auto value = [&](const std::vector<double>& f) {
    return bouchard_objective(f, optimize_alpha(f), sub);
  };
  auto gradient = [&](const std::vector<double>& f) {
    const double alpha = optimize_alpha(f);
    std::vector<double> g(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
      g[k] = static_cast<double>(sub[k]) - total * sigmoid(f[k] - alpha);
    }
    return g;
  };
  auto out = gradient_ascent(std::vector<double>(sub.size(), 0.0), value, gradient, options,
                             "bouchard_fit");
  const double shift = std::accumulate(out.x.begin(), out.x.end(), 0.0) /
                       static_cast<double>(out.x.size());
  const double alpha = optimize_alpha(out.x) - shift;
  center(out.x);
  EstimationResult r = expand(EstimationMethod::kBouchard, counts, active, out.x);
  r.alpha = alpha;
  r.trace = std::move(out.trace);
  r.iterations = out.iterations;
  return r;
}

std::vector<double> ove_sgd_gradient(std::span<const double> f, std::span<const int> batch,
                                     int remaining_classes, Rng& rng) {
  const int num_classes = static_cast<int>(f.size());
  if (batch.empty()) throw InvalidArgument("ove_sgd_gradient: empty batch");
  std::vector<double> g(f.size(), 0.0);
  std::vector<int> sampled;
  const double scale = static_cast<double>(num_classes - 1) / remaining_classes;
  for (int y : batch) {
    if (y < 0 || y >= num_classes) throw InvalidArgument("label out of range");
    sample_remaining_into(num_classes, y, remaining_classes, rng, sampled);
    for (int m : sampled) {
      const double w = scale * sigmoid(f[m] - f[y]);
      g[y] += w;
      g[m] -= w;
    }
  }
  return g;
}

EstimationResult ove_sgd_fit(std::span<const int> labels, int num_classes, const TrainConfig& cfg,
                             std::optional<std::span<const double>> reference) {
  if (labels.empty()) throw InvalidArgument("ove_sgd_fit: empty label stream");
  if (num_classes < 2) throw InvalidArgument("ove_sgd_fit: need at least 2 classes");
  cfg.validate_for(num_classes);
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw InvalidArgument("ove_sgd_fit: label " + std::to_string(y) + " out of range");
    }
  }
  if (reference && reference->size() != static_cast<std::size_t>(num_classes)) {
    throw InvalidArgument("ove_sgd_fit: reference has the wrong length");
  }

  const auto n = labels.size();
  const auto K = static_cast<std::size_t>(num_classes);
  const int S = cfg.remaining_classes;
  const double scale = static_cast<double>(num_classes - 1) / S;
  Rng shuffle_rng = make_rng(cfg.seed, RngStream::kDataShuffle);
  Rng class_rng = make_rng(cfg.seed, RngStream::kClassSampling);

  std::vector<double> f(K, 0.0);
  std::vector<double> delta(K, 0.0);
  std::vector<int> touched;
  std::vector<char> is_touched(K, 0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<int> sampled;

  EstimationResult r;
  r.method = EstimationMethod::kOveSgd;
  long iteration = 0;
  auto touch = [&](int c, double v) {
    if (!is_touched[c]) {
      is_touched[c] = 1;
      touched.push_back(c);
    }
    delta[c] += v;
  };
  auto l1_error = [&]() {
    const std::vector<double> p = softmax(f);
    double e = 0.0;
    for (std::size_t k = 0; k < K; ++k) e += std::abs(p[k] - (*reference)[k]);
    return e;
  };
  if (reference) r.trace.push_back({0, l1_error()});

  double lr = cfg.lr0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < n; start += cfg.minibatch_size) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(cfg.minibatch_size));
      double bound = 0.0;
      for (std::size_t i = start; i < stop; ++i) {
        const int y = labels[order[i]];
        sample_remaining_into(num_classes, y, S, class_rng, sampled);
        for (int m : sampled) {
          const double d = f[y] - f[m];
          // The step is taken on the unscaled pair terms; lr is per sampled pair.
          const double w = sigmoid(-d);
          bound += scale * log_sigmoid(d);
          touch(y, w);
          touch(m, -w);
        }
      }
      for (int c : touched) {
        f[c] += lr * delta[c];
        if (!std::isfinite(f[c])) {
          throw NumericalError("ove_sgd_fit: non-finite score at iteration " +
                               std::to_string(iteration) + "; learning rate too large?");
        }
        delta[c] = 0.0;
        is_touched[c] = 0;
      }
      touched.clear();
      ++iteration;
      if (iteration % cfg.log_interval == 0) {
        const double value =
            reference ? l1_error() : bound / static_cast<double>(stop - start);
        r.trace.push_back({iteration, value});
      }
    }
    lr *= cfg.lr_decay;
  }

  center(f);
  r.probs = softmax(f);
  r.f_hat = std::move(f);
  r.iterations = iteration;
  return r;
}

}  // namespace ove
