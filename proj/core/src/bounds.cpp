#include "ove/bounds.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "ove/errors.hpp"

namespace ove {

namespace {

void require_classes(std::span<const double> f) {
  if (f.size() < 2) {
    throw InvalidArgument("score vector needs at least 2 classes, got " + std::to_string(f.size()));
  }
}

void require_index(std::span<const double> f, std::size_t k) {
  require_classes(f);
  if (k >= f.size()) {
    throw InvalidArgument("class index " + std::to_string(k) + " out of range for K=" +
                          std::to_string(f.size()));
  }
}

// Σ_m σ(f_m − α) − 1 with the largest term folded into −σ(α − f_max), which
// keeps the residual accurate when one class dominates.
double alpha_residual(std::span<const double> f, std::size_t argmax, double alpha) {
  double g = -sigmoid(alpha - f[argmax]);
  for (std::size_t m = 0; m < f.size(); ++m) {
    if (m != argmax) g += sigmoid(f[m] - alpha);
  }
  return g;
}

double alpha_residual_slope(std::span<const double> f, double alpha) {
  double d = 0.0;
  for (double fm : f) {
    const double s = sigmoid(fm - alpha);
    d -= s * (1.0 - s);
  }
  return d;
}

}  // namespace

ScoreVector::ScoreVector(std::vector<double> scores) : scores_(std::move(scores)) {
  require_classes(scores_);
  for (std::size_t k = 0; k < scores_.size(); ++k) {
    if (!std::isfinite(scores_[k])) {
      throw InvalidArgument("score " + std::to_string(k) + " is not finite");
    }
  }
}

double log_sum_exp(std::span<const double> f) {
  require_classes(f);
  const double top = *std::max_element(f.begin(), f.end());
  double sum = 0.0;
  for (double v : f) sum += std::exp(v - top);
  const double lse = top + std::log(sum);
  if (!std::isfinite(lse)) throw InvalidArgument("log_sum_exp: scores must be finite");
  return lse;
}

double log_softmax_prob(std::span<const double> f, std::size_t k) {
  require_index(f, k);
  return f[k] - log_sum_exp(f);
}

double softmax_prob(std::span<const double> f, std::size_t k) {
  return std::exp(log_softmax_prob(f, k));
}

std::vector<double> softmax(std::span<const double> f) {
  const double lse = log_sum_exp(f);
  std::vector<double> p(f.size());
  std::transform(f.begin(), f.end(), p.begin(), [lse](double v) { return std::exp(v - lse); });
  return p;
}

double ove_log_bound(std::span<const double> f, std::size_t k) {
  require_index(f, k);
  double acc = 0.0;
  for (std::size_t m = 0; m < f.size(); ++m) {
    if (m != k) acc += log_sigmoid(f[k] - f[m]);
  }
  return acc;
}

LabelPartition::LabelPartition(std::size_t num_classes, std::size_t target,
                               std::vector<std::vector<std::size_t>> blocks)
    : num_classes_(num_classes), target_(target), blocks_(std::move(blocks)) {
  if (num_classes_ < 2) throw InvalidArgument("partition needs at least 2 classes");
  if (target_ >= num_classes_) throw InvalidArgument("partition target out of range");
  std::vector<bool> seen(num_classes_, false);
  std::size_t covered = 0;
  for (const auto& block : blocks_) {
    if (block.empty()) throw InvalidArgument("partition has an empty block");
    for (std::size_t m : block) {
      if (m >= num_classes_) throw InvalidArgument("partition class out of range");
      if (m == target_) throw InvalidArgument("partition block contains the target class");
      if (seen[m]) throw InvalidArgument("partition blocks overlap at class " + std::to_string(m));
      seen[m] = true;
      ++covered;
    }
  }
  if (covered != num_classes_ - 1) {
    throw InvalidArgument("partition blocks do not cover every remaining class");
  }
}

LabelPartition LabelPartition::singletons(std::size_t num_classes, std::size_t target) {
  std::vector<std::vector<std::size_t>> blocks;
  for (std::size_t m = 0; m < num_classes; ++m) {
    if (m != target) blocks.push_back({m});
  }
  return LabelPartition(num_classes, target, std::move(blocks));
}

LabelPartition LabelPartition::single_block(std::size_t num_classes, std::size_t target) {
  std::vector<std::size_t> rest;
  for (std::size_t m = 0; m < num_classes; ++m) {
    if (m != target) rest.push_back(m);
  }
  return LabelPartition(num_classes, target, {std::move(rest)});
}

LabelPartition LabelPartition::merged(std::size_t i, std::size_t j) const {
  if (i == j || i >= blocks_.size() || j >= blocks_.size()) {
    throw InvalidArgument("merge needs two distinct existing blocks");
  }
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> joined = blocks_[i];
  joined.insert(joined.end(), blocks_[j].begin(), blocks_[j].end());
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (b == std::min(i, j)) {
      out.push_back(joined);
    } else if (b != std::max(i, j)) {
      out.push_back(blocks_[b]);
    }
  }
  return LabelPartition(num_classes_, target_, std::move(out));
}

double hierarchical_log_bound(std::span<const double> f, const LabelPartition& p) {
  if (f.size() != p.num_classes()) {
    throw InvalidArgument("partition built for K=" + std::to_string(p.num_classes()) +
                          " but scores have K=" + std::to_string(f.size()));
  }
  const double fk = f[p.target()];
  double acc = 0.0;
  for (const auto& block : p.blocks()) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t m : block) top = std::max(top, f[m]);
    double sum = 0.0;
    for (std::size_t m : block) sum += std::exp(f[m] - top);
    // log e^{f_k}/(e^{f_k} + e^{lse_B}) = −softplus(lse_B − f_k)
    acc -= softplus(top + std::log(sum) - fk);
  }
  return acc;
}

double bouchard_lse_upper(std::span<const double> f, double alpha) {
  require_classes(f);
  if (!std::isfinite(alpha)) throw InvalidArgument("alpha must be finite");
  double acc = alpha;
  for (double fm : f) acc += softplus(fm - alpha);
  return acc;
}

double bouchard_log_bound(std::span<const double> f, std::size_t k, double alpha) {
  require_index(f, k);
  if (!std::isfinite(alpha)) throw InvalidArgument("alpha must be finite");
  double acc = f[k] - alpha;
  for (double fm : f) acc -= softplus(fm - alpha);
  return acc;
}

double optimize_alpha(std::span<const double> f, const AlphaSolverOptions& options) {
  require_classes(f);
  const auto [min_it, max_it] = std::minmax_element(f.begin(), f.end());
  const std::size_t argmax = static_cast<std::size_t>(max_it - f.begin());
  const double log_k = std::log(static_cast<double>(f.size()));
  // The residual is strictly decreasing in α and changes sign on this bracket.
  double lo = *min_it - log_k;
  double hi = *max_it + log_k;

  double alpha = std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());
  double prev_abs = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const double g = alpha_residual(f, argmax, alpha);
    if (g == 0.0) return alpha;
    if (g > 0.0) {
      lo = alpha;
    } else {
      hi = alpha;
    }
    const double slope = alpha_residual_slope(f, alpha);
    const double step = slope < 0.0 ? -g / slope : std::numeric_limits<double>::infinity();
    const double scale = 1.0 + std::abs(alpha);
    // Also stop when the Newton step would move the upper bound by < 1e-14.
    if (std::abs(g) <= options.tolerance &&
        (std::abs(step) <= 1e-12 * scale || std::abs(g * step) <= 1e-14)) {
      const double polished = alpha + step;
      return (polished > lo && polished < hi) ? polished : alpha;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * scale) {
      return alpha;
    }
    double next = alpha + step;
    const bool stalled = std::abs(g) > 0.5 * prev_abs;
    if (!std::isfinite(next) || next <= lo || next >= hi || (stalled && iter > 0)) {
      next = 0.5 * (lo + hi);
    }
    prev_abs = std::abs(g);
    alpha = next;
  }
  throw NumericalError("optimize_alpha: no convergence within " +
                       std::to_string(options.max_iterations) + " iterations");
}

}  // namespace ove
