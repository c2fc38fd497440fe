#include "ove/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "ove/errors.hpp"
#include "ove/sampling.hpp"

namespace ove {

SparseDataset gen_toy_5class(int n, std::uint64_t seed) {
  constexpr int kClasses = 5;
  constexpr double kRadius = 3.0;
  if (n < kClasses) throw InvalidArgument("gen_toy_5class: n must be >= 5");
  Rng rng = make_rng(seed, RngStream::kGenerator);
  std::normal_distribution<double> noise(0.0, 1.0);
  SparseDataset data(2, kClasses, "toy5");
  for (int k = 0; k < kClasses; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / kClasses;
    const double cx = kRadius * std::cos(angle);
    const double cy = kRadius * std::sin(angle);
    const int count = n / kClasses + (k < n % kClasses ? 1 : 0);
    for (int i = 0; i < count; ++i) {
      const double x = cx + noise(rng);
      const double y = cy + noise(rng);
      const double point[2] = {x, y};
      data.add_row(SparseVector::from_dense(point), k);
    }
  }
  return data;
}

CategoricalSample gen_powerlaw_categorical(int num_classes, long num_samples, std::uint64_t seed) {
  if (num_classes < 2) throw InvalidArgument("gen_powerlaw_categorical: K must be >= 2");
  if (num_samples < 1) throw InvalidArgument("gen_powerlaw_categorical: N must be >= 1");
  Rng rng = make_rng(seed, RngStream::kGenerator);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  CategoricalSample out;
  out.true_probs.resize(static_cast<std::size_t>(num_classes));
  double total = 0.0;
  for (double& p : out.true_probs) {
    const double u = unit(rng);
    p = u * u;
    total += p;
  }
  for (double& p : out.true_probs) p /= total;

  std::vector<double> cdf(out.true_probs.size());
  std::partial_sum(out.true_probs.begin(), out.true_probs.end(), cdf.begin());
  out.labels.reserve(static_cast<std::size_t>(num_samples));
  for (long i = 0; i < num_samples; ++i) {
    const double u = unit(rng);
    const auto it = std::upper_bound(cdf.begin(), cdf.end() - 1, u);
    out.labels.push_back(static_cast<int>(it - cdf.begin()));
  }
  return out;
}

SparseDataset gen_sparse_classification(const SparseSynthConfig& cfg) {
  if (cfg.num_classes < 2) throw InvalidArgument("gen_sparse_classification: K must be >= 2");
  if (cfg.num_rows < 1) throw InvalidArgument("gen_sparse_classification: need at least one row");
  if (cfg.nnz_per_row < 1 || static_cast<std::size_t>(cfg.nnz_per_row) > cfg.num_features) {
    throw InvalidArgument("gen_sparse_classification: nnz_per_row must lie in [1, D]");
  }
  if (cfg.features_per_class < 1 || static_cast<std::size_t>(cfg.features_per_class) > cfg.num_features) {
    throw InvalidArgument("gen_sparse_classification: features_per_class must lie in [1, D]");
  }
  if (!(cfg.signal_fraction >= 0.0 && cfg.signal_fraction <= 1.0)) {
    throw InvalidArgument("gen_sparse_classification: signal_fraction must lie in [0, 1]");
  }
  Rng rng = make_rng(cfg.seed, RngStream::kGenerator);
  const auto K = static_cast<std::size_t>(cfg.num_classes);
  const auto P = static_cast<std::size_t>(cfg.features_per_class);

  std::uniform_int_distribution<std::size_t> any_feature(0, cfg.num_features - 1);
  std::vector<FeatureIndex> pools(K * P);
  for (auto& f : pools) f = static_cast<FeatureIndex>(any_feature(rng));

  std::vector<double> weights(K);
  for (std::size_t k = 0; k < K; ++k) weights[k] = std::pow(static_cast<double>(k + 1), -cfg.label_skew);
  std::discrete_distribution<int> label_dist(weights.begin(), weights.end());
  std::uniform_int_distribution<std::size_t> pool_pick(0, P - 1);
  std::uniform_real_distribution<double> magnitude(0.5, 1.5);
  const int signal = static_cast<int>(std::lround(cfg.signal_fraction * cfg.nnz_per_row));

  SparseDataset data(cfg.num_features, cfg.num_classes, "sparse-synth");
  std::vector<std::pair<FeatureIndex, double>> entries;
  std::vector<FeatureIndex> idx;
  std::vector<double> val;
  for (std::size_t n = 0; n < cfg.num_rows; ++n) {
    const int y = label_dist(rng);
    entries.clear();
    auto contains = [&](FeatureIndex f) {
      return std::any_of(entries.begin(), entries.end(), [f](const auto& e) { return e.first == f; });
    };
    // Pools may hold repeats, so cap the attempts at drawing distinct signal features.
    for (int tries = 0; static_cast<int>(entries.size()) < signal && tries < 8 * cfg.nnz_per_row; ++tries) {
      const FeatureIndex f = pools[static_cast<std::size_t>(y) * P + pool_pick(rng)];
      if (!contains(f)) entries.emplace_back(f, magnitude(rng));
    }
    while (static_cast<int>(entries.size()) < cfg.nnz_per_row) {
      const auto f = static_cast<FeatureIndex>(any_feature(rng));
      if (!contains(f)) entries.emplace_back(f, magnitude(rng));
    }
    std::sort(entries.begin(), entries.end());
    idx.clear();
    val.clear();
    for (const auto& [f, v] : entries) {
      idx.push_back(f);
      val.push_back(v);
    }
    data.add_row(SparseRowView{idx, val}, y);
  }
  return data;
}

}  // namespace ove
