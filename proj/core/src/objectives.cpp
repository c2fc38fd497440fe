#include "ove/objectives.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>

#include "ove/bounds.hpp"
#include "ove/errors.hpp"

namespace ove {

std::string_view to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kExactSoftmax: return "soft";
    case ObjectiveKind::kOve: return "ove";
    case ObjectiveKind::kBouchard: return "bouchard";
  }
  return "unknown";
}

ObjectiveKind parse_objective_kind(std::string_view name) {
  if (name == "soft" || name == "exact" || name == "exact_softmax") {
    return ObjectiveKind::kExactSoftmax;
  }
  if (name == "ove") return ObjectiveKind::kOve;
  if (name == "bouchard") return ObjectiveKind::kBouchard;
  throw InvalidArgument("unknown objective '" + std::string(name) + "'");
}

int evaluation_threads() {
  if (const char* env = std::getenv("OVE_NUM_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

namespace {

constexpr std::size_t kMaxShards = 16;
constexpr std::size_t kShardMemoryBudget = std::size_t{1} << 28;  // bytes of gradient buffers

// Shard count depends only on problem size, never on the thread count, so the
// ordered reduction is reproducible across machines.
std::size_t shard_count(std::size_t rows, std::size_t params, bool with_gradient) {
  std::size_t shards = std::min(kMaxShards, std::max<std::size_t>(rows, 1));
  if (with_gradient) {
    const std::size_t fit = kShardMemoryBudget / (sizeof(double) * std::max<std::size_t>(params, 1));
    shards = std::min(shards, std::max<std::size_t>(fit, 1));
  }
  return shards;
}

template <class Fn>
void run_shards(std::size_t shards, Fn&& fn) {
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(evaluation_threads()), shards);
  if (threads <= 1) {
    for (std::size_t s = 0; s < shards; ++s) fn(s);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t s = next++; s < shards; s = next++) {
        try {
          fn(s);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

// Log-likelihood term of one instance and its derivative w.r.t. each score.
double instance_term(ObjectiveKind kind, std::span<const double> s, int y, double alpha,
                     std::span<double> coef) {
  const auto K = s.size();
  const auto yi = static_cast<std::size_t>(y);
  switch (kind) {
    case ObjectiveKind::kExactSoftmax: {
      const double lse = log_sum_exp(s);
      for (std::size_t k = 0; k < K; ++k) coef[k] = -std::exp(s[k] - lse);
      coef[yi] += 1.0;
      return s[yi] - lse;
    }
    case ObjectiveKind::kOve: {
      double value = 0.0;
      double pull = 0.0;
      for (std::size_t m = 0; m < K; ++m) {
        if (m == yi) continue;
        const double d = s[yi] - s[m];
        value += log_sigmoid(d);
        const double w = sigmoid(-d);  // σ(f_m − f_y)
        coef[m] = -w;
        pull += w;
      }
      coef[yi] = pull;
      return value;
    }
    case ObjectiveKind::kBouchard: {
      double value = s[yi] - alpha;
      for (std::size_t k = 0; k < K; ++k) {
        value -= softplus(s[k] - alpha);
        coef[k] = -sigmoid(s[k] - alpha);
      }
      coef[yi] += 1.0;
      return value;
    }
  }
  return 0.0;
}

void require_compatible(const LinearModel& model, const SparseDataset& data) {
  if (model.num_classes() != data.num_classes() || model.num_features() < data.num_features()) {
    throw InvalidArgument("model (K=" + std::to_string(model.num_classes()) + ", D=" +
                          std::to_string(model.num_features()) + ") does not fit data (K=" +
                          std::to_string(data.num_classes()) + ", D=" +
                          std::to_string(data.num_features()) + ")");
  }
}

ValueAndGradient evaluate_impl(const LinearModel& model, const SparseDataset& data,
                               const Objective& obj, bool with_gradient) {
  require_compatible(model, data);
  obj.validate(data);
  const std::size_t n_rows = data.size();
  const std::size_t shards = shard_count(n_rows, model.num_parameters(), with_gradient);
  std::vector<double> values(shards, 0.0);
  std::vector<LinearModel> grads;
  if (with_gradient) grads.assign(shards, LinearModel(model.num_classes(), model.num_features()));

  run_shards(shards, [&](std::size_t shard) {
    const std::size_t begin = n_rows * shard / shards;
    const std::size_t end = n_rows * (shard + 1) / shards;
    const auto K = static_cast<std::size_t>(model.num_classes());
    std::vector<double> s(K);
    std::vector<double> coef(K);
    double acc = 0.0;
    for (std::size_t n = begin; n < end; ++n) {
      const auto x = data.row(n);
      model.scores(x, s);
      const double alpha = obj.kind == ObjectiveKind::kBouchard ? obj.alphas[n] : 0.0;
      acc += instance_term(obj.kind, s, data.label(n), alpha, coef);
      if (!with_gradient) continue;
      LinearModel& g = grads[shard];
      for (std::size_t k = 0; k < K; ++k) {
        const double c = coef[k];
        if (c == 0.0) continue;
        auto row = g.row(static_cast<int>(k));
        for (std::size_t i = 0; i < x.nnz(); ++i) row[x.indices[i]] += c * x.values[i];
        g.bias(static_cast<int>(k)) += c;
      }
    }
    values[shard] = acc;
  });

  ValueAndGradient out;
  for (double v : values) out.value += v;
  out.value -= 0.5 * obj.lambda * model.weight_squared_norm();
  if (with_gradient) {
    out.gradient = std::move(grads[0]);
    auto total = out.gradient.parameters();
    for (std::size_t s = 1; s < shards; ++s) {
      const auto part = grads[s].parameters();
      for (std::size_t i = 0; i < total.size(); ++i) total[i] += part[i];
    }
    if (obj.lambda != 0.0) {
      auto gw = out.gradient.weights();
      const auto w = model.weights();
      for (std::size_t i = 0; i < gw.size(); ++i) gw[i] -= obj.lambda * w[i];
    }
  }
  return out;
}

}  // namespace

void Objective::validate(const SparseDataset& data) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("lambda must be a finite non-negative number");
  }
  if (kind == ObjectiveKind::kBouchard) {
    if (alphas.size() != data.size()) {
      throw InvalidArgument("Bouchard objective needs one alpha per instance (" +
                            std::to_string(data.size()) + "), got " +
                            std::to_string(alphas.size()));
    }
  } else if (!alphas.empty()) {
    throw InvalidArgument("alphas are only meaningful for the Bouchard objective");
  }
}

double exact_loglik(const LinearModel& model, const SparseDataset& data, double lambda) {
  return objective_value(model, data, Objective{ObjectiveKind::kExactSoftmax, lambda, {}});
}

double ove_loglik(const LinearModel& model, const SparseDataset& data, double lambda) {
  return objective_value(model, data, Objective{ObjectiveKind::kOve, lambda, {}});
}

double bouchard_loglik(const LinearModel& model, const SparseDataset& data,
                       std::span<const double> alphas, double lambda) {
  return objective_value(model, data,
                         Objective{ObjectiveKind::kBouchard, lambda,
                                   std::vector<double>(alphas.begin(), alphas.end())});
}

double objective_value(const LinearModel& model, const SparseDataset& data, const Objective& obj) {
  return evaluate_impl(model, data, obj, false).value;
}

ValueAndGradient evaluate(const LinearModel& model, const SparseDataset& data, const Objective& obj) {
  return evaluate_impl(model, data, obj, true);
}

LinearModel full_gradient(const LinearModel& model, const SparseDataset& data, const Objective& obj) {
  return evaluate_impl(model, data, obj, true).gradient;
}

std::vector<double> optimize_alphas(const LinearModel& model, const SparseDataset& data) {
  require_compatible(model, data);
  std::vector<double> alphas(data.size());
  const std::size_t shards = shard_count(data.size(), 0, false);
  run_shards(shards, [&](std::size_t shard) {
    const std::size_t begin = data.size() * shard / shards;
    const std::size_t end = data.size() * (shard + 1) / shards;
    std::vector<double> s(static_cast<std::size_t>(model.num_classes()));
    for (std::size_t n = begin; n < end; ++n) {
      model.scores(data.row(n), s);
      alphas[n] = optimize_alpha(s);
    }
  });
  return alphas;
}

}  // namespace ove
