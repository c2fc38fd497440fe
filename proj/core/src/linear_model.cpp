#include "ove/linear_model.hpp"

#include <algorithm>
#include <cmath>

#include "ove/bounds.hpp"
#include "ove/errors.hpp"

namespace ove {

LinearModel::LinearModel(int num_classes, std::size_t num_features)
    : num_classes_(num_classes), num_features_(num_features) {
  if (num_classes < 2) throw InvalidArgument("model needs at least 2 classes");
  params_.assign(static_cast<std::size_t>(num_classes) * (num_features + 1), 0.0);
}

LinearModel::LinearModel(int num_classes, std::size_t num_features, std::vector<double> weights,
                         std::vector<double> biases)
    : LinearModel(num_classes, num_features) {
  if (weights.size() != weight_count() || biases.size() != static_cast<std::size_t>(num_classes)) {
    throw InvalidArgument("model parameter sizes do not match K and D");
  }
  std::copy(weights.begin(), weights.end(), params_.begin());
  std::copy(biases.begin(), biases.end(), params_.begin() + static_cast<long>(weight_count()));
}

void LinearModel::scores(SparseRowView x, std::span<double> out) const {
  if (out.size() != static_cast<std::size_t>(num_classes_)) {
    throw InvalidArgument("score buffer has the wrong length");
  }
  if (x.nnz() > 0 && x.indices.back() >= num_features_) {
    throw InvalidArgument("feature index " + std::to_string(x.indices.back()) +
                          " out of range for D=" + std::to_string(num_features_));
  }
  const double* w = params_.data();
  const double* b = params_.data() + weight_count();
  for (int k = 0; k < num_classes_; ++k) {
    const double* wk = w + static_cast<std::size_t>(k) * num_features_;
    double s = b[k];
    for (std::size_t i = 0; i < x.nnz(); ++i) s += wk[x.indices[i]] * x.values[i];
    out[static_cast<std::size_t>(k)] = s;
  }
}

std::vector<double> LinearModel::scores(SparseRowView x) const {
  std::vector<double> out(static_cast<std::size_t>(num_classes_));
  scores(x, out);
  return out;
}

double LinearModel::weight_squared_norm() const noexcept {
  double acc = 0.0;
  for (double v : weights()) acc += v * v;
  return acc;
}

bool LinearModel::all_finite() const noexcept {
  return std::all_of(params_.begin(), params_.end(), [](double v) { return std::isfinite(v); });
}

int predict(const LinearModel& model, SparseRowView x) {
  const auto s = model.scores(x);
  // max_element returns the first maximum, i.e. the lowest index on ties.
  return static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
}

std::vector<double> predict_proba(const LinearModel& model, SparseRowView x) {
  return softmax(model.scores(x));
}

}  // namespace ove
