#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ove/sparse.hpp"

namespace ove {

/// K linear score functions f_k(x) = b_k + w_k·x over D features.
///
/// Parameters live in one flat buffer: the K×D weight block (class-major)
/// followed by the K biases. Gradients use the same type and layout.
class LinearModel {
 public:
  LinearModel() = default;
  LinearModel(int num_classes, std::size_t num_features);
  LinearModel(int num_classes, std::size_t num_features, std::vector<double> weights,
              std::vector<double> biases);

  int num_classes() const noexcept { return num_classes_; }
  std::size_t num_features() const noexcept { return num_features_; }
  std::size_t num_weights() const noexcept { return weight_count(); }
  std::size_t num_parameters() const noexcept { return params_.size(); }

  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }
  std::span<double> weights() noexcept { return {params_.data(), weight_count()}; }
  std::span<const double> weights() const noexcept { return {params_.data(), weight_count()}; }
  std::span<double> biases() noexcept {
    return {params_.data() + weight_count(), static_cast<std::size_t>(num_classes_)};
  }
  std::span<const double> biases() const noexcept {
    return {params_.data() + weight_count(), static_cast<std::size_t>(num_classes_)};
  }
  std::span<double> row(int k) noexcept {
    return {params_.data() + static_cast<std::size_t>(k) * num_features_, num_features_};
  }
  std::span<const double> row(int k) const noexcept {
    return {params_.data() + static_cast<std::size_t>(k) * num_features_, num_features_};
  }
  double& weight(int k, std::size_t j) noexcept {
    return params_[static_cast<std::size_t>(k) * num_features_ + j];
  }
  double weight(int k, std::size_t j) const noexcept {
    return params_[static_cast<std::size_t>(k) * num_features_ + j];
  }
  double& bias(int k) noexcept { return params_[weight_count() + static_cast<std::size_t>(k)]; }
  double bias(int k) const noexcept { return params_[weight_count() + static_cast<std::size_t>(k)]; }

  /// b_k + w_k·x for every class into `out` (size K). O(K·nnz(x)).
  void scores(SparseRowView x, std::span<double> out) const;
  std::vector<double> scores(SparseRowView x) const;

  /// Σ w², biases excluded.
  double weight_squared_norm() const noexcept;
  bool all_finite() const noexcept;
  bool same_shape(const LinearModel& other) const noexcept {
    return num_classes_ == other.num_classes_ && num_features_ == other.num_features_;
  }

 private:
  std::size_t weight_count() const noexcept {
    return static_cast<std::size_t>(num_classes_) * num_features_;
  }

  int num_classes_ = 0;
  std::size_t num_features_ = 0;
  std::vector<double> params_;
};

/// argmax_k of the scores; ties go to the lowest class index.
int predict(const LinearModel& model, SparseRowView x);

/// Exact softmax over the scores, whatever objective trained the model.
std::vector<double> predict_proba(const LinearModel& model, SparseRowView x);

}  // namespace ove
