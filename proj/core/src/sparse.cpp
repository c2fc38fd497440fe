#include "ove/sparse.hpp"

#include <cmath>

#include "ove/errors.hpp"

namespace ove {

SparseVector::SparseVector(std::vector<FeatureIndex> indices, std::vector<double> values)
    : indices_(std::move(indices)), values_(std::move(values)) {
  if (indices_.size() != values_.size()) {
    throw InvalidArgument("sparse vector: index and value counts differ");
  }
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (i > 0 && indices_[i] <= indices_[i - 1]) {
      throw InvalidArgument("sparse vector: indices must be strictly increasing");
    }
    if (!std::isfinite(values_[i]) || values_[i] == 0.0) {
      throw InvalidArgument("sparse vector: values must be finite and non-zero");
    }
  }
}

SparseVector SparseVector::from_dense(std::span<const double> dense) {
  std::vector<FeatureIndex> idx;
  std::vector<double> val;
  for (std::size_t j = 0; j < dense.size(); ++j) {
    if (dense[j] != 0.0) {
      idx.push_back(static_cast<FeatureIndex>(j));
      val.push_back(dense[j]);
    }
  }
  return SparseVector(std::move(idx), std::move(val));
}

SparseDataset::SparseDataset(std::size_t num_features, int num_classes, std::string name)
    : num_features_(num_features), num_classes_(num_classes), name_(std::move(name)) {
  if (num_classes_ < 2) throw InvalidArgument("dataset needs at least 2 classes");
}

void SparseDataset::add_row(SparseRowView x, int label) {
  if (label < 0 || label >= num_classes_) {
    throw InvalidArgument("label " + std::to_string(label + 1) + " outside [1, " +
                          std::to_string(num_classes_) + "]");
  }
  if (x.nnz() > 0 && x.indices.back() >= num_features_) {
    throw InvalidArgument("feature index " + std::to_string(x.indices.back() + 1) +
                          " exceeds D=" + std::to_string(num_features_));
  }
  indices_.insert(indices_.end(), x.indices.begin(), x.indices.end());
  values_.insert(values_.end(), x.values.begin(), x.values.end());
  row_ptr_.push_back(indices_.size());
  labels_.push_back(label);
}

void SparseDataset::reshape(std::size_t num_features, int num_classes) {
  if (num_classes < 2) throw InvalidArgument("dataset needs at least 2 classes");
  for (int y : labels_) {
    if (y >= num_classes) {
      throw InvalidArgument("label " + std::to_string(y + 1) + " exceeds K=" +
                            std::to_string(num_classes));
    }
  }
  for (std::size_t n = 0; n < size(); ++n) {
    const auto r = row(n);
    if (r.nnz() > 0 && r.indices.back() >= num_features) {
      throw InvalidArgument("feature index " + std::to_string(r.indices.back() + 1) +
                            " exceeds D=" + std::to_string(num_features));
    }
  }
  num_features_ = num_features;
  num_classes_ = num_classes;
}

SparseDataset SparseDataset::subset(std::span<const std::size_t> rows) const {
  SparseDataset out(num_features_, num_classes_, name_);
  for (std::size_t n : rows) {
    if (n >= size()) throw InvalidArgument("subset row out of range");
    out.add_row(row(n), labels_[n]);
  }
  return out;
}

}  // namespace ove
