#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ove {

using FeatureIndex = std::uint32_t;

/// Non-owning view of one sparse row; indices strictly increasing.
struct SparseRowView {
  std::span<const FeatureIndex> indices;
  std::span<const double> values;

  std::size_t nnz() const noexcept { return indices.size(); }
};

/// Owning sparse vector: strictly increasing indices, finite non-zero values.
class SparseVector {
 public:
  SparseVector() = default;
  SparseVector(std::vector<FeatureIndex> indices, std::vector<double> values);
  /// Builds from a dense vector, dropping zeros.
  static SparseVector from_dense(std::span<const double> dense);

  const std::vector<FeatureIndex>& indices() const noexcept { return indices_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t nnz() const noexcept { return indices_.size(); }
  SparseRowView view() const noexcept { return {indices_, values_}; }

 private:
  std::vector<FeatureIndex> indices_;
  std::vector<double> values_;
};

/// Rows of (sparse features, 0-based label) stored in CSR form.
class SparseDataset {
 public:
  SparseDataset() = default;
  SparseDataset(std::size_t num_features, int num_classes, std::string name = {});

  /// Appends a row; throws InvalidArgument when the label or an index is out
  /// of range for the declared dimensions.
  void add_row(SparseRowView x, int label);
  void add_row(const SparseVector& x, int label) { add_row(x.view(), label); }

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  std::size_t num_features() const noexcept { return num_features_; }
  int num_classes() const noexcept { return num_classes_; }
  const std::string& name() const noexcept { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }
  std::size_t nnz() const noexcept { return indices_.size(); }

  SparseRowView row(std::size_t n) const noexcept {
    const auto b = row_ptr_[n];
    const auto e = row_ptr_[n + 1];
    return {std::span<const FeatureIndex>(indices_.data() + b, e - b),
            std::span<const double>(values_.data() + b, e - b)};
  }
  int label(std::size_t n) const noexcept { return labels_[n]; }
  std::span<const int> labels() const noexcept { return labels_; }

  /// Widens the declared dimensions; throws if an existing row would not fit.
  void reshape(std::size_t num_features, int num_classes);

  SparseDataset subset(std::span<const std::size_t> rows) const;

 private:
  std::size_t num_features_ = 0;
  int num_classes_ = 0;
  std::string name_;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<FeatureIndex> indices_;
  std::vector<double> values_;
  std::vector<int> labels_;
};

}  // namespace ove
