#pragma once

// Sparse classification data on disk.
//
// Text format, one instance per line, 1-based labels and feature indices:
//   <label> <idx>:<value> <idx>:<value> ...
// Indices must be strictly increasing. Blank lines and lines starting with
// '#' are skipped. An optional sidecar "<file>.meta.json" holding
// {"K": …, "D": …} overrides the inferred dimensions.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "ove/sparse.hpp"

namespace ove {

struct DatasetShape {
  std::optional<std::size_t> num_features;
  std::optional<int> num_classes;
};

/// Reads {"K":…, "D":…}; missing keys stay empty.
DatasetShape read_metadata(const std::filesystem::path& path);
std::filesystem::path metadata_path_for(const std::filesystem::path& data_path);

/// Throws DataError with the offending line number.
SparseDataset parse_sparse(std::istream& in, const std::string& name, const DatasetShape& shape = {});
SparseDataset load_sparse(const std::filesystem::path& path, const DatasetShape& shape = {});

void write_sparse(const SparseDataset& data, std::ostream& out);
void save_sparse(const SparseDataset& data, const std::filesystem::path& path);

/// Loads a train/test pair with K and D taken from metadata when present,
/// otherwise inferred jointly over both files.
std::pair<SparseDataset, SparseDataset> load_train_test(const std::filesystem::path& train,
                                                        const std::filesystem::path& test);

struct MultilabelReduction {
  SparseDataset dataset;
  std::size_t dropped_rows = 0;  // rows with an empty label list
};

/// Multilabel lines "<l1>,<l2>,… <idx>:<value> …" keep only the first label.
/// An optional "<rows> <features> <labels>" header line sets D and K.
MultilabelReduction parse_multilabel(std::istream& in, const std::string& name);
MultilabelReduction reduce_multilabel(const std::filesystem::path& path);

/// IDX image/label pair (gzip or raw), pixels scaled to [0, 1] and zero
/// pixels dropped. K = 10 unless labels say otherwise.
SparseDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                       const std::string& name);

}  // namespace ove
