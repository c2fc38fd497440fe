#include "ove/data_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <system_error>

#include <nlohmann/json.hpp>

#include "ove/errors.hpp"

namespace ove {
namespace {

[[noreturn]] void fail_at(const std::string& name, std::size_t line, const std::string& what) {
  throw DataError(name + ":" + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool skippable(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view tok, T& out) {
  if (tok.empty()) return false;
  if constexpr (std::is_integral_v<T>) {
    if (tok.front() == '+') tok.remove_prefix(1);
  }
  const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && p == tok.data() + tok.size();
}

struct PendingRow {
  std::vector<FeatureIndex> indices;
  std::vector<double> values;
  int label = 0;  // 0-based
};

// Parses the "idx:val idx:val" tail of a line.
void parse_features(std::span<const std::string_view> tokens, const std::string& name,
                    std::size_t line, PendingRow& row) {
  long long prev = 0;
  for (std::string_view tok : tokens) {
    const auto colon = tok.find(':');
    if (colon == std::string_view::npos) {
      fail_at(name, line, "expected idx:value, got '" + std::string(tok) + "'");
    }
    long long idx = 0;
    double val = 0.0;
    if (!parse_number(tok.substr(0, colon), idx) || idx < 1) {
      fail_at(name, line, "bad feature index in '" + std::string(tok) + "'");
    }
    if (idx > static_cast<long long>(std::numeric_limits<FeatureIndex>::max())) {
      fail_at(name, line, "feature index too large in '" + std::string(tok) + "'");
    }
    if (!parse_number(tok.substr(colon + 1), val) || !std::isfinite(val)) {
      fail_at(name, line, "bad feature value in '" + std::string(tok) + "'");
    }
    if (idx == prev) fail_at(name, line, "duplicate feature index " + std::to_string(idx));
    if (idx < prev) fail_at(name, line, "feature indices not increasing at " + std::to_string(idx));
    prev = idx;
    if (val == 0.0) continue;
    row.indices.push_back(static_cast<FeatureIndex>(idx - 1));
    row.values.push_back(val);
  }
}

SparseDataset assemble(std::vector<PendingRow>& rows, const std::string& name,
                       const DatasetShape& shape) {
  if (rows.empty()) throw DataError(name + ": no data rows");
  int max_label = 0;
  std::size_t max_feature = 0;
  for (const auto& r : rows) {
    max_label = std::max(max_label, r.label + 1);
    if (!r.indices.empty()) max_feature = std::max<std::size_t>(max_feature, r.indices.back() + 1);
  }
  const int K = shape.num_classes.value_or(std::max(max_label, 2));
  const std::size_t D = shape.num_features.value_or(max_feature);
  if (K < 2) throw DataError(name + ": metadata declares K < 2");
  if (max_label > K) {
    throw DataError(name + ": label " + std::to_string(max_label) + " exceeds declared K=" +
                    std::to_string(K));
  }
  if (max_feature > D) {
    throw DataError(name + ": feature index " + std::to_string(max_feature) +
                    " exceeds declared D=" + std::to_string(D));
  }
  SparseDataset data(D, K, name);
  for (const auto& r : rows) data.add_row(SparseRowView{r.indices, r.values}, r.label);
  return data;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace

std::filesystem::path metadata_path_for(const std::filesystem::path& data_path) {
  return std::filesystem::path(data_path.string() + ".meta.json");
}

DatasetShape read_metadata(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": invalid metadata JSON: " + e.what());
  }
  DatasetShape shape;
  try {
    if (j.contains("K")) {
      const auto k = j.at("K").get<long long>();
      if (k < 2 || k > std::numeric_limits<int>::max()) throw DataError(path.string() + ": bad K");
      shape.num_classes = static_cast<int>(k);
    }
    if (j.contains("D")) {
      const auto d = j.at("D").get<long long>();
      if (d < 0) throw DataError(path.string() + ": bad D");
      shape.num_features = static_cast<std::size_t>(d);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": metadata K/D must be integers: " + e.what());
  }
  return shape;
}

SparseDataset parse_sparse(std::istream& in, const std::string& name, const DatasetShape& shape) {
  std::vector<PendingRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto tokens = split_ws(line);
    PendingRow row;
    long long label = 0;
    if (!parse_number(tokens[0], label) || label < 1 || label > std::numeric_limits<int>::max()) {
      fail_at(name, line_no, "bad label '" + std::string(tokens[0]) + "' (1-based integer expected)");
    }
    row.label = static_cast<int>(label - 1);
    parse_features(std::span(tokens).subspan(1), name, line_no, row);
    rows.push_back(std::move(row));
  }
  if (in.bad()) throw DataError(name + ": read error");
  return assemble(rows, name, shape);
}

SparseDataset load_sparse(const std::filesystem::path& path, const DatasetShape& shape) {
  DatasetShape effective = shape;
  const auto meta = metadata_path_for(path);
  if (std::filesystem::exists(meta)) {
    const auto declared = read_metadata(meta);
    if (!effective.num_classes) effective.num_classes = declared.num_classes;
    if (!effective.num_features) effective.num_features = declared.num_features;
  }
  auto in = open_or_throw(path);
  return parse_sparse(in, path.filename().string(), effective);
}

void write_sparse(const SparseDataset& data, std::ostream& out) {
  char buf[64];
  for (std::size_t n = 0; n < data.size(); ++n) {
    out << data.label(n) + 1;
    const auto x = data.row(n);
    for (std::size_t i = 0; i < x.nnz(); ++i) {
      std::snprintf(buf, sizeof(buf), " %u:%.17g", x.indices[i] + 1, x.values[i]);
      out << buf;
    }
    out << '\n';
  }
}

void save_sparse(const SparseDataset& data, const std::filesystem::path& path) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    write_sparse(data, out);
  }
  std::ofstream meta(metadata_path_for(path), std::ios::binary);
  if (!meta) throw DataError("cannot write " + metadata_path_for(path).string());
  meta << nlohmann::json{{"K", data.num_classes()}, {"D", data.num_features()}}.dump() << '\n';
}

std::pair<SparseDataset, SparseDataset> load_train_test(const std::filesystem::path& train,
                                                        const std::filesystem::path& test) {
  // A dimension declared by either sidecar binds both files.
  auto declared_for = [](const std::filesystem::path& p) {
    const auto meta = metadata_path_for(p);
    return std::filesystem::exists(meta) ? read_metadata(meta) : DatasetShape{};
  };
  const DatasetShape da = declared_for(train), db = declared_for(test);
  if (da.num_classes && db.num_classes && *da.num_classes != *db.num_classes) {
    throw DataError("train/test metadata declare different K");
  }
  if (da.num_features && db.num_features && *da.num_features != *db.num_features) {
    throw DataError("train/test metadata declare different D");
  }
  const DatasetShape shape{da.num_features ? da.num_features : db.num_features,
                           da.num_classes ? da.num_classes : db.num_classes};
  auto a = load_sparse(train, shape);
  auto b = load_sparse(test, shape);
  const int K = std::max(a.num_classes(), b.num_classes());
  const std::size_t D = std::max(a.num_features(), b.num_features());
  try {
    a.reshape(D, K);
    b.reshape(D, K);
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("train/test shapes disagree: ") + e.what());
  }
  return {std::move(a), std::move(b)};
}

MultilabelReduction parse_multilabel(std::istream& in, const std::string& name) {
  std::vector<PendingRow> rows;
  DatasetShape shape;
  MultilabelReduction result;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto tokens = split_ws(line);
    if (first) {
      first = false;
      long long r = 0, d = 0, k = 0;
      if (tokens.size() == 3 && parse_number(tokens[0], r) && parse_number(tokens[1], d) &&
          parse_number(tokens[2], k)) {
        if (d < 0 || k < 2) fail_at(name, line_no, "bad header");
        shape.num_features = static_cast<std::size_t>(d);
        shape.num_classes = static_cast<int>(k);
        continue;
      }
    }
    std::size_t feature_start = 0;
    PendingRow row;
    bool has_label = false;
    const bool leading_blank = line.front() == ' ' || line.front() == '\t';
    if (!leading_blank && tokens[0].find(':') == std::string_view::npos) {
      feature_start = 1;
      const std::string_view list = tokens[0];
      const auto comma = list.find(',');
      const auto head = list.substr(0, comma);
      long long label = 0;
      if (!parse_number(head, label) || label < 1 || label > std::numeric_limits<int>::max()) {
        fail_at(name, line_no, "malformed label list '" + std::string(list) + "'");
      }
      std::string_view rest = comma == std::string_view::npos ? std::string_view{} : list.substr(comma + 1);
      while (comma != std::string_view::npos) {
        const auto next = rest.find(',');
        long long other = 0;
        if (!parse_number(rest.substr(0, next), other) || other < 1) {
          fail_at(name, line_no, "malformed label list '" + std::string(list) + "'");
        }
        if (next == std::string_view::npos) break;
        rest = rest.substr(next + 1);
      }
      row.label = static_cast<int>(label - 1);
      has_label = true;
    }
    parse_features(std::span(tokens).subspan(feature_start), name, line_no, row);
    if (!has_label) {
      ++result.dropped_rows;
      continue;
    }
    rows.push_back(std::move(row));
  }
  if (in.bad()) throw DataError(name + ": read error");
  result.dataset = assemble(rows, name, shape);
  return result;
}

MultilabelReduction reduce_multilabel(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_multilabel(in, path.filename().string());
}

namespace {

class GzReader {
 public:
  explicit GzReader(const std::filesystem::path& path) : path_(path.string()) {
    file_ = gzopen(path_.c_str(), "rb");
    if (!file_) throw DataError("cannot open " + path_);
  }
  ~GzReader() { gzclose(file_); }
  GzReader(const GzReader&) = delete;
  GzReader& operator=(const GzReader&) = delete;

  void read(void* dst, std::size_t n) {
    auto* out = static_cast<unsigned char*>(dst);
    while (n > 0) {
      const unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(n, 1u << 30));
      const int got = gzread(file_, out, chunk);
      if (got <= 0) throw DataError(path_ + ": truncated or corrupt IDX file");
      out += got;
      n -= static_cast<std::size_t>(got);
    }
  }

  std::uint32_t be32() {
    std::array<unsigned char, 4> b{};
    read(b.data(), 4);
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
           std::uint32_t{b[3]};
  }

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  gzFile file_ = nullptr;
};

}  // namespace

SparseDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                       const std::string& name) {
  GzReader img(images);
  GzReader lab(labels);
  if (img.be32() != 0x00000803u) throw DataError(img.path() + ": not an IDX3 ubyte image file");
  if (lab.be32() != 0x00000801u) throw DataError(lab.path() + ": not an IDX1 ubyte label file");
  const std::uint32_t n = img.be32();
  const std::uint32_t rows = img.be32();
  const std::uint32_t cols = img.be32();
  const std::uint32_t n_labels = lab.be32();
  if (n != n_labels) {
    throw DataError(name + ": " + std::to_string(n) + " images but " + std::to_string(n_labels) +
                    " labels");
  }
  if (rows == 0 || cols == 0 || static_cast<std::uint64_t>(rows) * cols > (1u << 24)) {
    throw DataError(img.path() + ": implausible image size");
  }
  const std::size_t D = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> y(n);
  lab.read(y.data(), y.size());
  int K = 10;
  for (unsigned char v : y) K = std::max(K, static_cast<int>(v) + 1);

  SparseDataset data(D, K, name);
  std::vector<unsigned char> pixels(D);
  std::vector<FeatureIndex> idx;
  std::vector<double> val;
  for (std::uint32_t i = 0; i < n; ++i) {
    img.read(pixels.data(), D);
    idx.clear();
    val.clear();
    for (std::size_t j = 0; j < D; ++j) {
      if (pixels[j] == 0) continue;
      idx.push_back(static_cast<FeatureIndex>(j));
      val.push_back(pixels[j] / 255.0);
    }
    data.add_row(SparseRowView{idx, val}, y[i]);
  }
  return data;
}

}  // namespace ove
