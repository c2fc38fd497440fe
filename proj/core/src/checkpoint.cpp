#include "ove/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "ove/errors.hpp"

namespace ove {

namespace {

template <class T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& in, const char* what) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw DataError(std::string("checkpoint truncated while reading ") + what);
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_checkpoint(const LinearModel& model, std::ostream& out) {
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(model.num_classes()));
  put_le<std::uint64_t>(out, model.num_features());
  for (double v : model.weights()) put_le(out, v);
  for (double v : model.biases()) put_le(out, v);
  if (!out) throw DataError("failed to write checkpoint");
}

void save_checkpoint(const LinearModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_checkpoint(model, out);
}

LinearModel read_checkpoint(std::istream& in) {
  char magic[4];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw DataError("not a model checkpoint (bad magic)");
  }
  const auto version = get_le<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto K = get_le<std::uint64_t>(in, "K");
  const auto D = get_le<std::uint64_t>(in, "D");
  if (K < 2 || K > (1u << 30) || D > (std::uint64_t{1} << 40) / K) {
    throw DataError("checkpoint header has implausible dimensions");
  }
  LinearModel model(static_cast<int>(K), static_cast<std::size_t>(D));
  for (double& v : model.weights()) v = get_le<double>(in, "weights");
  for (double& v : model.biases()) v = get_le<double>(in, "biases");
  if (in.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes after checkpoint");
  return model;
}

LinearModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

nlohmann::json model_to_json(const LinearModel& model) {
  nlohmann::json j;
  j["K"] = model.num_classes();
  j["D"] = model.num_features();
  auto& w = j["weights"] = nlohmann::json::array();
  for (int k = 0; k < model.num_classes(); ++k) {
    const auto r = model.row(k);
    w.push_back(std::vector<double>(r.begin(), r.end()));
  }
  j["biases"] = std::vector<double>(model.biases().begin(), model.biases().end());
  return j;
}

}  // namespace ove
