#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

#include "ove/errors.hpp"
#include "ove/objectives.hpp"

namespace ove::cli {
namespace {

struct DigestDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw std::runtime_error("sha256: digest initialisation failed");
    }
  }
  void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md.data(), &len);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
      out.push_back(kHex[md[i] >> 4]);
      out.push_back(kHex[md[i] & 15]);
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, DigestDeleter> ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

RunManifest::RunManifest(std::string command, std::vector<std::string> argv)
    : command_(std::move(command)), argv_(std::move(argv)) {}

void RunManifest::add_dataset(const std::string& name, const std::string& source,
                              const std::string& sha256) {
  datasets_.push_back({{"name", name}, {"source", source}, {"sha256", sha256}});
}

void RunManifest::add_output(const std::filesystem::path& path) {
  outputs_.push_back({{"path", path.string()}, {"sha256", sha256_file(path)}});
}

void RunManifest::add_timing(const std::string& phase, double milliseconds) {
  timings_[phase] = milliseconds;
}

nlohmann::json RunManifest::to_json() const {
  return {{"schema_version", kManifestSchemaVersion},
          {"command", command_},
          {"argv", argv_},
          {"config", config_},
          {"seed", seed_},
          {"threads", evaluation_threads()},
          {"datasets", datasets_},
          {"outputs", outputs_},
          {"timings_ms", timings_}};
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json().dump(2) << '\n';
}

}  // namespace ove::cli
