#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace ove::cli {

inline constexpr int kManifestSchemaVersion = 1;

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Records what a run read and wrote; every output is listed with its hash.
class RunManifest {
 public:
  RunManifest(std::string command, std::vector<std::string> argv);

  void set_config(nlohmann::json config) { config_ = std::move(config); }
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  void add_dataset(const std::string& name, const std::string& source, const std::string& sha256);
  void add_output(const std::filesystem::path& path);
  void add_timing(const std::string& phase, double milliseconds);

  nlohmann::json to_json() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::string command_;
  std::vector<std::string> argv_;
  nlohmann::json config_ = nlohmann::json::object();
  std::uint64_t seed_ = 0;
  nlohmann::json datasets_ = nlohmann::json::array();
  nlohmann::json outputs_ = nlohmann::json::array();
  nlohmann::json timings_ = nlohmann::json::object();
};

}  // namespace ove::cli
