#pragma once

#include <filesystem>
#include <iosfwd>

#include <nlohmann/json.hpp>

#include "ove/linear_model.hpp"

namespace ove {

// Binary layout, little-endian throughout:
//   char[4]  magic "OVEM"
//   uint32   version (1)
//   uint64   K
//   uint64   D
//   float64  weights[K*D]   row-major, class-major
//   float64  biases[K]
inline constexpr char kCheckpointMagic[4] = {'O', 'V', 'E', 'M'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(const LinearModel& model, std::ostream& out);
void save_checkpoint(const LinearModel& model, const std::filesystem::path& path);

/// Throws DataError on a bad magic, unknown version, truncation or trailing bytes.
LinearModel read_checkpoint(std::istream& in);
LinearModel load_checkpoint(const std::filesystem::path& path);

/// Debug export: {"K":…, "D":…, "weights":[[…],…], "biases":[…]}.
nlohmann::json model_to_json(const LinearModel& model);

}  // namespace ove
