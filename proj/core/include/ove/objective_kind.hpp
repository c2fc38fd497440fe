#pragma once

#include <string>
#include <string_view>

namespace ove {

enum class ObjectiveKind {
  kExactSoftmax,
  kOve,
  kBouchard,
};

/// "soft", "ove", "bouchard".
std::string_view to_string(ObjectiveKind kind);
/// Accepts "soft", "exact", "exact_softmax", "ove", "bouchard". Throws InvalidArgument.
ObjectiveKind parse_objective_kind(std::string_view name);

}  // namespace ove
