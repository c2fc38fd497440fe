#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ove {

using Rng = std::mt19937_64;

/// Named sub-streams derived from a single run seed. Every random decision in
/// a run draws from exactly one of these, so changing one consumer does not
/// perturb the others.
enum class RngStream : std::uint64_t {
  kDataShuffle = 1,
  kClassSampling = 2,
  kInit = 3,
  kGenerator = 4,
};

Rng make_rng(std::uint64_t seed, RngStream stream);

/// Draws `count` distinct classes uniformly without replacement from
/// {0..num_classes-1} \ {excluded}. Every eligible class is included with
/// probability count / (num_classes - 1). Throws InvalidArgument when
/// count > num_classes - 1 or excluded is out of range.
std::vector<int> sample_remaining(int num_classes, int excluded, int count, Rng& rng);

/// Same as above but reuses `out` to avoid allocation in hot loops.
void sample_remaining_into(int num_classes, int excluded, int count, Rng& rng,
                           std::vector<int>& out);

}  // namespace ove
