#include "ove/sampling.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "ove/errors.hpp"

namespace ove {

Rng make_rng(std::uint64_t seed, RngStream stream) {
  const auto tag = static_cast<std::uint64_t>(stream);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), 0x6f76655fu};
  return Rng(seq);
}

void sample_remaining_into(int num_classes, int excluded, int count, Rng& rng,
                           std::vector<int>& out) {
  if (num_classes < 2) {
    throw InvalidArgument("sample_remaining: need at least 2 classes");
  }
  if (excluded < 0 || excluded >= num_classes) {
    throw InvalidArgument("sample_remaining: excluded class " + std::to_string(excluded) +
                          " out of range");
  }
  const int eligible = num_classes - 1;
  if (count < 0 || count > eligible) {
    throw InvalidArgument("sample_remaining: cannot draw " + std::to_string(count) +
                          " classes from " + std::to_string(eligible) + " remaining");
  }
  out.clear();
  // Positions 0..eligible-1 map onto classes skipping `excluded`.
  auto to_class = [excluded](int pos) { return pos < excluded ? pos : pos + 1; };

  if (4 * count > eligible) {
    // Dense draw: partial Fisher-Yates over the eligible positions.
    std::vector<int> pool(eligible);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < count; ++i) {
      std::uniform_int_distribution<int> pick(i, eligible - 1);
      std::swap(pool[i], pool[pick(rng)]);
      out.push_back(to_class(pool[i]));
    }
    return;
  }
  // Sparse draw: Floyd's algorithm, O(count^2) membership checks on a tiny set.
  for (int j = eligible - count; j < eligible; ++j) {
    std::uniform_int_distribution<int> pick(0, j);
    const int t = pick(rng);
    const int ct = to_class(t);
    if (std::find(out.begin(), out.end(), ct) == out.end()) {
      out.push_back(ct);
    } else {
      out.push_back(to_class(j));
    }
  }
}

std::vector<int> sample_remaining(int num_classes, int excluded, int count, Rng& rng) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  sample_remaining_into(num_classes, excluded, count, rng, out);
  return out;
}

}  // namespace ove
