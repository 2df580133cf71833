#pragma once

#include <cstdint>
#include <random>

namespace dualcap {

// Hand-rolled draws so seeded runs are identical across standard-library
// implementations (distribution classes are not portable).
inline int draw_int(std::mt19937_64& rng, int n) {
  return static_cast<int>(rng() % static_cast<std::uint64_t>(n));
}

inline double draw_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename T>
void shuffle_indices(std::vector<T>& items, std::mt19937_64& rng) {
  for (int k = static_cast<int>(items.size()) - 1; k > 0; --k) {
    std::swap(items[k], items[draw_int(rng, k + 1)]);
  }
}

}  // namespace dualcap
