// Seeded RNG with explicit bit-to-double conversion, so streams are
// reproducible across standard library implementations.
#pragma once

#include <cstdint>
#include <random>

namespace taxisim {

struct Rng {
  std::mt19937_64 eng;

  explicit Rng(std::uint64_t seed) : eng(seed) {}

  double uniform01() {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(eng() % static_cast<std::uint64_t>(hi - lo + 1));
  }
};

}  // namespace taxisim
