#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hsd {

using Rng = std::mt19937_64;

// Mixes a base seed with a named stream and an index so that independent
// consumers (env, exploration, replay sampling, ...) never share a sequence.
uint64_t derive_seed(uint64_t base, std::string_view stream, uint64_t index = 0);

inline Rng make_rng(uint64_t base, std::string_view stream, uint64_t index = 0) {
  return Rng(derive_seed(base, stream, index));
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int n) {
  return std::uniform_int_distribution<int>(0, n - 1)(rng);
}

}  // namespace hsd
