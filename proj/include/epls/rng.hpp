#ifndef EPLS_RNG_HPP
#define EPLS_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace epls {

// Every source of randomness in the library goes through these helpers on a
// std::mt19937_64 engine. The standard distributions are implementation
// defined, so the bit mappings live here: identical seeds give identical
// artifacts on any platform.

// Stream tags keep independent RNG consumers from perturbing each other,
// e.g. changing the dictionary width must not change the shuffle order.
enum class RngStream : std::uint64_t {
  Init = 1,
  Shuffle = 2,
  Curvature = 3,
  Patches = 4,
  Synthetic = 5,
  Bench = 6,
};

inline std::mt19937_64 seeded_stream(std::uint64_t seed, RngStream stream) {
  const std::uint64_t tag = static_cast<std::uint64_t>(stream) * 0x9e3779b97f4a7c15ull;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  return std::mt19937_64(seq);
}

// Uniform in [0, 1), 53 mantissa bits.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

// Unbiased integer in [0, n).
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

// Box-Muller; consumes two draws per sample, no cached state.
inline double gaussian(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform_unit(rng);  // (0, 1]
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

template <typename T>
void fisher_yates(std::vector<T>& values, std::mt19937_64& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::uint64_t j = uniform_index(rng, i);
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace epls

#endif
