#pragma once

// Counter-based random streams for the simulator. Every draw is a pure
// function of (seed, counter), so any record can be regenerated in isolation
// and iterations may run in any order or on any number of threads.
//
//   mix64(z):  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//              z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//              return z ^ (z >> 31)
//
//   record seed:  key  = mix64(master_seed + 0x9E3779B97F4A7C15 * star_level)
//                 seed = mix64(key ^ (0xD1B54A32D192ED03 * (index + 1)))
//
//   k-th word:    mix64(seed + 0x9E3779B97F4A7C15 * (k + 1))     (k = 0, 1, ...)
//   uniform:      ((word >> 11) + 0.5) * 2^-53                   in (0, 1)
//   normals:      Box-Muller on consecutive uniforms (u1, u2):
//                 r = sqrt(-2 ln u1), z0 = r cos(2 pi u2), z1 = r sin(2 pi u2)
//                 z0 is returned first, then z1, then the next pair.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace pcf {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kIndexMultiplier = 0xD1B54A32D192ED03ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t record_seed(std::uint64_t master_seed, std::uint64_t star_level,
                                    std::uint64_t index) noexcept {
  const std::uint64_t key = mix64(master_seed + kGoldenGamma * star_level);
  return mix64(key ^ (kIndexMultiplier * (index + 1)));
}

class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  constexpr std::uint64_t next_u64() noexcept { return mix64(seed_ + kGoldenGamma * ++counter_); }

  /// Uniform on the open interval (0, 1).
  constexpr double next_uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  [[nodiscard]] constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pcf
