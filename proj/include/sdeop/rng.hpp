#pragma once

// Counter-based pseudo-random numbers.
//
// All randomness in this project flows through one named generator so that
// every sample is a pure function of (seed, counter).  That buys three things:
//  * paths can be generated in parallel in any order and still be
//    bit-identical to a serial run,
//  * any single draw can be reproduced without replaying a stream,
//  * seeds for sub-streams (per path, per particle, per tensor) are derived
//    by hashing instead of by partitioning one sequential stream.
//
// Algorithm.  The core is the splitmix64 finalizer
//     z = x + 0x9E3779B97F4A7C15
//     z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//     z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//     out = z ^ (z >> 31)
// The k-th 64-bit word of a stream with seed s is  mix64(s + (k+1)*GAMMA)
// with GAMMA = 0x9E3779B97F4A7C15 (the 64-bit golden ratio).  Uniforms take
// the top 53 bits; normals come from the Box-Muller transform, where normal
// draw k consumes uniform counters 2k and 2k+1.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sdeop::rng {

inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer: bijective 64-bit mix with good avalanche behaviour.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Seed for sub-stream `index` of the stream seeded by `base`.  Used for
// per-path, per-particle and per-tensor streams: derive_seed(base, i) and
// derive_seed(base, j) behave as independent seeds for i != j.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return mix64(base ^ mix64(index + kGamma));
}

// Stateless-at-heart Gaussian stream.  normal_at(k) is pure in (seed, k);
// normal() is a convenience that walks an internal counter.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // 64-bit word at `counter`.
  std::uint64_t word_at(std::uint64_t counter) const {
    return mix64(seed_ + (counter + 1) * kGamma);
  }

  // Uniform in [0, 1): top 53 bits scaled by 2^-53.
  double uniform_at(std::uint64_t counter) const {
    return static_cast<double>(word_at(counter) >> 11) * 0x1p-53;
  }

  // Uniform in (0, 1]: as above shifted up one ulp-step so log() is safe.
  double uniform_pos_at(std::uint64_t counter) const {
    return static_cast<double>((word_at(counter) >> 11) + 1) * 0x1p-53;
  }

  // Standard normal draw k via Box-Muller; consumes uniform counters 2k, 2k+1.
  double normal_at(std::uint64_t k) const {
    const double u1 = uniform_pos_at(2 * k);
    const double u2 = uniform_at(2 * k + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Sequential conveniences.  A stream should serve one draw type only
  // (normal counters overlap uniform counters by construction); use
  // derive_seed for a fresh stream when both kinds are needed.
  double normal() { return normal_at(next_++); }
  double uniform() { return uniform_at(next_++); }

  void reset() { next_ = 0; }

 private:
  std::uint64_t seed_;
  std::uint64_t next_ = 0;
};

}  // namespace sdeop::rng
