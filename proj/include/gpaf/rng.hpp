#pragma once

#include <cstdint>
#include <limits>

namespace gpaf {

/// Stateless 64-bit finalizer (SplitMix64 mixing function).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: the i-th output is mix64(key + i * golden).
///
/// Streams with different keys are independent for all practical purposes,
/// and a stream can be repositioned by setting the counter. Satisfies
/// UniformRandomBitGenerator so it plugs into <random> distributions.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t key = 0, std::uint64_t counter = 0) noexcept
      : key_(key), counter_(counter) {}

  /// Stream for replica `r` of an ensemble seeded with `seed`.
  static Rng for_replica(std::uint64_t seed, std::uint64_t r) noexcept {
    return Rng(seed ^ mix64(r + 0x632BE59BD9B4E019ULL));
  }

  /// Independent child stream, e.g. for a sub-task of this stream's owner.
  Rng split(std::uint64_t tag) const noexcept {
    return Rng(mix64(key_ ^ mix64(tag + 0x8CB92BA72F3D8DD7ULL)));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    return mix64(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound), bound > 0 (Lemire's method).
  std::uint64_t below(std::uint64_t bound) noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace gpaf
