#pragma once

#include <cstdint>

namespace lfi {

/// SplitMix64 finalizer (Stafford "Mix13" variant).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// Child seed for item `index` of a stream keyed by `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(mix64(master ^ 0x6A09E667F3BCC909ULL) + (index + 1) * kGoldenGamma);
}

/// Counter-based generator: the i-th raw draw is mix64(seed + (i + 1) * gamma),
/// i.e. the SplitMix64 sequence addressed by an explicit counter. The output
/// depends only on (seed, counter), so streams are reproducible across builds.
///
/// All variate transforms below are implemented here rather than taken from
/// <random>, whose distributions are not specified bit-exactly.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) noexcept : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(seed_ + counter_ * kGoldenGamma);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }
  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), n > 0 (Lemire's multiply-shift with rejection).
  std::uint64_t uniform_index(std::uint64_t n) noexcept;

  /// Standard normal via the Marsaglia polar method; the spare is cached.
  double normal() noexcept;
  double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

  /// Exponential with the given rate (> 0).
  double exponential(double rate) noexcept;

  /// Poisson(mean): sequential inversion for mean < 10, PTRS (Hormann 1993) otherwise.
  std::int64_t poisson(double mean) noexcept;

  /// Independent child stream.
  RngStream split(std::uint64_t index) const noexcept {
    return RngStream(derive_seed(seed_, index));
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// log(k!) for k >= 0; exact table for small k, Stirling series beyond.
double log_factorial(std::int64_t k) noexcept;

}  // namespace lfi
