#include "lfi/rng.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace lfi {
namespace {

constexpr int kFactorialTableSize = 128;

std::array<double, kFactorialTableSize> make_log_factorial_table() {
  std::array<double, kFactorialTableSize> t{};
  t[0] = 0.0;
  for (int k = 1; k < kFactorialTableSize; ++k) t[k] = t[k - 1] + std::log(static_cast<double>(k));
  return t;
}

const std::array<double, kFactorialTableSize>& log_factorial_table() {
  static const auto table = make_log_factorial_table();
  return table;
}

}  // namespace

double log_factorial(std::int64_t k) noexcept {
  if (k < kFactorialTableSize) return log_factorial_table()[static_cast<std::size_t>(k)];
  // Stirling series; the truncation error at k >= 128 is far below 1 ulp.
  const double x = static_cast<double>(k) + 1.0;
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) +
         inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) noexcept {
  std::uint64_t x = next_u64();
  unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<unsigned __int128>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double RngStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

double RngStream::exponential(double rate) noexcept {
  return -std::log(uniform_open()) / rate;
}

std::int64_t RngStream::poisson(double mean) noexcept {
  if (!(mean > 0.0)) return 0;
  if (mean < 10.0) {
    // Inversion by sequential search.
    double p = std::exp(-mean);
    double cdf = p;
    const double u = uniform();
    std::int64_t k = 0;
    while (u > cdf) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
      if (p < 1e-300 && cdf >= 1.0 - 1e-15) break;
    }
    return k;
  }
  // PTRS: transformed rejection with squeeze.
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform() - 0.5;
    const double v = uniform_open();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    const auto k = static_cast<std::int64_t>(kf);
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + kf * loglam - log_factorial(k)) {
      return k;
    }
  }
}

}  // namespace lfi
