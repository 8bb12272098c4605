#include "lfi/simd/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

namespace lfi::simd {
namespace {

double dot_neon(const double* x, const double* y, std::size_t n) noexcept {
  float64x2_t a0 = vdupq_n_f64(0.0);
  float64x2_t a1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    a0 = vfmaq_f64(a0, vld1q_f64(x + i), vld1q_f64(y + i));
    a1 = vfmaq_f64(a1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(a0, a1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) noexcept {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

double weighted_dot_neon(const double* w, const double* x, const double* y,
                         std::size_t n) noexcept {
  float64x2_t a0 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    a0 = vfmaq_f64(a0, vmulq_f64(vld1q_f64(w + i), vld1q_f64(x + i)), vld1q_f64(y + i));
  }
  double acc = vaddvq_f64(a0);
  for (; i < n; ++i) acc += w[i] * x[i] * y[i];
  return acc;
}

double sum_neon(const double* x, std::size_t n) noexcept {
  float64x2_t a0 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) a0 = vaddq_f64(a0, vld1q_f64(x + i));
  double acc = vaddvq_f64(a0);
  for (; i < n; ++i) acc += x[i];
  return acc;
}

constexpr KernelTable kNeon{dot_neon, axpy_neon, weighted_dot_neon, sum_neon};

}  // namespace

const KernelTable* neon_kernels() noexcept { return &kNeon; }

}  // namespace lfi::simd

#else

namespace lfi::simd {
const KernelTable* neon_kernels() noexcept { return nullptr; }
}  // namespace lfi::simd

#endif
