#include "lfi/simd/kernels.hpp"

namespace lfi::simd {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double weighted_dot_scalar(const double* w, const double* x, const double* y,
                           std::size_t n) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * x[i] * y[i];
  return acc;
}

double sum_scalar(const double* x, std::size_t n) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

constexpr KernelTable kScalar{dot_scalar, axpy_scalar, weighted_dot_scalar, sum_scalar};

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kScalar; }

}  // namespace lfi::simd
