#pragma once

// Data-parallel inner loops shared by the network layers and the lasso solver.
//
// Every kernel has a scalar reference implementation; vectorized variants are
// selected once at start-up from the CPU's capabilities. Variants may differ
// from the scalar reference only by floating-point reassociation.

#include <cstddef>
#include <span>
#include <string_view>

namespace lfi::simd {

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa) noexcept;

/// Best ISA supported by this CPU and this build.
Isa detect_isa() noexcept;

/// ISA currently used by the dispatching entry points below. Defaults to
/// detect_isa(); the environment variable LFI_SIMD=scalar forces the reference.
Isa active_isa() noexcept;

/// Override the dispatch target (tests). Falls back to scalar if unsupported.
void set_active_isa(Isa isa) noexcept;

// x . y
double dot(std::span<const double> x, std::span<const double> y) noexcept;
// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y) noexcept;
// sum_i w_i x_i y_i
double weighted_dot(std::span<const double> w, std::span<const double> x,
                    std::span<const double> y) noexcept;
// sum_i x_i
double sum(std::span<const double> x) noexcept;

// Raw-pointer kernel table, one per ISA. Lengths are element counts.
struct KernelTable {
  double (*dot)(const double* x, const double* y, std::size_t n) noexcept;
  void (*axpy)(double a, const double* x, double* y, std::size_t n) noexcept;
  double (*weighted_dot)(const double* w, const double* x, const double* y,
                         std::size_t n) noexcept;
  double (*sum)(const double* x, std::size_t n) noexcept;
};

const KernelTable& scalar_kernels() noexcept;
/// nullptr when the variant is not compiled into this build.
const KernelTable* avx2_kernels() noexcept;
const KernelTable* neon_kernels() noexcept;

}  // namespace lfi::simd
