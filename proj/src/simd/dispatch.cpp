#include <atomic>
#include <cstdlib>
#include <string>

#include "lfi/simd/kernels.hpp"

namespace lfi::simd {
namespace {

const KernelTable* table_for(Isa isa) noexcept {
  switch (isa) {
    case Isa::avx2: return avx2_kernels();
    case Isa::neon: return neon_kernels();
    case Isa::scalar: break;
  }
  return &scalar_kernels();
}

Isa initial_isa() noexcept {
  if (const char* env = std::getenv("LFI_SIMD"); env && std::string(env) == "scalar") {
    return Isa::scalar;
  }
  return detect_isa();
}

struct Dispatch {
  std::atomic<const KernelTable*> table;
  std::atomic<Isa> isa;
  Dispatch() : table(nullptr), isa(initial_isa()) { table.store(table_for(isa.load())); }
};

Dispatch& dispatch() noexcept {
  static Dispatch d;
  return d;
}

inline const KernelTable& k() noexcept { return *dispatch().table.load(std::memory_order_relaxed); }

}  // namespace

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "scalar";
}

Isa detect_isa() noexcept {
#if defined(__x86_64__) || defined(_M_X64)
  if (avx2_kernels() && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return Isa::avx2;
  }
#elif defined(__aarch64__)
  if (neon_kernels()) return Isa::neon;
#endif
  return Isa::scalar;
}

Isa active_isa() noexcept { return dispatch().isa.load(); }

void set_active_isa(Isa isa) noexcept {
  const KernelTable* t = table_for(isa);
  if (t == nullptr || (isa != Isa::scalar && detect_isa() != isa)) {
    isa = Isa::scalar;
    t = &scalar_kernels();
  }
  dispatch().table.store(t);
  dispatch().isa.store(isa);
}

double dot(std::span<const double> x, std::span<const double> y) noexcept {
  return k().dot(x.data(), y.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) noexcept {
  k().axpy(a, x.data(), y.data(), x.size());
}

double weighted_dot(std::span<const double> w, std::span<const double> x,
                    std::span<const double> y) noexcept {
  return k().weighted_dot(w.data(), x.data(), y.data(), w.size());
}

double sum(std::span<const double> x) noexcept { return k().sum(x.data(), x.size()); }

}  // namespace lfi::simd
