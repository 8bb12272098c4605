#include "lfi/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "lfi/error.hpp"
#include "lfi/parallel.hpp"
#include "lfi/simulators.hpp"

namespace lfi {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

inline double log_normal_pdf(double x, double var) {
  return -0.5 * (kLog2Pi + std::log(var) + x * x / var);
}

std::string theta_str(double a, double b) {
  return "theta=(" + std::to_string(a) + ", " + std::to_string(b) + ")";
}

}  // namespace

Ma2Covariance::Ma2Covariance(double theta1, double theta2, std::size_t T) {
  if (T < 1) fail(ErrorKind::configuration, "ma2 covariance needs T >= 1");
  diag_.assign(T, 1.0 + theta1 * theta1 + theta2 * theta2);
  diag_[0] = 1.0 + theta1 * theta1;  // row of x(1) has no e(-1) term
  sub1_.assign(T - 1, theta1 + theta1 * theta2);
  sub2_.assign(T >= 2 ? T - 2 : 0, theta2);
}

double Ma2Covariance::at(std::size_t i, std::size_t j) const noexcept {
  const std::size_t lo = std::min(i, j);
  switch (std::max(i, j) - lo) {
    case 0: return diag_[lo];
    case 1: return sub1_[lo];
    case 2: return sub2_[lo];
    default: return 0.0;
  }
}

std::vector<double> Ma2Covariance::dense() const {
  const std::size_t n = size();
  std::vector<double> m(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m[i * n + j] = at(i, j);
  }
  return m;
}

Ma2Covariance ma2_covariance(double theta1, double theta2, std::size_t T) {
  return Ma2Covariance(theta1, theta2, T);
}

double ma2_log_likelihood(std::span<const double> x, double theta1, double theta2) {
  const std::size_t T = x.size();
  const Ma2Covariance m(theta1, theta2, T);
  // Banded Cholesky M = L L^T with bandwidth 2, fused with the forward solve L z = x.
  double l_prev2_diag = 0.0, l_prev1_diag = 0.0;  // L[i-2][i-2], L[i-1][i-1]
  double l_prev1_sub1 = 0.0;                      // L[i-1][i-2]
  double z_prev2 = 0.0, z_prev1 = 0.0;
  double log_det_half = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < T; ++i) {
    const double s2 = i >= 2 ? m.sub2()[i - 2] / l_prev2_diag : 0.0;
    const double s1 = i >= 1 ? (m.sub1()[i - 1] - s2 * l_prev1_sub1) / l_prev1_diag : 0.0;
    const double d2 = m.diag()[i] - s1 * s1 - s2 * s2;
    if (!(d2 > 0.0) || !std::isfinite(d2)) {
      fail(ErrorKind::numerical, "ma2 covariance is not positive definite at " + theta_str(theta1, theta2));
    }
    const double d = std::sqrt(d2);
    const double z = (x[i] - s1 * z_prev1 - s2 * z_prev2) / d;
    log_det_half += std::log(d);
    quad += z * z;
    l_prev2_diag = l_prev1_diag;
    l_prev1_diag = d;
    l_prev1_sub1 = s1;
    z_prev2 = z_prev1;
    z_prev1 = z;
  }
  return -0.5 * static_cast<double>(T) * kLog2Pi - log_det_half - 0.5 * quad;
}

double arch_latent_log_integral(double x1, double theta2, std::size_t nodes) {
  if (theta2 < 0.0) fail(ErrorKind::domain, "arch: theta2 < 0 gives a negative variance");
  if (theta2 == 0.0) return log_normal_pdf(x1, kArchAlpha);
  if (nodes < 2) fail(ErrorKind::configuration, "arch quadrature needs at least 2 nodes");
  const double s = std::min(std::sqrt(kArchAlpha / theta2), 4.0);
  const double peak = std::pow(x1 * x1 / theta2, 0.25);
  const double extent = std::max(10.0, peak + 8.0);
  const double u_max = std::asinh(extent / s);
  const double h = u_max / static_cast<double>(nodes - 1);
  std::vector<double> lf(nodes);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < nodes; ++k) {
    const double u = h * static_cast<double>(k);
    const double e = s * std::sinh(u);
    const double var = kArchAlpha + theta2 * e * e;
    lf[k] = -0.5 * (kLog2Pi + e * e) + log_normal_pdf(x1, var) + std::log(s * std::cosh(u));
    top = std::max(top, lf[k]);
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < nodes; ++k) {
    const double w = (k == 0 || k + 1 == nodes) ? 0.5 : 1.0;
    acc += w * std::exp(lf[k] - top);
  }
  return top + std::log(2.0 * h * acc);
}

double arch_log_likelihood(std::span<const double> x, double theta1, double theta2,
                           std::size_t nodes) {
  if (theta2 < 0.0) fail(ErrorKind::domain, "arch: theta2 < 0 gives a negative variance");
  if (x.empty()) return 0.0;
  double ll = arch_latent_log_integral(x[0], theta2, nodes);
  double e_prev = x[0];
  for (std::size_t t = 1; t < x.size(); ++t) {
    const double e = x[t] - theta1 * x[t - 1];
    ll += log_normal_pdf(e, kArchAlpha + theta2 * e_prev * e_prev);
    e_prev = e;
  }
  return ll;
}

bool has_exact_likelihood(ModelId model) noexcept {
  return model == ModelId::arch || model == ModelId::ma2;
}

double exact_log_likelihood(ModelId model, const TimeSeries& x, std::span<const double> theta,
                            const OracleSettings& settings) {
  if (x.channels() != 1) fail(ErrorKind::configuration, "exact likelihood expects a single channel");
  switch (model) {
    case ModelId::arch: return arch_log_likelihood(x.channel(0), theta[0], theta[1], settings.quadrature_nodes);
    case ModelId::ma2: return ma2_log_likelihood(x.channel(0), theta[0], theta[1]);
    default:
      fail(ErrorKind::configuration,
           "no exact likelihood for model '" + std::string(to_string(model)) + "'");
  }
}

PosteriorGrid exact_posterior(ModelId model, const TimeSeries& x, const PriorSpec& prior,
                              std::span<const std::size_t> grid_shape, const OracleSettings& settings,
                              unsigned threads) {
  if (!has_exact_likelihood(model)) {
    fail(ErrorKind::configuration, "no exact posterior for model '" + std::string(to_string(model)) + "'");
  }
  const GridSpec grid = GridSpec::spanning(prior, grid_shape);
  std::vector<double> logw(grid.size(), -std::numeric_limits<double>::infinity());
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    const auto theta = grid.node(i);
    if (prior.contains(theta)) logw[i] = exact_log_likelihood(model, x, theta, settings);
  });
  return normalize_log_weights(model, prior, grid, logw);
}

}  // namespace lfi
