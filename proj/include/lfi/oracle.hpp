#pragma once

// Exact likelihoods and grid posteriors for the two models whose likelihood is
// tractable (ARCH and MA2); ground truth for posterior-accuracy evaluation.

#include <cstddef>
#include <span>
#include <vector>

#include "lfi/grid.hpp"
#include "lfi/model.hpp"

namespace lfi {

/// Covariance of (x(1), ..., x(T)) under MA(2): B B^T with its first row and
/// column deleted, where B is the (T+1)x(T+1) lower band matrix with
/// diagonals (1, theta1, theta2). Stored as its three nonzero diagonals.
class Ma2Covariance {
 public:
  Ma2Covariance(double theta1, double theta2, std::size_t T);

  std::size_t size() const noexcept { return diag_.size(); }
  double at(std::size_t i, std::size_t j) const noexcept;
  /// Row-major dense copy.
  std::vector<double> dense() const;

  std::span<const double> diag() const noexcept { return diag_; }
  std::span<const double> sub1() const noexcept { return sub1_; }
  std::span<const double> sub2() const noexcept { return sub2_; }

 private:
  std::vector<double> diag_, sub1_, sub2_;
};

Ma2Covariance ma2_covariance(double theta1, double theta2, std::size_t T);

/// Zero-mean Gaussian log-density of x under Ma2Covariance via a banded
/// Cholesky factorization. Throws a numerical error (naming theta) if the
/// factorization breaks down.
double ma2_log_likelihood(std::span<const double> x, double theta1, double theta2);

/// log of  integral phi(e0) N(x1; 0, alpha + theta2 e0^2) de0 .
///
/// The integrand is even and has complex singularities at
/// e0 = +-i sqrt(alpha/theta2); substituting e0 = s sinh(u) moves them to
/// Im u = pi/2, after which the trapezoidal rule on [0, U] converges
/// geometrically in the node count.
double arch_latent_log_integral(double x1, double theta2, std::size_t nodes = 64);

/// Exact ARCH log-likelihood with the latent e(0) integrated out.
double arch_log_likelihood(std::span<const double> x, double theta1, double theta2,
                           std::size_t nodes = 64);

struct OracleSettings {
  std::size_t quadrature_nodes = 64;
};

/// Models with an exact likelihood here: arch and ma2.
bool has_exact_likelihood(ModelId model) noexcept;

double exact_log_likelihood(ModelId model, const TimeSeries& x, std::span<const double> theta,
                            const OracleSettings& settings = {});

/// Likelihood on every in-support node, uniform prior, log-sum-exp normalized.
PosteriorGrid exact_posterior(ModelId model, const TimeSeries& x, const PriorSpec& prior,
                              std::span<const std::size_t> grid_shape,
                              const OracleSettings& settings = {}, unsigned threads = 1);

}  // namespace lfi
