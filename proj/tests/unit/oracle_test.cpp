#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "gen.hpp"
#include "lfi/error.hpp"
#include "lfi/oracle.hpp"
#include "lfi/simulators.hpp"

using namespace lfi;

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

/// Dense B B^T with the first row and column removed, built literally.
Eigen::MatrixXd ma2_dense_oracle(double t1, double t2, std::size_t T) {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(T + 1, T + 1);
  for (std::size_t i = 0; i <= T; ++i) {
    B(i, i) = 1.0;
    if (i >= 1) B(i, i - 1) = t1;
    if (i >= 2) B(i, i - 2) = t2;
  }
  const Eigen::MatrixXd full = B * B.transpose();
  return full.bottomRightCorner(T, T);
}

/// log N(x; 0, M) through an explicit inverse and determinant.
double explicit_inverse_log_density(const Eigen::MatrixXd& M, const Eigen::VectorXd& x) {
  const double quad = x.dot(M.inverse() * x);
  return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + std::log(M.determinant()) + quad);
}

/// Composite Simpson on [-8, 8] with adaptive bisection.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int depth = 0) {
  const double m = 0.5 * (a + b);
  const auto simpson = [&](double lo, double hi) {
    return (hi - lo) / 6.0 * (f(lo) + 4.0 * f(0.5 * (lo + hi)) + f(hi));
  };
  const double whole = simpson(a, b), left = simpson(a, m), right = simpson(m, b);
  if (depth > 40 || std::abs(left + right - whole) < 15.0 * tol) return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, tol / 2, depth + 1) + adaptive_simpson(f, m, b, tol / 2, depth + 1);
}

}  // namespace

TEST_CASE("ma2 covariance") {
  for (std::size_t T : {2, 5, 9}) {
    const auto I = ma2_covariance(0.0, 0.0, T);
    for (std::size_t i = 0; i < T; ++i) {
      for (std::size_t j = 0; j < T; ++j) CHECK(I.at(i, j) == (i == j ? 1.0 : 0.0));
    }
  }
  const auto m = ma2_covariance(1.0, 1.0, 3).dense();
  const std::vector<double> expected{2, 2, 1, 2, 3, 2, 1, 2, 3};
  CHECK(m == expected);
  const auto big = ma2_covariance(0.5, 0.25, 100);
  for (std::size_t t = 1; t < 100; ++t) CHECK(big.at(t, t) == 1.3125);
  CHECK(big.at(0, 0) == 1.25);

  gen::for_all(20, 3, [](gen::Gen& g, std::size_t) {
    const double t1 = g.real(-2, 2), t2 = g.real(-1, 1);
    const std::size_t T = g.size(2, 10);
    const auto ours = ma2_covariance(t1, t2, T);
    const auto ref = ma2_dense_oracle(t1, t2, T);
    for (std::size_t i = 0; i < T; ++i) {
      for (std::size_t j = 0; j < T; ++j) {
        REQUIRE(ours.at(i, j) == doctest::Approx(ref(i, j)).epsilon(1e-14));
        REQUIRE(ours.at(i, j) == ours.at(j, i));
      }
    }
  });
}

TEST_CASE("ma2 log-likelihood") {
  const std::vector<double> zero2(2, 0.0), zero3(3, 0.0);
  CHECK(ma2_log_likelihood(zero2, 0.0, 0.0) == doctest::Approx(-kLog2Pi).epsilon(1e-14));
  // det [[2,2,1],[2,3,2],[1,2,3]] = 3 by cofactor expansion.
  CHECK(ma2_dense_oracle(1.0, 1.0, 3).determinant() == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(ma2_log_likelihood(zero3, 1.0, 1.0) == doctest::Approx(-1.5 * kLog2Pi - 0.5 * std::log(3.0)).epsilon(1e-13));

  // Factorization against the explicit inverse: 50 random (theta, x), T <= 10.
  const auto prior = default_prior(ModelId::ma2);
  gen::for_all(50, 2024, [&](gen::Gen& g, std::size_t) {
    double th[2];
    do {
      th[0] = g.real(-2, 2);
      th[1] = g.real(-1, 1);
    } while (!prior.contains(th));
    const std::size_t T = g.size(2, 10);
    const auto x = g.normals(T, 1.5);
    const Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(T));
    const double ref = explicit_inverse_log_density(ma2_dense_oracle(th[0], th[1], T), xv);
    CAPTURE(th[0]);
    CAPTURE(th[1]);
    REQUIRE(std::abs(ma2_log_likelihood(x, th[0], th[1]) - ref) < 1e-10);
  });
}

TEST_CASE("arch likelihood") {
  gen::Gen g(5);
  const auto x = g.normals(100, 0.6);

  SUBCASE("theta2 = 0 collapses to a closed form") {
    for (double t1 : {-0.8, 0.0, 0.5}) {
      double closed = 0.0, prev = 0.0;
      for (double v : x) {
        const double e = v - t1 * prev;
        closed += -0.5 * (kLog2Pi + std::log(0.2) + e * e / 0.2);
        prev = v;
      }
      CHECK(std::abs(arch_log_likelihood(x, t1, 0.0) - closed) < 1e-12 * std::abs(closed));
    }
  }
  SUBCASE("quadrature self-convergence over the prior box") {
    for (int i = 0; i <= 10; ++i) {
      for (int j = 0; j <= 10; ++j) {
        const double t1 = -1.0 + 0.2 * i, t2 = 0.1 * j;
        REQUIRE(std::abs(arch_log_likelihood(x, t1, t2, 64) - arch_log_likelihood(x, t1, t2, 128)) < 1e-10);
      }
    }
    for (double x1 : {-6.0, -1.0, 0.0, 0.3, 4.0}) {
      for (double t2 : {1e-6, 0.01, 0.5, 1.0}) {
        REQUIRE(std::abs(arch_latent_log_integral(x1, t2, 64) - arch_latent_log_integral(x1, t2, 128)) < 1e-10);
      }
    }
  }
  SUBCASE("latent integral against adaptive quadrature on [-8, 8]") {
    RngStream rng(77);
    const auto obs = simulate_arch(ParameterPoint::make(ModelId::arch, {0.3, 0.7}), 100, rng);
    const double x1 = obs.at(0, 0);
    const auto integrand = [&](double e0) {
      const double var = 0.2 + 0.7 * e0 * e0;
      return std::exp(-0.5 * e0 * e0) / std::sqrt(2 * std::numbers::pi) * std::exp(-0.5 * x1 * x1 / var) /
             std::sqrt(2 * std::numbers::pi * var);
    };
    const double ref = std::log(adaptive_simpson(integrand, -8.0, 8.0, 1e-14));
    CHECK(std::abs(arch_latent_log_integral(x1, 0.7) - ref) < 1e-8);
  }
  SUBCASE("negative theta2 is a domain error") {
    CHECK_THROWS_AS(arch_log_likelihood(x, 0.1, -0.2), Error);
  }
}

TEST_CASE("exact posteriors normalize") {
  const std::size_t shape[2] = {20, 20};
  for (ModelId model : {ModelId::arch, ModelId::ma2}) {
    CAPTURE(to_string(model));
    const Simulator sim(model);
    const auto prior = default_prior(model);
    const auto batch = generate_training_set(sim, prior, 3, 8);
    for (const auto& x : batch.series) {
      const auto post = exact_posterior(model, x, prior, shape);
      double total = 0.0;
      for (std::size_t i = 0; i < post.masses.size(); ++i) {
        REQUIRE(post.masses[i] >= 0.0);
        if (!prior.contains(post.grid.node(i))) REQUIRE(post.masses[i] == 0.0);
        total += post.masses[i];
      }
      CHECK(std::abs(total - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("posterior masses ignore a common likelihood factor") {
  const auto prior = default_prior(ModelId::arch);
  const auto grid = GridSpec::spanning(prior, std::vector<std::size_t>{7, 5});
  gen::Gen g(12);
  std::vector<double> logw = g.reals(grid.size(), -800.0, -700.0);
  const auto a = normalize_log_weights(ModelId::arch, prior, grid, logw);
  for (double& v : logw) v += 523.25;
  const auto b = normalize_log_weights(ModelId::arch, prior, grid, logw);
  for (std::size_t i = 0; i < a.masses.size(); ++i) CHECK(std::abs(a.masses[i] - b.masses[i]) < 1e-12);
  std::vector<double> dead(grid.size(), -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(normalize_log_weights(ModelId::arch, prior, grid, dead), Error);
}

TEST_CASE("ma2 exact posterior concentrates near the truth for long series") {
  const auto prior = default_prior(ModelId::ma2);
  const std::size_t shape[2] = {20, 20};
  std::size_t close = 0;
  for (std::uint64_t task = 0; task < 20; ++task) {
    RngStream rng(derive_seed(555, task));
    const auto x = simulate_ma2(ParameterPoint::make(ModelId::ma2, {0.6, 0.2}), 1000, rng);
    const auto post = exact_posterior(ModelId::ma2, x, prior, shape);
    double m0 = 0.0, m1 = 0.0;
    for (std::size_t i = 0; i < post.masses.size(); ++i) {
      const auto node = post.grid.node(i);
      m0 += post.masses[i] * node[0];
      m1 += post.masses[i] * node[1];
    }
    close += std::abs(m0 - 0.6) < 0.1 && std::abs(m1 - 0.2) < 0.1;
  }
  CHECK(close >= 18);
}
