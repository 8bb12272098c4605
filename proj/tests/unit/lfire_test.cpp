#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "gen.hpp"
#include "lfi/error.hpp"
#include "lfi/lfire/features.hpp"
#include "lfi/lfire/posterior.hpp"
#include "lfi/lfire/ratio.hpp"
#include "lfi/simulators.hpp"

using namespace lfi;
using namespace lfi::lfire;

namespace {

using Rows = std::vector<std::vector<double>>;

/// Two Gaussian classes in one raw feature, expanded to (x, x^2, 1).
ClassificationSets gaussian_sets(std::size_t n_theta, std::size_t n_marginal, double shift, std::uint64_t seed) {
  RngStream rng(seed);
  Rows a, b;
  for (std::size_t i = 0; i < n_theta; ++i) {
    const double x = shift + rng.normal();
    a.push_back({x, x * x, 1.0});
  }
  for (std::size_t i = 0; i < n_marginal; ++i) {
    const double x = rng.normal();
    b.push_back({x, x * x, 1.0});
  }
  return {std::move(a), std::move(b)};
}

/// Random overlapping classes with p - 1 raw features plus the constant.
ClassificationSets random_sets(gen::Gen& g, std::size_t p, std::size_t n_theta, std::size_t n_marginal) {
  const auto shift = g.normals(p - 1, 0.7);
  const auto scale = g.reals(p - 1, 0.3, 3.0);
  const auto draw = [&](bool theta_class) {
    std::vector<double> r(p, 1.0);
    for (std::size_t k = 0; k + 1 < p; ++k) r[k] = scale[k] * (g.normal() + (theta_class ? shift[k] : 0.0));
    return r;
  };
  Rows a, b;
  for (std::size_t i = 0; i < n_theta; ++i) a.push_back(draw(true));
  for (std::size_t i = 0; i < n_marginal; ++i) b.push_back(draw(false));
  return {std::move(a), std::move(b)};
}

/// Nelder-Mead with restarts. Independent of the coordinate-descent solver.
template <class F>
double nelder_mead_min(F&& f, std::vector<double> start, double step) {
  const std::size_t p = start.size();
  double best = f(start);
  for (int restart = 0; restart < 6; ++restart) {
    std::vector<std::vector<double>> s(p + 1, start);
    for (std::size_t k = 0; k < p; ++k) s[k + 1][k] += step;
    std::vector<double> fv(p + 1);
    for (std::size_t i = 0; i <= p; ++i) fv[i] = f(s[i]);
    for (int iter = 0; iter < 4000; ++iter) {
      std::vector<std::size_t> order(p + 1);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
      const std::size_t lo = order.front(), hi = order.back(), second = order[p - 1];
      std::vector<double> centroid(p, 0.0);
      for (std::size_t i = 0; i <= p; ++i) {
        if (i == hi) continue;
        for (std::size_t k = 0; k < p; ++k) centroid[k] += s[i][k] / static_cast<double>(p);
      }
      const auto along = [&](double t) {
        std::vector<double> x(p);
        for (std::size_t k = 0; k < p; ++k) x[k] = centroid[k] + t * (s[hi][k] - centroid[k]);
        return x;
      };
      const auto xr = along(-1.0);
      const double fr = f(xr);
      if (fr < fv[lo]) {
        const auto xe = along(-2.0);
        const double fe = f(xe);
        if (fe < fr) s[hi] = xe, fv[hi] = fe;
        else s[hi] = xr, fv[hi] = fr;
      } else if (fr < fv[second]) {
        s[hi] = xr, fv[hi] = fr;
      } else {
        const auto xc = along(0.5);
        const double fc = f(xc);
        if (fc < fv[hi]) {
          s[hi] = xc, fv[hi] = fc;
        } else {
          for (std::size_t i = 0; i <= p; ++i) {
            if (i == lo) continue;
            for (std::size_t k = 0; k < p; ++k) s[i][k] = s[lo][k] + 0.5 * (s[i][k] - s[lo][k]);
            fv[i] = f(s[i]);
          }
        }
      }
    }
    const auto it = std::min_element(fv.begin(), fv.end());
    start = s[static_cast<std::size_t>(it - fv.begin())];
    best = std::min(best, *it);
    step *= 0.3;
  }
  return best;
}

std::size_t nonzeros(const std::vector<double>& beta) {
  return static_cast<std::size_t>(std::count_if(beta.begin(), beta.end() - 1, [](double v) { return v != 0.0; }));
}

}  // namespace

TEST_CASE("expand_features") {
  const std::vector<double> s{0.3, 0.7};
  const auto f = expand_features(s);
  const std::vector<double> expected{0.3, 0.7, 0.09, 0.21, 0.49, 1.0};
  REQUIRE(f.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(f[i] == doctest::Approx(expected[i]).epsilon(1e-15));
  for (std::size_t d : {1, 2, 3, 5, 8}) {
    CHECK(expand_features(std::vector<double>(d, 0.5)).size() == d + d * (d + 1) / 2 + 1);
    CHECK(expanded_size(d) == d + d * (d + 1) / 2 + 1);
    const auto z = expand_features(std::vector<double>(d, 0.0));
    CHECK(z.back() == 1.0);
    CHECK(std::all_of(z.begin(), z.end() - 1, [](double v) { return v == 0.0; }));
  }
}

TEST_CASE("manual summaries") {
  SUBCASE("constant series has zero autocorrelation") {
    TimeSeries x(1, 100);
    for (std::size_t t = 0; t < 100; ++t) x.at(0, t) = 2.5;
    const auto s = manual_summaries(ModelId::ma2, x);
    REQUIRE(s.size() == 2);
    CHECK(s[0] == 0.0);
    CHECK(s[1] == 0.0);
  }
  SUBCASE("arch white noise is uncorrelated") {
    RngStream rng(31);
    const auto x = simulate_arch(ParameterPoint::make(ModelId::arch, {0.0, 0.0}), 100000, rng);
    const auto s = manual_summaries(ModelId::arch, x);
    REQUIRE(s.size() == 10);
    CHECK(std::abs(s[5]) < 0.01);  // lag-1 autocorrelation
  }
  SUBCASE("ma2 lag-1 autocorrelation matches the stationary formula") {
    RngStream rng(32);
    const auto x = simulate_ma2(ParameterPoint::make(ModelId::ma2, {1.0, 1.0}), 100000, rng);
    const auto s = manual_summaries(ModelId::ma2, x);
    CHECK(std::abs(s[0] - 2.0 / 3.0) < 0.02);
    CHECK(std::abs(s[1] - 1.0 / 3.0) < 0.02);
  }
  SUBCASE("summary lengths") {
    RngStream rng(33);
    const Simulator lv(ModelId::lotka_volterra);
    CHECK(manual_summaries(ModelId::lotka_volterra, lv(ParameterPoint::make(ModelId::lotka_volterra, {1.0, 0.01, 0.5}), rng)).size() == 100);
    const Simulator lorenz(ModelId::lorenz96);
    CHECK(manual_summaries(ModelId::lorenz96, lorenz(ParameterPoint::make(ModelId::lorenz96, {2.0, 0.1}), rng)).size() == 6);
    CHECK_THROWS_AS(manual_summaries(ModelId::ricker, TimeSeries(1, 50)), Error);
  }
}

TEST_CASE("logistic loss") {
  SUBCASE("zero coefficients with balanced classes give log 2") {
    const ClassificationSets sets(Rows(7, {0.4, 1.0}), Rows(7, {-1.0, 1.0}));
    CHECK(logistic_loss(std::vector<double>{0.0, 0.0}, sets, 0.3) == std::log(2.0));
  }
  SUBCASE("zero coefficients with nu = 4") {
    const ClassificationSets sets(Rows(100, {1.0}), Rows(400, {1.0}));
    const double expected = (100 * std::log(5.0) + 400 * std::log(1.25)) / 500;
    CHECK(logistic_loss(std::vector<double>{0.0}, sets, 0.0) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(expected == doctest::Approx(0.50040).epsilon(1e-5));
  }
  SUBCASE("gradient matches central differences") {
    gen::for_all(20, 41, [](gen::Gen& g, std::size_t) {
      const std::size_t p = g.size(1, 5);
      const auto sets = random_sets(g, p, g.size(3, 40), g.size(3, 40));
      auto beta = g.normals(p, 0.5);
      const auto grad = logistic_loss_gradient(beta, sets);
      for (std::size_t k = 0; k < p; ++k) {
        const double keep = beta[k], h = 1e-6;
        beta[k] = keep + h;
        const double up = logistic_loss(beta, sets, 0.0);
        beta[k] = keep - h;
        const double down = logistic_loss(beta, sets, 0.0);
        beta[k] = keep;
        REQUIRE(std::abs((up - down) / (2 * h) - grad[k]) < 1e-6);
      }
    });
  }
  SUBCASE("extreme margins stay finite") {
    const ClassificationSets sets(Rows(3, {1.0}), Rows(3, {1.0}));
    CHECK(std::isfinite(logistic_loss(std::vector<double>{800.0}, sets, 0.0)));
    CHECK(std::isfinite(logistic_loss(std::vector<double>{-800.0}, sets, 0.0)));
  }
  SUBCASE("convex in the coefficients") {
    gen::for_all(30, 42, [](gen::Gen& g, std::size_t) {
      const std::size_t p = g.size(1, 6);
      const auto sets = random_sets(g, p, 20, 25);
      const auto b1 = g.normals(p, 2.0), b2 = g.normals(p, 2.0);
      std::vector<double> mid(p);
      for (std::size_t k = 0; k < p; ++k) mid[k] = 0.5 * (b1[k] + b2[k]);
      const double lambda = g.real(0.0, 0.5);
      REQUIRE(logistic_loss(mid, sets, lambda) <=
              0.5 * logistic_loss(b1, sets, lambda) + 0.5 * logistic_loss(b2, sets, lambda) + 1e-12);
    });
  }
  SUBCASE("dimension mismatch") {
    const ClassificationSets sets(Rows(3, {1.0, 2.0}), Rows(3, {1.0, 0.0}));
    CHECK_THROWS_AS(logistic_loss(std::vector<double>{0.0}, sets, 0.0), Error);
    CHECK_THROWS_AS(ClassificationSets(Rows{}, Rows(2, {1.0})), Error);
  }
}

TEST_CASE("lasso fits") {
  SUBCASE("intercept only with balanced classes gives zero") {
    const ClassificationSets sets(Rows(50, {1.0}), Rows(50, {1.0}));
    const auto m = fit_ratio(sets);
    REQUIRE(m.beta.size() == 1);
    CHECK(std::abs(m.beta[0]) < 1e-12);
  }
  SUBCASE("lambda at or above lambda_max zeroes every penalized coefficient") {
    gen::for_all(10, 51, [](gen::Gen& g, std::size_t) {
      const auto sets = random_sets(g, g.size(2, 6), 60, 60);
      const auto path = lasso_path(sets);
      for (double factor : {1.0, 3.0}) {
        const auto m = fit_at_lambda(sets, factor * path.lambda_max);
        for (std::size_t k = 0; k + 1 < m.beta.size(); ++k) REQUIRE(m.beta[k] == 0.0);
      }
    });
  }
  SUBCASE("nonzero count grows along the descending path") {
    gen::for_all(10, 52, [](gen::Gen& g, std::size_t) {
      const auto sets = random_sets(g, g.size(3, 7), 80, 80);
      FitOptions opt;
      opt.early_path_stop = false;
      const auto path = lasso_path(sets, opt);
      REQUIRE(path.lambdas.size() == opt.path_length);
      for (std::size_t i = 1; i < path.betas.size(); ++i) {
        REQUIRE(path.lambdas[i] < path.lambdas[i - 1]);
        REQUIRE(nonzeros(path.betas[i]) >= nonzeros(path.betas[i - 1]));
      }
    });
  }
  SUBCASE("coordinate descent matches Nelder-Mead on small problems") {
    gen::for_all(12, 53, [](gen::Gen& g, std::size_t) {
      const std::size_t p = g.size(1, 3);
      const auto sets = random_sets(g, p, g.size(20, 60), g.size(20, 60));
      FitOptions opt;
      opt.standardize = false;  // penalty on the same scale as logistic_loss
      const double lambda = g.coin() ? 0.0 : g.real(0.001, 0.1);
      const auto m = fit_at_lambda(sets, lambda, opt);
      const double ours = logistic_loss(m.beta, sets, lambda);
      const double brute = nelder_mead_min([&](const std::vector<double>& b) { return logistic_loss(b, sets, lambda); },
                                           std::vector<double>(p, 0.0), 1.0);
      CAPTURE(lambda);
      REQUIRE(ours <= brute + 1e-3);
      REQUIRE(std::abs(ours - brute) < 1e-3);
    });
  }
  SUBCASE("standardized and original coordinates predict the same") {
    gen::for_all(10, 54, [](gen::Gen& g, std::size_t) {
      const std::size_t p = g.size(2, 6);
      const auto sets = random_sets(g, p, 50, 50);
      FitOptions opt;
      opt.folds = 5;
      opt.fold_seed = 9;
      const auto m = fit_ratio(sets, opt);
      for (int k = 0; k < 20; ++k) {
        auto psi = g.normals(p, 2.0);
        psi.back() = 1.0;
        REQUIRE(std::abs(log_ratio(m, psi) - log_ratio_standardized(m, psi)) < 1e-10);
      }
    });
  }
  SUBCASE("selected lambda lies on the path") {
    gen::Gen g(55);
    const auto sets = random_sets(g, 4, 60, 60);
    FitOptions opt;
    opt.folds = 5;
    const auto m = fit_ratio(sets, opt);
    const auto path = lasso_path(sets, opt);
    REQUIRE(m.lambda_index < path.lambdas.size());
    CHECK(m.lambda == path.lambdas[m.lambda_index]);
    CHECK(!m.cv_curve.empty());
    for (double b : m.beta) CHECK(std::isfinite(b));
  }
  SUBCASE("fewer items than folds is a configuration error") {
    const ClassificationSets sets(Rows(3, {0.1, 1.0}), Rows(3, {0.2, 1.0}));
    CHECK_THROWS_AS(fit_ratio(sets), Error);
  }
}

TEST_CASE("gaussian log-ratio recovery") {
  const auto sets = gaussian_sets(20000, 20000, 1.0, 61);
  const auto m = fit_at_lambda(sets, 0.0);
  // log N(x; 1, 1) - log N(x; 0, 1) = x - 1/2
  CHECK(std::abs(m.beta[0] - 1.0) < 0.1);
  CHECK(std::abs(m.beta[1]) < 0.1);
  CHECK(std::abs(m.beta[2] + 0.5) < 0.1);
  CHECK(std::abs(log_ratio(m, std::vector<double>{2.0, 4.0, 1.0}) - 1.5) < 0.1);
}

TEST_CASE("log_ratio") {
  RatioModel m;
  m.beta = {0.0, 0.0, 0.0};
  CHECK(log_ratio(m, std::vector<double>{3.0, -1.0, 1.0}) == 0.0);
  m.beta = {0.0, 0.0, 1.0};
  CHECK(log_ratio(m, std::vector<double>{3.0, -1.0, 1.0}) == 1.0);
  CHECK_THROWS_AS(log_ratio(m, std::vector<double>{1.0, 1.0}), Error);
}

TEST_CASE("lfire posterior") {
  const Simulator sim(ModelId::arch);
  const auto prior = default_prior(ModelId::arch);
  const std::size_t shape[2] = {5, 4};
  LfireSettings settings;
  settings.n_theta = 30;
  settings.n_marginal = 30;
  settings.fit.folds = 5;
  settings.fit.path_length = 20;

  SUBCASE("constant summary reproduces the discretized prior") {
    for (ModelId model : {ModelId::arch, ModelId::ma2}) {
      const Simulator s(model);
      const auto pr = default_prior(model);
      const auto bank = build_ratio_bank(s, pr, shape, FeatureMap::constant(), settings, 71);
      const auto post = bank.posterior(std::vector<double>{1.0});
      std::size_t inside = 0;
      for (std::size_t i = 0; i < post.grid.size(); ++i) inside += pr.contains(post.grid.node(i));
      double total = 0.0;
      for (std::size_t i = 0; i < post.masses.size(); ++i) {
        const double expect = pr.contains(post.grid.node(i)) ? 1.0 / static_cast<double>(inside) : 0.0;
        CHECK(std::abs(post.masses[i] - expect) < 1e-10);
        total += post.masses[i];
      }
      CHECK(std::abs(total - 1.0) < 1e-12);
    }
  }
  SUBCASE("manual summaries give a normalized posterior that saves and loads") {
    RngStream rng(72);
    const auto x = simulate_arch(ParameterPoint::make(ModelId::arch, {0.5, 0.3}), 100, rng);
    const auto features = FeatureMap::manual(ModelId::arch);
    const auto bank = build_ratio_bank(sim, prior, shape, features, settings, 73);
    const auto post = bank.posterior(features(x));
    CHECK(std::abs(std::accumulate(post.masses.begin(), post.masses.end(), 0.0) - 1.0) < 1e-12);

    const auto same = lfire_posterior(x, prior, shape, sim, features, settings, 73);
    CHECK(same.masses == post.masses);

    const auto path = std::filesystem::temp_directory_path() / "lfi_bank_test.json";
    save_ratio_bank(bank, path);
    const auto back = load_ratio_bank(path);
    CHECK(back.posterior(features(x)).masses == post.masses);
    std::filesystem::remove(path);

    auto scaled = post;
    for (double& v : scaled.masses) v *= 37.5;
    CHECK(scaled.argmax() == post.argmax());
  }
  SUBCASE("bank does not depend on the thread count") {
    const auto features = FeatureMap::manual(ModelId::arch);
    const auto a = build_ratio_bank(sim, prior, shape, features, settings, 74, 1);
    const auto b = build_ratio_bank(sim, prior, shape, features, settings, 74, 3);
    for (std::size_t i = 0; i < a.models.size(); ++i) CHECK(a.models[i].beta == b.models[i].beta);
  }
}
