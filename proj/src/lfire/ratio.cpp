#include "lfi/lfire/ratio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "lfi/error.hpp"
#include "lfi/rng.hpp"
#include "lfi/simd/kernels.hpp"

namespace lfi::lfire {
namespace {

constexpr double kProbFloor = 1e-5;
constexpr double kPathDevianceTol = 1e-5;
constexpr double kPathDevianceRatioMax = 0.999;
constexpr std::size_t kPathMinSteps = 5;
constexpr int kMaxHalvings = 30;
constexpr std::size_t kPolishEvery = 10;
constexpr double kObjectiveRelTol = 1e-3;

inline double softplus(double x) noexcept {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Per-row loss for label y in {0, 1} at linear predictor eta (offset included).
inline double row_loss(bool y, double eta) noexcept { return y ? softplus(-eta) : softplus(eta); }

/// Coordinate-descent solver for one subset of rows.
///
/// The design is held column-major; penalized columns are standardized and a
/// final column of ones carries the unpenalized intercept. Each IRLS round
/// forms the weighted quadratic model and runs coordinate descent in
/// covariance form: weighted Gram columns are computed lazily for coordinates
/// that become nonzero, so one sweep costs O(p * active) rather than O(n * p).
class Solver {
 public:
  Solver(const ClassificationSets& sets, std::span<const std::size_t> rows, double offset,
         const FitOptions& opt)
      : n_(rows.size()), q_(sets.dim() - 1), cols_(sets.dim()), offset_(offset), opt_(opt) {
    y_.resize(n_);
    z_.assign(cols_ * n_, 0.0);
    mean_.assign(q_, 0.0);
    scale_.assign(q_, 1.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const auto r = sets.row(rows[i]);
      y_[i] = sets.is_theta(rows[i]) ? 1.0 : 0.0;
      for (std::size_t j = 0; j < q_; ++j) z_[j * n_ + i] = r[j];
      z_[q_ * n_ + i] = 1.0;
    }
    if (opt.standardize) {
      for (std::size_t j = 0; j < q_; ++j) {
        auto col = column(j);
        const double m = simd::sum(col) / static_cast<double>(n_);
        double ss = 0.0;
        for (double v : col) ss += (v - m) * (v - m);
        const double sd = std::sqrt(ss / static_cast<double>(n_));
        mean_[j] = m;
        scale_[j] = sd > 0.0 ? sd : 1.0;
        for (double& v : col) v = sd > 0.0 ? (v - m) / sd : 0.0;
      }
    }
    beta_.assign(cols_, 0.0);
    eta_.resize(n_);
    w_.resize(n_);
    u_.resize(n_);
    wz_.resize(n_);
    grad_.resize(cols_);
    diag_.resize(cols_);
    gram_.assign(cols_, {});
  }

  /// Largest |gradient| over penalized coordinates at the current (zero)
  /// state, padded by a relative 1e-10 so that rounding in the first sweep
  /// cannot lift a coefficient off zero.
  double lambda_max() {
    refresh_linear_predictor();
    build_quadratic();
    double lmax = 0.0;
    for (std::size_t j = 0; j < q_; ++j) lmax = std::max(lmax, std::abs(grad_[j]));
    return lmax * (1.0 + 1e-10);
  }

  /// Solves at `lambda` warm-started from the current coefficients. The sweep
  /// budget applies to each lambda separately.
  void solve(double lambda, std::size_t lambda_index) {
    sweeps_ = 0;
    const double inner_tol = 1e-2 * opt_.tolerance;
    for (;;) {
      refresh_linear_predictor();
      const double f_old = objective(lambda);
      build_quadratic();
      const std::vector<double> beta_old = beta_;

      // Stops on a small sweep or on a Newton step that certifies the
      // optimality conditions; the latter matters for ill-conditioned
      // designs where coordinate steps crawl along near-null directions.
      bool done = false;
      while (!done) {
        if (sweep(lambda, /*active_only=*/false, lambda_index) < inner_tol) break;
        for (std::size_t k = 1; sweep(lambda, /*active_only=*/true, lambda_index) >= inner_tol; ++k) {
          if (k % kPolishEvery == 0 && polish(lambda)) {
            done = kkt_violation(lambda) < inner_tol;
            break;
          }
        }
      }

      refresh_linear_predictor();
      double f_new = objective(lambda);
      for (int h = 0; h < kMaxHalvings && f_new > f_old + 1e-12 * std::abs(f_old); ++h) {
        for (std::size_t j = 0; j < cols_; ++j) beta_[j] = 0.5 * (beta_[j] + beta_old[j]);
        refresh_linear_predictor();
        f_new = objective(lambda);
      }
      double change = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) change = std::max(change, std::abs(beta_[j] - beta_old[j]));
      // Clamped probabilities make IRLS converge only linearly on
      // near-separable data, so a negligible objective decrease also ends it.
      if (change < opt_.tolerance || !(f_old - f_new > kObjectiveRelTol * opt_.tolerance * std::abs(f_old))) break;
    }
  }

  /// Unpenalized mean loss on the solver's own rows.
  double train_loss() {
    refresh_linear_predictor();
    return unpenalized();
  }

  /// Original-scale coefficients: penalized then constant.
  std::vector<double> beta() const {
    std::vector<double> b(cols_);
    double intercept = beta_[q_];
    for (std::size_t j = 0; j < q_; ++j) {
      b[j] = beta_[j] / scale_[j];
      intercept -= b[j] * mean_[j];
    }
    b[q_] = intercept;
    return b;
  }

  const std::vector<double>& beta_standardized() const noexcept { return beta_; }
  const std::vector<double>& mean() const noexcept { return mean_; }
  const std::vector<double>& scale() const noexcept { return scale_; }

 private:
  std::span<double> column(std::size_t j) noexcept { return {z_.data() + j * n_, n_}; }
  std::span<const double> column(std::size_t j) const noexcept { return {z_.data() + j * n_, n_}; }

  void refresh_linear_predictor() {
    std::fill(eta_.begin(), eta_.end(), offset_);
    for (std::size_t j = 0; j < cols_; ++j) {
      if (beta_[j] != 0.0) simd::axpy(beta_[j], column(j), eta_);
    }
  }

  /// IRLS weights w, working response u (offset removed), linear terms and
  /// Gram diagonal of the quadratic model at the current linear predictor.
  void build_quadratic() {
    const double inv_n = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const double p = std::clamp(sigmoid(eta_[i]), kProbFloor, 1.0 - kProbFloor);
      w_[i] = p * (1.0 - p);
      u_[i] = eta_[i] - offset_ + (y_[i] - p) / w_[i];
    }
    for (auto& g : gram_) g.clear();
    for (std::size_t j = 0; j < cols_; ++j) {
      grad_[j] = simd::weighted_dot(w_, column(j), u_) * inv_n;
      diag_[j] = simd::weighted_dot(w_, column(j), column(j)) * inv_n;
    }
    for (std::size_t k = 0; k < cols_; ++k) {
      if (beta_[k] != 0.0) simd::axpy(-beta_[k], gram_column(k), grad_);
    }
  }

  /// Column k of the weighted Gram matrix (1/n) X^T W X, computed on first use.
  std::span<const double> gram_column(std::size_t k) {
    auto& g = gram_[k];
    if (g.empty()) {
      g.resize(cols_);
      const double inv_n = 1.0 / static_cast<double>(n_);
      const auto zk = column(k);
      for (std::size_t i = 0; i < n_; ++i) wz_[i] = w_[i] * zk[i];
      for (std::size_t j = 0; j < cols_; ++j) {
        g[j] = j == k ? diag_[k] : simd::dot(wz_, column(j)) * inv_n;
      }
    }
    return g;
  }

  /// Newton step on the quadratic model restricted to the current nonzero
  /// set with the current signs fixed. A near-singular active Gram matrix
  /// gets a tiny ridge. When the target flips a sign the step stops at the
  /// first zero crossing, which keeps the model objective decreasing.
  /// Returns true only when the full step was taken.
  bool polish(double lambda) {
    std::vector<std::size_t> act;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (j == q_ || beta_[j] != 0.0) act.push_back(j);
    }
    const std::size_t m = act.size();
    std::vector<double> gram(m * m), rhs(m);
    for (std::size_t c = 0; c < m; ++c) {
      const auto g = gram_column(act[c]);
      for (std::size_t r = 0; r < m; ++r) gram[r * m + c] = g[act[r]];
    }
    // Newton direction d solves G d = grad - lambda * sign.
    for (std::size_t r = 0; r < m; ++r) {
      const std::size_t j = act[r];
      rhs[r] = grad_[j] - (j < q_ ? std::copysign(lambda, beta_[j]) : 0.0);
    }
    std::vector<double> d;
    double max_diag = 0.0;
    for (std::size_t i = 0; i < m; ++i) max_diag = std::max(max_diag, gram[i * m + i]);
    for (double ridge : {0.0, 1e-12, 1e-10, 1e-8}) {
      std::vector<double> a = gram;
      for (std::size_t i = 0; i < m; ++i) a[i * m + i] += ridge * max_diag;
      d = rhs;
      if (cholesky_solve(a, d, m)) break;
      d.clear();
    }
    if (d.empty()) return false;

    double step = 1.0;
    for (std::size_t r = 0; r < m; ++r) {
      const std::size_t j = act[r];
      if (j < q_ && (beta_[j] + d[r]) * beta_[j] <= 0.0) step = std::min(step, -beta_[j] / d[r]);
    }
    // Model decrease along the step: -t rhs.d + t^2/2 d.G.d (signs fixed on [0, t]).
    double lin = 0.0, quad = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      lin += rhs[r] * d[r];
      double gd = 0.0;
      for (std::size_t c = 0; c < m; ++c) gd += gram[r * m + c] * d[c];
      quad += d[r] * gd;
    }
    if (!(step * (0.5 * step * quad - lin) < 0.0)) return false;

    for (std::size_t r = 0; r < m; ++r) {
      const std::size_t j = act[r];
      const double target = beta_[j] + step * d[r];
      const bool crossed = j < q_ && step < 1.0 && target * beta_[j] <= 0.0;
      const double next = crossed ? 0.0 : target;
      const double delta = next - beta_[j];
      if (delta != 0.0) simd::axpy(-delta, gram_column(j), grad_);
      beta_[j] = next;
    }
    return step == 1.0;
  }

  /// Largest violation of the optimality conditions of the quadratic model.
  double kkt_violation(double lambda) const {
    double v = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (diag_[j] <= 0.0) continue;
      const double g = grad_[j];
      double e;
      if (j == q_) e = std::abs(g);
      else if (beta_[j] == 0.0) e = std::max(0.0, std::abs(g) - lambda);
      else e = std::abs(g - std::copysign(lambda, beta_[j]));
      v = std::max(v, e);
    }
    return v;
  }

  /// Solves A x = b in place for symmetric positive definite A (row-major m x m).
  static bool cholesky_solve(std::vector<double>& a, std::vector<double>& b, std::size_t m) {
    double max_diag = 0.0;
    for (std::size_t i = 0; i < m; ++i) max_diag = std::max(max_diag, a[i * m + i]);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double v = a[i * m + j];
        for (std::size_t k = 0; k < j; ++k) v -= a[i * m + k] * a[j * m + k];
        if (i == j) {
          if (!(v > 1e-13 * max_diag)) return false;
          a[i * m + i] = std::sqrt(v);
        } else {
          a[i * m + j] = v / a[j * m + j];
        }
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      double v = b[i];
      for (std::size_t k = 0; k < i; ++k) v -= a[i * m + k] * b[k];
      b[i] = v / a[i * m + i];
    }
    for (std::size_t i = m; i-- > 0;) {
      double v = b[i];
      for (std::size_t k = i + 1; k < m; ++k) v -= a[k * m + i] * b[k];
      b[i] = v / a[i * m + i];
    }
    return true;
  }

  double unpenalized() const {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += row_loss(y_[i] > 0.5, eta_[i]);
    return s / static_cast<double>(n_);
  }

  double objective(double lambda) const {
    double l1 = 0.0;
    for (std::size_t j = 0; j < q_; ++j) l1 += std::abs(beta_[j]);
    return unpenalized() + lambda * l1;
  }

  /// One pass of coordinate updates (the intercept is always visited);
  /// returns the largest coefficient change.
  double sweep(double lambda, bool active_only, std::size_t lambda_index) {
    if (++sweeps_ > opt_.max_sweeps) {
      fail(ErrorKind::fit, "coordinate descent did not converge within " + std::to_string(opt_.max_sweeps) +
                               " sweeps at lambda index " + std::to_string(lambda_index));
    }
    double max_change = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      const bool penalized = j < q_;
      if (active_only && penalized && beta_[j] == 0.0) continue;
      const double old = beta_[j];
      double updated = 0.0;
      if (diag_[j] > 0.0) {
        const double rho = grad_[j] + diag_[j] * old;
        const double cut = penalized ? lambda : 0.0;
        updated = std::abs(rho) > cut ? std::copysign(std::abs(rho) - cut, rho) / diag_[j] : 0.0;
      }
      const double d = updated - old;
      if (d != 0.0) {
        simd::axpy(-d, gram_column(j), grad_);
        beta_[j] = updated;
        max_change = std::max(max_change, std::abs(d));
      }
    }
    return max_change;
  }

  std::size_t n_, q_, cols_;
  double offset_;
  FitOptions opt_;
  std::vector<double> y_, z_, mean_, scale_;
  std::vector<double> beta_;
  std::vector<double> eta_, w_, u_, wz_, grad_, diag_;
  std::vector<std::vector<double>> gram_;
  std::size_t sweeps_ = 0;
};

void check_constant_column(const ClassificationSets& sets) {
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets.row(i).back() != 1.0) {
      fail(ErrorKind::configuration, "the last feature must be the constant 1");
    }
  }
}

std::vector<double> geometric_path(double lambda_max, const FitOptions& opt) {
  // No penalized signal: the whole path collapses to the unpenalized fit.
  if (!(lambda_max > 0.0)) return {0.0};
  std::vector<double> lambdas(opt.path_length);
  if (opt.path_length == 1) {
    lambdas[0] = lambda_max;
    return lambdas;
  }
  const double log_hi = std::log(lambda_max), log_lo = std::log(lambda_max * opt.lambda_min_ratio);
  for (std::size_t k = 0; k < opt.path_length; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(opt.path_length - 1);
    lambdas[k] = std::exp(log_hi + t * (log_lo - log_hi));
  }
  lambdas.front() = lambda_max;
  return lambdas;
}

struct PathRun {
  std::vector<std::vector<double>> betas;
  std::vector<std::vector<double>> betas_standardized;
  std::vector<double> train_loss;
};

/// Descends `lambdas` in order; stops early (shorter output) when the
/// deviance stalls and early stopping is enabled.
PathRun run_path(Solver& solver, std::span<const double> lambdas, const FitOptions& opt, double null_loss) {
  PathRun run;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    solver.solve(lambdas[k], k);
    run.betas.push_back(solver.beta());
    run.betas_standardized.push_back(solver.beta_standardized());
    run.train_loss.push_back(solver.train_loss());
    if (!opt.early_path_stop || k + 1 < kPathMinSteps || null_loss <= 0.0) continue;
    const double prev = run.train_loss[k - 1], cur = run.train_loss[k];
    if ((prev - cur) / null_loss < kPathDevianceTol || 1.0 - cur / null_loss > kPathDevianceRatioMax) break;
  }
  return run;
}

double mean_loss(std::span<const double> beta, const ClassificationSets& sets,
                 std::span<const std::size_t> rows, double offset) {
  double s = 0.0;
  for (auto i : rows) {
    const double eta = offset + simd::dot(beta, sets.row(i));
    s += row_loss(sets.is_theta(i), eta);
  }
  return s / static_cast<double>(rows.size());
}

void validate_options(const FitOptions& opt) {
  if (opt.path_length == 0 || !(opt.lambda_min_ratio > 0.0 && opt.lambda_min_ratio <= 1.0) ||
      !(opt.tolerance > 0.0) || opt.max_sweeps == 0) {
    fail(ErrorKind::configuration, "invalid ratio-fit options");
  }
}

std::vector<std::size_t> all_rows(const ClassificationSets& sets) {
  std::vector<std::size_t> rows(sets.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

}  // namespace

ClassificationSets::ClassificationSets(std::vector<std::vector<double>> theta_features,
                                       std::vector<std::vector<double>> marginal_features)
    : n_theta_(theta_features.size()), n_marginal_(marginal_features.size()) {
  if (n_theta_ == 0 || n_marginal_ == 0) {
    fail(ErrorKind::configuration, "both classification sets need at least one item");
  }
  p_ = theta_features.front().size();
  if (p_ == 0) fail(ErrorKind::configuration, "feature vectors are empty");
  rows_.reserve((n_theta_ + n_marginal_) * p_);
  for (const auto* set : {&theta_features, &marginal_features}) {
    for (const auto& r : *set) {
      if (r.size() != p_) fail(ErrorKind::configuration, "feature vectors differ in length");
      for (double v : r) {
        if (!std::isfinite(v)) fail(ErrorKind::numerical, "non-finite feature value");
      }
      rows_.insert(rows_.end(), r.begin(), r.end());
    }
  }
}

double logistic_loss(std::span<const double> beta, const ClassificationSets& sets, double lambda) {
  if (beta.size() != sets.dim()) fail(ErrorKind::configuration, "coefficient/feature dimension mismatch");
  const double offset = -std::log(sets.nu());
  double s = 0.0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    s += row_loss(sets.is_theta(i), offset + simd::dot(beta, sets.row(i)));
  }
  double l1 = 0.0;
  for (std::size_t j = 0; j + 1 < beta.size(); ++j) l1 += std::abs(beta[j]);
  return s / static_cast<double>(sets.size()) + lambda * l1;
}

std::vector<double> logistic_loss_gradient(std::span<const double> beta, const ClassificationSets& sets) {
  if (beta.size() != sets.dim()) fail(ErrorKind::configuration, "coefficient/feature dimension mismatch");
  const double offset = -std::log(sets.nu());
  std::vector<double> g(beta.size(), 0.0);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const double eta = offset + simd::dot(beta, sets.row(i));
    const double resid = sigmoid(eta) - (sets.is_theta(i) ? 1.0 : 0.0);
    simd::axpy(resid, sets.row(i), g);
  }
  for (double& v : g) v /= static_cast<double>(sets.size());
  return g;
}

double log_ratio(const RatioModel& model, std::span<const double> psi) {
  if (psi.size() != model.beta.size()) {
    fail(ErrorKind::configuration, "feature vector has " + std::to_string(psi.size()) +
                                       " entries, the ratio model expects " + std::to_string(model.beta.size()));
  }
  return simd::dot(model.beta, psi);
}

double log_ratio_standardized(const RatioModel& model, std::span<const double> psi) {
  if (psi.size() != model.beta_standardized.size()) {
    fail(ErrorKind::configuration, "feature/ratio-model dimension mismatch");
  }
  const std::size_t q = psi.size() - 1;
  double h = model.beta_standardized[q];
  for (std::size_t j = 0; j < q; ++j) {
    h += model.beta_standardized[j] * ((psi[j] - model.feature_mean[j]) / model.feature_scale[j]);
  }
  return h;
}

LassoPath lasso_path(const ClassificationSets& sets, const FitOptions& opt) {
  validate_options(opt);
  check_constant_column(sets);
  const auto rows = all_rows(sets);
  const double offset = -std::log(sets.nu());
  Solver solver(sets, rows, offset, opt);
  LassoPath path;
  path.lambda_max = solver.lambda_max();
  const double null_loss = solver.train_loss();
  const auto lambdas = geometric_path(path.lambda_max, opt);
  auto run = run_path(solver, lambdas, opt, null_loss);
  path.lambdas.assign(lambdas.begin(), lambdas.begin() + static_cast<std::ptrdiff_t>(run.betas.size()));
  path.betas = std::move(run.betas);
  path.train_loss = std::move(run.train_loss);
  return path;
}

RatioModel fit_at_lambda(const ClassificationSets& sets, double lambda, const FitOptions& opt) {
  validate_options(opt);
  check_constant_column(sets);
  if (!(lambda >= 0.0)) fail(ErrorKind::configuration, "lambda must be >= 0");
  const auto rows = all_rows(sets);
  Solver solver(sets, rows, -std::log(sets.nu()), opt);
  solver.solve(lambda, 0);
  RatioModel m;
  m.beta = solver.beta();
  m.beta_standardized = solver.beta_standardized();
  m.feature_mean = solver.mean();
  m.feature_scale = solver.scale();
  m.lambda = lambda;
  return m;
}

RatioModel fit_ratio(const ClassificationSets& sets, const FitOptions& opt) {
  validate_options(opt);
  check_constant_column(sets);
  if (opt.folds < 2) fail(ErrorKind::configuration, "cross-validation needs at least 2 folds");
  if (sets.size() < opt.folds) {
    fail(ErrorKind::configuration, "fewer samples than cross-validation folds");
  }
  const double offset = -std::log(sets.nu());
  const auto rows = all_rows(sets);

  Solver full(sets, rows, offset, opt);
  const double lmax = full.lambda_max();
  const double null_loss = full.train_loss();
  const auto grid = geometric_path(lmax, opt);
  const auto full_run = run_path(full, grid, opt, null_loss);
  const std::size_t K = full_run.betas.size();
  const std::span<const double> lambdas(grid.data(), K);

  // Stratified folds: each class is shuffled separately and dealt round-robin.
  std::vector<std::size_t> fold_of(sets.size());
  {
    RngStream rng(opt.fold_seed);
    std::size_t dealt = 0;
    for (const auto& [lo, hi] : {std::pair{std::size_t{0}, sets.n_theta()}, std::pair{sets.n_theta(), sets.size()}}) {
      std::vector<std::size_t> idx(hi - lo);
      std::iota(idx.begin(), idx.end(), lo);
      for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
      for (auto i : idx) fold_of[i] = dealt++ % opt.folds;
    }
  }

  std::vector<double> cv(K, 0.0);
  std::size_t used_folds = 0;
  for (std::size_t f = 0; f < opt.folds; ++f) {
    std::vector<std::size_t> train, valid;
    for (std::size_t i = 0; i < sets.size(); ++i) (fold_of[i] == f ? valid : train).push_back(i);
    if (valid.empty() || train.empty()) continue;
    Solver solver(sets, train, offset, opt);
    solver.lambda_max();
    const double fold_null = solver.train_loss();
    const auto run = run_path(solver, lambdas, opt, fold_null);
    for (std::size_t k = 0; k < K; ++k) {
      const auto& b = run.betas[std::min(k, run.betas.size() - 1)];
      cv[k] += mean_loss(b, sets, valid, offset);
    }
    ++used_folds;
  }
  for (double& v : cv) v /= static_cast<double>(used_folds);

  const std::size_t best = static_cast<std::size_t>(std::min_element(cv.begin(), cv.end()) - cv.begin());
  // The all-data path already holds the refit at every lambda.
  RatioModel m;
  m.beta = full_run.betas[best];
  m.beta_standardized = full_run.betas_standardized[best];
  m.feature_mean = full.mean();
  m.feature_scale = full.scale();
  m.lambda = lambdas[best];
  m.lambda_index = best;
  for (std::size_t k = 0; k < K; ++k) m.cv_curve.emplace_back(lambdas[k], cv[k]);
  return m;
}

}  // namespace lfi::lfire
