#pragma once

// Log-ratio estimation by L1-penalized logistic regression.
//
// With nu = n_m / n_theta the loss
//   (1/n) [ sum_theta log(1 + nu e^{-h}) + sum_m log(1 + e^{h} / nu) ]
// is ordinary logistic regression (theta-class = 1) with a fixed offset
// -log(nu) on the linear predictor h = beta . psi. The last feature is the
// constant 1; it acts as the intercept and is never penalized.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace lfi::lfire {

class ClassificationSets {
 public:
  ClassificationSets(std::vector<std::vector<double>> theta_features,
                     std::vector<std::vector<double>> marginal_features);

  std::size_t dim() const noexcept { return p_; }
  std::size_t n_theta() const noexcept { return n_theta_; }
  std::size_t n_marginal() const noexcept { return n_marginal_; }
  std::size_t size() const noexcept { return n_theta_ + n_marginal_; }
  double nu() const noexcept { return static_cast<double>(n_marginal_) / static_cast<double>(n_theta_); }

  /// Rows 0..n_theta-1 are the theta class, the rest the marginal class.
  std::span<const double> row(std::size_t i) const noexcept { return {rows_.data() + i * p_, p_}; }
  bool is_theta(std::size_t i) const noexcept { return i < n_theta_; }

 private:
  std::size_t p_ = 0, n_theta_ = 0, n_marginal_ = 0;
  std::vector<double> rows_;
};

/// Penalized loss; lambda multiplies the L1 norm of all but the last coefficient.
double logistic_loss(std::span<const double> beta, const ClassificationSets& sets, double lambda);
/// Gradient of the smooth (unpenalized) part.
std::vector<double> logistic_loss_gradient(std::span<const double> beta, const ClassificationSets& sets);

struct FitOptions {
  std::size_t path_length = 100;
  double lambda_min_ratio = 1e-4;
  std::size_t folds = 10;
  double tolerance = 1e-7;        // max coefficient change, standardized scale
  std::size_t max_sweeps = 100000;
  bool standardize = true;
  /// Stop descending the path once the training deviance stalls.
  bool early_path_stop = true;
  std::uint64_t fold_seed = 0;
};

struct RatioModel {
  std::vector<double> beta;               // original feature scale
  std::vector<double> beta_standardized;  // penalized coefficients, then intercept
  std::vector<double> feature_mean;       // penalized columns
  std::vector<double> feature_scale;
  double lambda = 0.0;
  std::size_t lambda_index = 0;
  std::vector<std::pair<double, double>> cv_curve;  // (lambda, mean validation loss)
  std::vector<double> theta;
};

/// beta . psi. Throws a configuration error on a dimension mismatch.
double log_ratio(const RatioModel& model, std::span<const double> psi);
/// Same value computed from the standardized coefficients.
double log_ratio_standardized(const RatioModel& model, std::span<const double> psi);

struct LassoPath {
  double lambda_max = 0.0;
  std::vector<double> lambdas;                  // descending; truncated on early stop
  std::vector<std::vector<double>> betas;       // original scale, one per lambda
  std::vector<double> train_loss;               // unpenalized mean loss
};

/// Warm-started descent from lambda_max (the smallest lambda zeroing every
/// penalized coefficient) to lambda_min_ratio * lambda_max, log-spaced.
/// Throws a fit error naming the lambda index when the solver exceeds
/// max_sweeps coordinate sweeps.
LassoPath lasso_path(const ClassificationSets& sets, const FitOptions& options = {});

/// Single fit at a fixed lambda, started from zero.
RatioModel fit_at_lambda(const ClassificationSets& sets, double lambda, const FitOptions& options = {});

/// Path + stratified K-fold cross-validation; lambda minimizing the mean
/// validation loss, refit on all data.
RatioModel fit_ratio(const ClassificationSets& sets, const FitOptions& options = {});

}  // namespace lfi::lfire
