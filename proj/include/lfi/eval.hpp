#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lfi/grid.hpp"

namespace lfi::eval {

using Rows = std::span<const std::vector<double>>;

/// 1 - SSE / SST over all coordinates, SST about the per-dimension target
/// mean. Needs n >= 2; all-equal targets raise an undefined-metric error.
double r_squared(Rows predictions, Rows targets);

/// Mean over items of |pred - target|^2 / d.
double mse(Rows predictions, Rows targets);

/// sum_i P_i log(P_i / Q_i) over P_i > 0, in nats on grid masses. Q_i = 0
/// where P_i > 0 is floored at 1e-300 with a warning. Grids must match.
double kl_divergence(const PosteriorGrid& p, const PosteriorGrid& q);

/// Mass-weighted node coordinates.
std::vector<double> posterior_mean(const PosteriorGrid& posterior);

/// |mean_i - truth_i| / |truth_i|; a zero truth component raises an
/// undefined-metric error.
std::vector<double> relative_error(std::span<const double> posterior_mean,
                                   std::span<const double> theta_true);

/// Components with |theta| below this are not scored by the pipelines.
inline constexpr double kRelativeErrorMinMagnitude = 1e-6;

/// Elementwise a - b; lengths must match.
std::vector<double> rel_error_difference(std::span<const double> a, std::span<const double> b);

enum class Statistic { mean, median };

std::string to_string(Statistic s);
Statistic parse_statistic(const std::string& name);

struct BootstrapReport {
  Statistic statistic = Statistic::mean;
  double lower = 0.0;
  double upper = 0.0;
  double average = 0.0;  // mean of the resampled statistics
  std::size_t resamples = 200;
  std::size_t sample_size = 0;
  double level = 0.95;
};

/// Percentile bootstrap. Resample b draws from RngStream(derive_seed(seed, b)),
/// so the report does not depend on the thread count. Quantiles use linear
/// interpolation between order statistics.
BootstrapReport bootstrap_ci(std::span<const double> samples, Statistic statistic = Statistic::mean,
                             std::size_t resamples = 200, double level = 0.95, std::uint64_t seed = 0,
                             unsigned threads = 1);

/// f(x) = (1 / (n h)) sum_j phi((x - s_j) / h).
std::vector<double> gaussian_kde(std::span<const double> samples, double bandwidth,
                                 std::span<const double> eval_points);

/// `count` evenly spaced points covering [lo, hi].
std::vector<double> linspace(double lo, double hi, std::size_t count);

/// Sample quantile with linear interpolation (type 7).
double quantile(std::vector<double> values, double prob);

// ---------------------------------------------------------------------------
// Reports

/// One row per task per method.
struct TaskResult {
  std::size_t task = 0;
  std::string method;
  std::vector<double> theta_true;
  std::vector<double> posterior_mean;
  std::vector<double> relative_error;  // empty when some |theta_true_i| is tiny
  double kl = -1.0;                    // < 0 when no exact posterior is available
  bool has_kl() const noexcept { return kl >= 0.0; }
};

/// Fixed-precision CSV, so equal inputs give identical bytes.
std::string task_results_csv(std::span<const TaskResult> rows);
void write_text(const std::filesystem::path& path, const std::string& text);

nlohmann::json to_json(const BootstrapReport& report);
BootstrapReport bootstrap_report_from_json(const nlohmann::json& j);

/// KDE curve as a list of [x, density] points.
nlohmann::json kde_curve_json(std::span<const double> xs, std::span<const double> density);

}  // namespace lfi::eval
