#include "lfi/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "lfi/error.hpp"
#include "lfi/log.hpp"
#include "lfi/parallel.hpp"
#include "lfi/rng.hpp"

namespace lfi::eval {
namespace {

constexpr double kMassFloor = 1e-300;

void check_paired(Rows predictions, Rows targets) {
  if (predictions.size() != targets.size()) {
    fail(ErrorKind::configuration, "predictions and targets differ in length");
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (predictions[i].size() != targets[i].size() || targets[i].size() != targets[0].size()) {
      fail(ErrorKind::configuration, "prediction/target dimension mismatch at item " + std::to_string(i));
    }
  }
}

double statistic_of(std::vector<double>& v, Statistic s) {
  if (s == Statistic::median) return quantile(v, 0.5);
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

double r_squared(Rows predictions, Rows targets) {
  check_paired(predictions, targets);
  const std::size_t n = targets.size();
  if (n < 2) fail(ErrorKind::configuration, "r_squared needs at least two items");
  const std::size_t d = targets[0].size();
  std::vector<double> mean(d, 0.0);
  for (const auto& t : targets) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += t[j];
  }
  for (double& m : mean) m /= static_cast<double>(n);
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double e = predictions[i][j] - targets[i][j];
      const double c = targets[i][j] - mean[j];
      sse += e * e;
      sst += c * c;
    }
  }
  if (!(sst > 0.0)) fail(ErrorKind::undefined_metric, "r_squared is undefined when all targets are equal");
  return 1.0 - sse / sst;
}

double mse(Rows predictions, Rows targets) {
  check_paired(predictions, targets);
  if (targets.empty()) fail(ErrorKind::configuration, "mse needs at least one item");
  double total = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < targets[i].size(); ++j) {
      const double e = predictions[i][j] - targets[i][j];
      s += e * e;
    }
    total += s / static_cast<double>(targets[i].size());
  }
  return total / static_cast<double>(targets.size());
}

double kl_divergence(const PosteriorGrid& p, const PosteriorGrid& q) {
  if (!(p.grid == q.grid) || p.masses.size() != q.masses.size() || p.masses.size() != p.grid.size()) {
    fail(ErrorKind::configuration, "kl_divergence needs posteriors on identical grids");
  }
  double kl = 0.0;
  std::size_t floored = 0;
  for (std::size_t i = 0; i < p.masses.size(); ++i) {
    const double pi = p.masses[i];
    if (!(pi > 0.0)) continue;
    double qi = q.masses[i];
    if (!(qi > 0.0)) {
      qi = kMassFloor;
      ++floored;
    }
    kl += pi * (std::log(pi) - std::log(qi));
  }
  if (floored > 0) {
    log::warn("kl_divergence: " + std::to_string(floored) + " node(s) with P > 0 and Q = 0 floored at 1e-300");
  }
  return kl;
}

std::vector<double> posterior_mean(const PosteriorGrid& posterior) {
  if (posterior.masses.size() != posterior.grid.size()) {
    fail(ErrorKind::configuration, "posterior masses do not match the grid");
  }
  std::vector<double> mean(posterior.grid.dim(), 0.0);
  for (std::size_t i = 0; i < posterior.masses.size(); ++i) {
    const double w = posterior.masses[i];
    if (w == 0.0) continue;
    const auto node = posterior.grid.node(i);
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += w * node[j];
  }
  return mean;
}

std::vector<double> relative_error(std::span<const double> mean, std::span<const double> truth) {
  if (mean.size() != truth.size()) fail(ErrorKind::configuration, "relative_error: dimension mismatch");
  std::vector<double> re(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 0.0) {
      fail(ErrorKind::undefined_metric, "relative error is undefined for a zero true parameter (component " +
                                            std::to_string(i) + ")");
    }
    re[i] = std::abs(mean[i] - truth[i]) / std::abs(truth[i]);
  }
  return re;
}

std::vector<double> rel_error_difference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorKind::configuration, "rel_error_difference: unpaired inputs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

std::string to_string(Statistic s) { return s == Statistic::mean ? "mean" : "median"; }

Statistic parse_statistic(const std::string& name) {
  if (name == "mean") return Statistic::mean;
  if (name == "median") return Statistic::median;
  fail(ErrorKind::configuration, "unknown statistic '" + name + "' (expected mean or median)");
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) fail(ErrorKind::configuration, "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

BootstrapReport bootstrap_ci(std::span<const double> samples, Statistic statistic, std::size_t resamples,
                             double level, std::uint64_t seed, unsigned threads) {
  const std::size_t n = samples.size();
  if (n < 2) fail(ErrorKind::configuration, "bootstrap needs at least two samples");
  if (resamples == 0) fail(ErrorKind::configuration, "bootstrap needs at least one resample");
  if (!(level > 0.0 && level < 1.0)) fail(ErrorKind::configuration, "bootstrap level must lie in (0, 1)");
  std::vector<double> stats(resamples);
  parallel_for(resamples, threads, [&](std::size_t b) {
    RngStream rng(derive_seed(seed, b));
    std::vector<double> draw(n);
    for (double& v : draw) v = samples[rng.uniform_index(n)];
    stats[b] = statistic_of(draw, statistic);
  });
  BootstrapReport r;
  r.statistic = statistic;
  r.resamples = resamples;
  r.sample_size = n;
  r.level = level;
  const double tail = 0.5 * (1.0 - level);
  r.lower = quantile(stats, tail);
  r.upper = quantile(stats, 1.0 - tail);
  double sum = 0.0;
  for (double v : stats) sum += v;
  r.average = sum / static_cast<double>(resamples);
  return r;
}

std::vector<double> gaussian_kde(std::span<const double> samples, double bandwidth,
                                 std::span<const double> eval_points) {
  if (!(bandwidth > 0.0)) fail(ErrorKind::configuration, "kde bandwidth must be positive");
  if (samples.empty()) fail(ErrorKind::configuration, "kde needs at least one sample");
  const double norm = 1.0 / (static_cast<double>(samples.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> out(eval_points.size());
  for (std::size_t k = 0; k < eval_points.size(); ++k) {
    double s = 0.0;
    for (double x : samples) {
      const double z = (eval_points[k] - x) / bandwidth;
      s += std::exp(-0.5 * z * z);
    }
    out[k] = norm * s;
  }
  return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> xs(count);
  if (count == 1) {
    xs[0] = 0.5 * (lo + hi);
    return xs;
  }
  for (std::size_t i = 0; i < count; ++i) {
    xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  if (count > 1) xs.back() = hi;
  return xs;
}

std::string task_results_csv(std::span<const TaskResult> rows) {
  std::size_t d = 0;
  bool any_kl = false;
  for (const auto& r : rows) {
    d = std::max(d, r.theta_true.size());
    any_kl = any_kl || r.has_kl();
  }
  std::ostringstream os;
  os << "task,method";
  for (std::size_t j = 0; j < d; ++j) os << ",theta_true_" << j + 1;
  for (std::size_t j = 0; j < d; ++j) os << ",posterior_mean_" << j + 1;
  for (std::size_t j = 0; j < d; ++j) os << ",rel_error_" << j + 1;
  if (any_kl) os << ",kl";
  os << '\n';
  for (const auto& r : rows) {
    os << r.task << ',' << r.method;
    for (std::size_t j = 0; j < d; ++j) os << ',' << format_number(r.theta_true[j]);
    for (std::size_t j = 0; j < d; ++j) os << ',' << format_number(r.posterior_mean[j]);
    for (std::size_t j = 0; j < d; ++j) {
      os << ',' << (r.relative_error.empty() ? std::string() : format_number(r.relative_error[j]));
    }
    if (any_kl) os << ',' << (r.has_kl() ? format_number(r.kl) : std::string());
    os << '\n';
  }
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::io, "write failed: " + path.string());
}

nlohmann::json to_json(const BootstrapReport& r) {
  return {{"statistic", to_string(r.statistic)}, {"lower", r.lower},   {"upper", r.upper},
          {"average", r.average},                {"resamples", r.resamples},
          {"sample_size", r.sample_size},        {"level", r.level}};
}

BootstrapReport bootstrap_report_from_json(const nlohmann::json& j) {
  try {
    BootstrapReport r;
    r.statistic = parse_statistic(j.at("statistic").get<std::string>());
    r.lower = j.at("lower");
    r.upper = j.at("upper");
    r.average = j.at("average");
    r.resamples = j.at("resamples");
    r.sample_size = j.at("sample_size");
    r.level = j.at("level");
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::io, std::string("malformed bootstrap report: ") + e.what());
  }
}

nlohmann::json kde_curve_json(std::span<const double> xs, std::span<const double> density) {
  if (xs.size() != density.size()) fail(ErrorKind::configuration, "kde curve: length mismatch");
  nlohmann::json points = nlohmann::json::array();
  for (std::size_t i = 0; i < xs.size(); ++i) points.push_back({xs[i], density[i]});
  return points;
}

}  // namespace lfi::eval
