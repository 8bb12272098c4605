#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lfi/model.hpp"

namespace lfi::nn {
struct SummaryNetwork;
}

namespace lfi::lfire {

/// d + d(d+1)/2 + 1.
std::size_t expanded_size(std::size_t d) noexcept;

/// (s_1..s_d, then s_i s_j for i <= j in lexicographic order, then 1).
std::vector<double> expand_features(std::span<const double> s);

/// Biased (1/T) sample autocovariance at `lag`.
double autocovariance(std::span<const double> x, std::size_t lag);
/// autocovariance(lag) / autocovariance(0); 0 for a zero-variance series.
double autocorrelation(std::span<const double> x, std::size_t lag);
/// (1/T) sum_t (a_t - mean a)(b_{t-lag} - mean b), t = lag..T-1.
double cross_covariance(std::span<const double> a, std::span<const double> b, std::size_t lag);

/// Lorenz-96 statistics averaged over the 40 sites, computed over t = 1..160
/// (the known initial state is excluded).
enum class LorenzStat {
  mean,
  variance,
  autocov_lag1,
  crosscov_prev_lag0,  // cov(x_k(t), x_{k-1}(t))
  crosscov_next_lag0,  // cov(x_k(t), x_{k+1}(t))
  crosscov_prev_lag1,  // cov(x_k(t), x_{k-1}(t-1))
};

std::vector<LorenzStat> default_lorenz_stats();
std::vector<double> lorenz_statistics(const TimeSeries& x, std::span<const LorenzStat> stats);

/// Hand-designed summaries (before quadratic expansion):
///   arch: autocovariances at lags 1..5, then autocorrelations at lags 1..5
///   ma2: autocorrelations at lags 1..2
///   lotka-volterra: the 100 raw values, prey channel first
///   lorenz96: default_lorenz_stats()
/// Ricker has none and raises a configuration error.
std::vector<double> manual_summaries(ModelId model, const TimeSeries& x);

enum class SummaryKind { direnet, manual, constant };

std::string to_string(SummaryKind kind);
SummaryKind parse_summary_kind(const std::string& name);

/// x -> Psi(x). direnet and manual summaries go through expand_features;
/// constant maps every series to (1).
class FeatureMap {
 public:
  static FeatureMap direnet(const nn::SummaryNetwork& net);
  static FeatureMap manual(ModelId model);
  static FeatureMap constant();

  SummaryKind kind() const noexcept { return kind_; }
  std::vector<double> operator()(const TimeSeries& x) const;

 private:
  FeatureMap(SummaryKind kind, ModelId model, const nn::SummaryNetwork* net)
      : kind_(kind), model_(model), net_(net) {}

  SummaryKind kind_;
  ModelId model_;
  const nn::SummaryNetwork* net_;
};

}  // namespace lfi::lfire
