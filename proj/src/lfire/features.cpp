#include "lfi/lfire/features.hpp"

#include <string>

#include "lfi/error.hpp"
#include "lfi/nnet/train.hpp"
#include "lfi/simulators.hpp"

namespace lfi::lfire {
namespace {

double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

}  // namespace

std::size_t expanded_size(std::size_t d) noexcept { return d + d * (d + 1) / 2 + 1; }

std::vector<double> expand_features(std::span<const double> s) {
  std::vector<double> out;
  out.reserve(expanded_size(s.size()));
  out.insert(out.end(), s.begin(), s.end());
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i; j < s.size(); ++j) out.push_back(s[i] * s[j]);
  }
  out.push_back(1.0);
  return out;
}

double cross_covariance(std::span<const double> a, std::span<const double> b, std::size_t lag) {
  const std::size_t T = a.size();
  if (T == 0 || b.size() != T) fail(ErrorKind::configuration, "cross-covariance needs equal nonempty series");
  if (lag >= T) return 0.0;
  const double ma = mean_of(a), mb = mean_of(b);
  double s = 0.0;
  for (std::size_t t = lag; t < T; ++t) s += (a[t] - ma) * (b[t - lag] - mb);
  return s / static_cast<double>(T);
}

double autocovariance(std::span<const double> x, std::size_t lag) { return cross_covariance(x, x, lag); }

double autocorrelation(std::span<const double> x, std::size_t lag) {
  const double c0 = autocovariance(x, 0);
  return c0 > 0.0 ? autocovariance(x, lag) / c0 : 0.0;
}

std::vector<LorenzStat> default_lorenz_stats() {
  return {LorenzStat::mean,
          LorenzStat::variance,
          LorenzStat::autocov_lag1,
          LorenzStat::crosscov_prev_lag0,
          LorenzStat::crosscov_next_lag0,
          LorenzStat::crosscov_prev_lag1};
}

std::vector<double> lorenz_statistics(const TimeSeries& x, std::span<const LorenzStat> stats) {
  const std::size_t K = x.channels();
  if (K < 2 || x.length() < 3) fail(ErrorKind::configuration, "lorenz statistics need >= 2 sites and >= 3 steps");
  const auto site = [&](std::size_t k) { return x.channel(k).subspan(1); };
  std::vector<double> out(stats.size(), 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    const auto xk = site(k);
    const auto prev = site((k + K - 1) % K);
    const auto next = site((k + 1) % K);
    for (std::size_t s = 0; s < stats.size(); ++s) {
      double v = 0.0;
      switch (stats[s]) {
        case LorenzStat::mean: v = mean_of(xk); break;
        case LorenzStat::variance: v = autocovariance(xk, 0); break;
        case LorenzStat::autocov_lag1: v = autocovariance(xk, 1); break;
        case LorenzStat::crosscov_prev_lag0: v = cross_covariance(xk, prev, 0); break;
        case LorenzStat::crosscov_next_lag0: v = cross_covariance(xk, next, 0); break;
        case LorenzStat::crosscov_prev_lag1: v = cross_covariance(xk, prev, 1); break;
      }
      out[s] += v;
    }
  }
  for (double& v : out) v /= static_cast<double>(K);
  return out;
}

std::vector<double> manual_summaries(ModelId model, const TimeSeries& x) {
  switch (model) {
    case ModelId::arch: {
      const auto s = x.channel(0);
      std::vector<double> out;
      for (std::size_t lag = 1; lag <= 5; ++lag) out.push_back(autocovariance(s, lag));
      for (std::size_t lag = 1; lag <= 5; ++lag) out.push_back(autocorrelation(s, lag));
      return out;
    }
    case ModelId::ma2: {
      const auto s = x.channel(0);
      return {autocorrelation(s, 1), autocorrelation(s, 2)};
    }
    case ModelId::lotka_volterra:
      return {x.samples().begin(), x.samples().end()};
    case ModelId::lorenz96: {
      const auto stats = default_lorenz_stats();
      return lorenz_statistics(x, stats);
    }
    case ModelId::ricker:
      break;
  }
  fail(ErrorKind::configuration, "no manual summary statistics for model '" + std::string(to_string(model)) + "'");
}

std::string to_string(SummaryKind kind) {
  switch (kind) {
    case SummaryKind::direnet: return "direnet";
    case SummaryKind::manual: return "manual";
    case SummaryKind::constant: return "constant";
  }
  return "unknown";
}

SummaryKind parse_summary_kind(const std::string& name) {
  if (name == "direnet") return SummaryKind::direnet;
  if (name == "manual") return SummaryKind::manual;
  if (name == "constant") return SummaryKind::constant;
  fail(ErrorKind::configuration, "unknown summary method '" + name + "'");
}

FeatureMap FeatureMap::direnet(const nn::SummaryNetwork& net) {
  return FeatureMap(SummaryKind::direnet, ModelId::arch, &net);
}

FeatureMap FeatureMap::manual(ModelId model) {
  if (model == ModelId::ricker) {
    fail(ErrorKind::configuration, "no manual summary statistics for model 'ricker'");
  }
  return FeatureMap(SummaryKind::manual, model, nullptr);
}

FeatureMap FeatureMap::constant() { return FeatureMap(SummaryKind::constant, ModelId::arch, nullptr); }

std::vector<double> FeatureMap::operator()(const TimeSeries& x) const {
  switch (kind_) {
    case SummaryKind::direnet: return expand_features(net_->predict(x));
    case SummaryKind::manual: return expand_features(manual_summaries(model_, x));
    case SummaryKind::constant: return {1.0};
  }
  return {};
}

}  // namespace lfi::lfire
