#include "lfi/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lfi/error.hpp"
#include "lfi/rng.hpp"

namespace lfi {

std::string_view to_string(ModelId id) noexcept {
  switch (id) {
    case ModelId::arch: return "arch";
    case ModelId::ma2: return "ma2";
    case ModelId::lotka_volterra: return "lotka-volterra";
    case ModelId::ricker: return "ricker";
    case ModelId::lorenz96: return "lorenz96";
  }
  return "arch";
}

ModelId parse_model_id(std::string_view name) {
  if (name == "arch") return ModelId::arch;
  if (name == "ma2") return ModelId::ma2;
  if (name == "lotka-volterra" || name == "lotka_volterra" || name == "lv") {
    return ModelId::lotka_volterra;
  }
  if (name == "ricker") return ModelId::ricker;
  if (name == "lorenz96" || name == "lorenz") return ModelId::lorenz96;
  fail(ErrorKind::configuration, "unknown model id '" + std::string(name) + "'");
}

std::size_t parameter_dim(ModelId id) noexcept {
  switch (id) {
    case ModelId::lotka_volterra:
    case ModelId::ricker: return 3;
    default: return 2;
  }
}

ParameterPoint ParameterPoint::make(ModelId model, std::vector<double> values) {
  if (values.size() != parameter_dim(model)) {
    fail(ErrorKind::configuration,
         std::string(to_string(model)) + " expects " + std::to_string(parameter_dim(model)) +
             " parameters, got " + std::to_string(values.size()));
  }
  return ParameterPoint{model, std::move(values)};
}

TimeSeries::TimeSeries(std::size_t channels, std::size_t length)
    : channels_(channels), length_(length), samples_(channels * length, 0.0) {}

TimeSeries::TimeSeries(std::size_t channels, std::size_t length, std::vector<double> samples)
    : channels_(channels), length_(length), samples_(std::move(samples)) {
  if (samples_.size() != channels * length) {
    fail(ErrorKind::configuration, "time series sample count does not match its shape");
  }
}

bool TimeSeries::all_finite() const noexcept {
  return std::all_of(samples_.begin(), samples_.end(), [](double v) { return std::isfinite(v); });
}

bool PriorSpec::contains(std::span<const double> theta) const noexcept {
  if (theta.size() != bounds.size()) return false;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (!(theta[i] >= bounds[i].lo && theta[i] <= bounds[i].hi)) return false;
  }
  for (const auto& c : constraints) {
    double lhs = 0.0;
    for (std::size_t i = 0; i < c.coeffs.size() && i < theta.size(); ++i) lhs += c.coeffs[i] * theta[i];
    if (!(lhs < c.rhs)) return false;
  }
  return true;
}

double PriorSpec::log_density(std::span<const double> theta) const noexcept {
  return contains(theta) ? 0.0 : -std::numeric_limits<double>::infinity();
}

void PriorSpec::validate() const {
  if (bounds.empty()) fail(ErrorKind::configuration, "prior has no dimensions");
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    const auto& b = bounds[i];
    if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || b.lo > b.hi) {
      fail(ErrorKind::configuration, "prior bound " + std::to_string(i) + " is empty or not finite");
    }
  }
  for (const auto& c : constraints) {
    if (c.coeffs.size() != bounds.size()) {
      fail(ErrorKind::configuration, "prior constraint dimension does not match the bounds");
    }
  }
  if (constraints.empty()) return;
  // Probe a regular lattice of the box for a strictly feasible point.
  constexpr int kProbe = 64;
  const std::size_t d = bounds.size();
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> theta(d);
  for (;;) {
    for (std::size_t i = 0; i < d; ++i) {
      theta[i] = bounds[i].lo + (bounds[i].hi - bounds[i].lo) * (static_cast<double>(idx[i]) + 0.5) / kProbe;
    }
    if (contains(theta)) return;
    std::size_t k = 0;
    while (k < d && ++idx[k] == kProbe) idx[k++] = 0;
    if (k == d) break;
  }
  fail(ErrorKind::configuration, "prior constraints leave an empty support");
}

PriorSpec default_prior(ModelId id) {
  PriorSpec p;
  switch (id) {
    case ModelId::arch:
      p.bounds = {{-1.0, 1.0}, {0.0, 1.0}};
      break;
    case ModelId::ma2:
      p.kind = PriorSpec::Kind::uniform_triangle;
      p.bounds = {{-2.0, 2.0}, {-1.0, 1.0}};
      // theta1 + theta2 > -1  and  theta1 - theta2 < 1
      p.constraints = {{{-1.0, -1.0}, 1.0}, {{1.0, -1.0}, 1.0}};
      break;
    case ModelId::lotka_volterra:
      p.bounds = {{std::exp(-2.0), 1.0}, {std::exp(-5.0), std::exp(-2.5)}, {std::exp(-2.0), 1.0}};
      break;
    case ModelId::ricker:
      p.bounds = {{3.0, 5.0}, {0.0, 0.6}, {5.0, 15.0}};
      break;
    case ModelId::lorenz96:
      p.bounds = {{0.5, 3.5}, {0.0, 0.3}};
      break;
  }
  return p;
}

std::vector<ParameterPoint> sample_prior(ModelId model, const PriorSpec& prior, std::size_t n,
                                         RngStream& rng) {
  if (n == 0) fail(ErrorKind::configuration, "sample_prior requires n >= 1");
  prior.validate();
  if (prior.dim() != parameter_dim(model)) {
    fail(ErrorKind::configuration, "prior dimension does not match the model");
  }
  std::vector<ParameterPoint> out;
  out.reserve(n);
  std::vector<double> theta(prior.dim());
  constexpr int kMaxRejections = 1'000'000;
  while (out.size() < n) {
    int attempts = 0;
    for (;;) {
      for (std::size_t i = 0; i < theta.size(); ++i) {
        const auto& b = prior.bounds[i];
        theta[i] = b.lo == b.hi ? b.lo : rng.uniform(b.lo, b.hi);
      }
      if (prior.contains(theta)) break;
      if (++attempts == kMaxRejections) {
        fail(ErrorKind::configuration, "prior rejection sampler found no point in the support");
      }
    }
    out.push_back(ParameterPoint{model, theta});
  }
  return out;
}

}  // namespace lfi
