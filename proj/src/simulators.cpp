#include "lfi/simulators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lfi/error.hpp"
#include "lfi/parallel.hpp"

namespace lfi {
namespace {

void require_dim(const ParameterPoint& theta, ModelId model) {
  if (theta.dim() != parameter_dim(model)) {
    fail(ErrorKind::configuration, std::string(to_string(model)) + ": wrong parameter dimension");
  }
  for (double v : theta.values) {
    if (!std::isfinite(v)) fail(ErrorKind::domain, std::string(to_string(model)) + ": non-finite parameter");
  }
}

std::vector<double> default_lv_obs_times() {
  std::vector<double> t(50);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i + 1);
  return t;
}

}  // namespace

// ARCH ------------------------------------------------------------------------

std::vector<double> arch_recursion(double theta1, double theta2, double e0,
                                   std::span<const double> zeta) {
  if (theta2 < 0.0) fail(ErrorKind::domain, "arch: theta2 < 0 gives a negative variance");
  std::vector<double> x(zeta.size());
  double x_prev = 0.0;
  double e_prev = e0;
  for (std::size_t t = 0; t < zeta.size(); ++t) {
    const double e = zeta[t] * std::sqrt(kArchAlpha + theta2 * e_prev * e_prev);
    x[t] = theta1 * x_prev + e;
    x_prev = x[t];
    e_prev = e;
  }
  return x;
}

TimeSeries simulate_arch(const ParameterPoint& theta, std::size_t length, RngStream& rng) {
  require_dim(theta, ModelId::arch);
  if (theta[1] < 0.0) fail(ErrorKind::domain, "arch: theta2 < 0 gives a negative variance");
  const double e0 = rng.normal();
  std::vector<double> zeta(length);
  for (auto& z : zeta) z = rng.normal();
  return TimeSeries(1, length, arch_recursion(theta[0], theta[1], e0, zeta));
}

// MA2 -------------------------------------------------------------------------

std::vector<double> ma2_recursion(double theta1, double theta2, std::span<const double> noise) {
  if (noise.size() < 2) fail(ErrorKind::configuration, "ma2: need e(0) and at least one step");
  const std::size_t T = noise.size() - 1;
  std::vector<double> x(T);
  x[0] = noise[1] + theta1 * noise[0];
  for (std::size_t t = 2; t <= T; ++t) {
    x[t - 1] = noise[t] + theta1 * noise[t - 1] + theta2 * noise[t - 2];
  }
  return x;
}

TimeSeries simulate_ma2(const ParameterPoint& theta, std::size_t length, RngStream& rng) {
  require_dim(theta, ModelId::ma2);
  std::vector<double> e(length + 1);
  for (auto& v : e) v = rng.normal();
  return TimeSeries(1, length, ma2_recursion(theta[0], theta[1], e));
}

// Lotka-Volterra --------------------------------------------------------------

double lv_total_rate(std::int64_t prey, std::int64_t predators, std::span<const double> theta) {
  const auto b1 = static_cast<double>(prey);
  const auto b2 = static_cast<double>(predators);
  return theta[0] * b1 + theta[1] * b1 * b2 + theta[2] * b2;
}

std::optional<LvTransition> lv_next_event(std::int64_t prey, std::int64_t predators,
                                          std::span<const double> theta, RngStream& rng) {
  const auto b1 = static_cast<double>(prey);
  const auto b2 = static_cast<double>(predators);
  const double r0 = theta[0] * b1;
  const double r1 = theta[1] * b1 * b2;
  const double r2 = theta[2] * b2;
  const double total = r0 + r1 + r2;
  if (!(total > 0.0)) return std::nullopt;
  const double wait = rng.exponential(total);
  const double u = rng.uniform() * total;
  LvEvent ev = LvEvent::predator_death;
  if (u < r0) {
    ev = LvEvent::prey_birth;
  } else if (u < r0 + r1) {
    ev = LvEvent::predation;
  }
  // Guard against u landing on a zero-rate event through rounding.
  if (ev == LvEvent::predator_death && r2 == 0.0) ev = r1 > 0.0 ? LvEvent::predation : LvEvent::prey_birth;
  return LvTransition{wait, ev};
}

TimeSeries simulate_lotka_volterra(const ParameterPoint& theta, std::array<std::int64_t, 2> init,
                                   std::span<const double> obs_times, RngStream& rng,
                                   std::uint64_t max_events) {
  require_dim(theta, ModelId::lotka_volterra);
  for (double v : theta.values) {
    if (!(v > 0.0)) fail(ErrorKind::domain, "lotka-volterra: rates must be positive");
  }
  if (init[0] < 0 || init[1] < 0) fail(ErrorKind::domain, "lotka-volterra: negative initial population");
  const std::size_t n_obs = obs_times.size();
  TimeSeries out(2, n_obs);
  std::int64_t prey = init[0];
  std::int64_t pred = init[1];
  double t = 0.0;
  std::size_t next_obs = 0;
  std::uint64_t events = 0;
  while (next_obs < n_obs) {
    std::optional<LvTransition> step;
    if (events < max_events) step = lv_next_event(prey, pred, theta.values, rng);
    const double t_next = step ? t + step->wait : std::numeric_limits<double>::infinity();
    while (next_obs < n_obs && obs_times[next_obs] <= t_next) {
      out.at(0, next_obs) = static_cast<double>(prey);
      out.at(1, next_obs) = static_cast<double>(pred);
      ++next_obs;
    }
    if (!step) break;
    t = t_next;
    ++events;
    switch (step->event) {
      case LvEvent::prey_birth: ++prey; break;
      case LvEvent::predation: --prey; ++pred; break;
      case LvEvent::predator_death: --pred; break;
    }
  }
  return out;
}

// Ricker ----------------------------------------------------------------------

std::vector<double> ricker_log_latent(double log_r, double sigma, double n0,
                                      std::span<const double> noise) {
  std::vector<double> log_n(noise.size());
  double cur = std::log(n0);
  for (std::size_t t = 0; t < noise.size(); ++t) {
    cur = log_r + cur - std::exp(cur) + sigma * noise[t];
    log_n[t] = cur;
  }
  return log_n;
}

TimeSeries simulate_ricker(const ParameterPoint& theta, std::size_t length, RngStream& rng,
                           double n0) {
  require_dim(theta, ModelId::ricker);
  const double log_r = theta[0];
  const double sigma = theta[1];
  const double phi = theta[2];
  if (sigma < 0.0 || !(phi > 0.0) || !(n0 > 0.0)) {
    fail(ErrorKind::domain, "ricker: requires sigma >= 0, phi > 0, N(0) > 0");
  }
  TimeSeries out(1, length);
  double log_n = std::log(n0);
  for (std::size_t t = 0; t < length; ++t) {
    const double e = rng.normal();
    log_n = log_r + log_n - std::exp(log_n) + sigma * e;
    out.at(0, t) = static_cast<double>(rng.poisson(phi * std::exp(log_n)));
  }
  return out;
}

// Lorenz-96 -------------------------------------------------------------------

std::vector<double> default_lorenz_x0() {
  RngStream rng(0x4C6F72656E7A3936ULL);  // "Lorenz96"
  std::vector<double> x0(kLorenzDim);
  for (auto& v : x0) v = rng.normal(2.5, 3.5);
  return x0;
}

void lorenz96_drift(std::span<const double> x, double theta1, double theta2, double forcing,
                    std::span<const double> eta, std::span<double> out) {
  const std::size_t n = x.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double xm1 = x[(k + n - 1) % n];
    const double xm2 = x[(k + n - 2) % n];
    const double xp1 = x[(k + 1) % n];
    out[k] = -xm1 * (xm2 - xp1) - x[k] + forcing - (theta1 + theta2 * x[k]) + eta[k];
  }
}

TimeSeries simulate_lorenz96(const ParameterPoint& theta, const LorenzSettings& s, RngStream& rng,
                             bool stochastic) {
  require_dim(theta, ModelId::lorenz96);
  const std::size_t n = s.x0.size();
  if (n < 4) fail(ErrorKind::configuration, "lorenz96: state needs at least 4 components");
  TimeSeries out(n, s.steps + 1);
  std::vector<double> x(s.x0);
  std::vector<double> eta(n, 0.0);
  std::vector<double> scratch;
  const double innov = s.eta_sigma * std::sqrt(1.0 - s.eta_phi * s.eta_phi);
  if (stochastic) {
    for (auto& e : eta) e = s.eta_sigma * rng.normal();
  }
  for (std::size_t k = 0; k < n; ++k) out.at(k, 0) = x[k];
  auto drift = [&](std::span<const double> state, std::span<double> dx) {
    lorenz96_drift(state, theta[0], theta[1], s.forcing, eta, dx);
  };
  for (std::size_t step = 1; step <= s.steps; ++step) {
    rk4_step(drift, x, s.dt, scratch);
    for (std::size_t k = 0; k < n; ++k) {
      if (!std::isfinite(x[k]) || std::fabs(x[k]) > 1e8) {
        fail(ErrorKind::simulation, "lorenz96: trajectory diverged at step " + std::to_string(step));
      }
      out.at(k, step) = x[k];
    }
    if (stochastic) {
      for (auto& e : eta) e = s.eta_phi * e + innov * rng.normal();
    }
  }
  return out;
}

// Dispatch --------------------------------------------------------------------

Simulator::Simulator(ModelId model, SimulatorSettings settings)
    : model_(model), settings_(std::move(settings)) {
  if (settings_.lv_obs_times.empty()) settings_.lv_obs_times = default_lv_obs_times();
  if (settings_.lorenz.x0.empty()) settings_.lorenz.x0 = default_lorenz_x0();
}

std::pair<std::size_t, std::size_t> Simulator::shape() const noexcept {
  switch (model_) {
    case ModelId::arch: return {1, settings_.arch_length};
    case ModelId::ma2: return {1, settings_.ma2_length};
    case ModelId::lotka_volterra: return {2, settings_.lv_obs_times.size()};
    case ModelId::ricker: return {1, settings_.ricker_length};
    case ModelId::lorenz96: return {settings_.lorenz.x0.size(), settings_.lorenz.steps + 1};
  }
  return {1, 1};
}

TimeSeries Simulator::operator()(const ParameterPoint& theta, RngStream& rng) const {
  if (theta.model != model_) fail(ErrorKind::configuration, "parameter belongs to a different model");
  switch (model_) {
    case ModelId::arch: return simulate_arch(theta, settings_.arch_length, rng);
    case ModelId::ma2: return simulate_ma2(theta, settings_.ma2_length, rng);
    case ModelId::lotka_volterra:
      return simulate_lotka_volterra(theta, settings_.lv_init, settings_.lv_obs_times, rng,
                                     settings_.lv_max_events);
    case ModelId::ricker: return simulate_ricker(theta, settings_.ricker_length, rng, settings_.ricker_n0);
    case ModelId::lorenz96: return simulate_lorenz96(theta, settings_.lorenz, rng);
  }
  fail(ErrorKind::configuration, "unknown model");
}

std::pair<std::size_t, std::size_t> split_sizes(std::size_t m, double train_ratio) {
  if (m < 2) fail(ErrorKind::configuration, "a train/validation split needs at least 2 items");
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
    fail(ErrorKind::configuration, "train split ratio must lie in (0, 1)");
  }
  auto n_train = static_cast<std::size_t>(std::floor(train_ratio * static_cast<double>(m)));
  n_train = std::clamp<std::size_t>(n_train, 1, m - 1);
  return {n_train, m - n_train};
}

SimBatch simulate_at(const Simulator& simulator, const PriorSpec& prior,
                     std::vector<ParameterPoint> parameters, std::uint64_t master_seed,
                     unsigned threads) {
  SimBatch batch;
  batch.model = simulator.model();
  batch.prior = prior;
  batch.master_seed = master_seed;
  const std::size_t m = parameters.size();
  batch.parameters = std::move(parameters);
  batch.series.resize(m);
  batch.seeds.resize(m);
  parallel_for(m, threads, [&](std::size_t i) {
    batch.seeds[i] = derive_seed(master_seed, i);
    RngStream rng(batch.seeds[i]);
    try {
      batch.series[i] = simulator(batch.parameters[i], rng);
    } catch (const Error& e) {
      throw Error(e.kind(), "item " + std::to_string(i) + ": " + e.what());
    }
  });
  return batch;
}

SimBatch generate_training_set(const Simulator& simulator, const PriorSpec& prior, std::size_t m,
                               std::uint64_t master_seed, unsigned threads) {
  if (m < 2) fail(ErrorKind::configuration, "training set needs m >= 2");
  prior.validate();
  SimBatch batch;
  batch.model = simulator.model();
  batch.prior = prior;
  batch.master_seed = master_seed;
  batch.parameters.resize(m, ParameterPoint{simulator.model(), {}});
  batch.series.resize(m);
  batch.seeds.resize(m);
  parallel_for(m, threads, [&](std::size_t i) {
    batch.seeds[i] = derive_seed(master_seed, i);
    RngStream rng(batch.seeds[i]);
    batch.parameters[i] = sample_prior(simulator.model(), prior, 1, rng).front();
    try {
      batch.series[i] = simulator(batch.parameters[i], rng);
    } catch (const Error& e) {
      throw Error(e.kind(), "item " + std::to_string(i) + ": " + e.what());
    }
  });
  return batch;
}

}  // namespace lfi
