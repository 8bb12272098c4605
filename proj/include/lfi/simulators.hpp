#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lfi/model.hpp"
#include "lfi/rng.hpp"

namespace lfi {

inline constexpr double kArchAlpha = 0.2;
inline constexpr double kLorenzForcing = 10.0;
inline constexpr std::size_t kLorenzDim = 40;

struct LorenzSettings {
  std::vector<double> x0;     // known initial state, kLorenzDim entries
  std::size_t steps = 160;
  double dt = 0.025;
  double forcing = kLorenzForcing;
  // eta_k follows a stationary AR(1) across steps: eta <- phi*eta + sigma*sqrt(1-phi^2)*z
  double eta_phi = 0.4;
  double eta_sigma = 1.0;
};

/// Fixed reference initial state used by the experiments (seeded draw around
/// the attractor's mean level).
std::vector<double> default_lorenz_x0();

struct SimulatorSettings {
  std::size_t arch_length = 100;
  std::size_t ma2_length = 100;
  std::size_t ricker_length = 50;
  double ricker_n0 = 1.0;
  std::array<std::int64_t, 2> lv_init{50, 100};
  std::vector<double> lv_obs_times;  // empty means 1, 2, ..., 50
  std::uint64_t lv_max_events = 1'000'000;
  LorenzSettings lorenz;
};

// ---------------------------------------------------------------------------
// ARCH(1) with AR(1) mean:  x(t) = theta1 x(t-1) + e(t),
//                            e(t) = zeta(t) sqrt(alpha + theta2 e(t-1)^2),  x(0) = 0.

/// Deterministic recursion from injected noise; emits x(1..zeta.size()).
std::vector<double> arch_recursion(double theta1, double theta2, double e0,
                                   std::span<const double> zeta);

/// Draws e(0) then zeta(1..T) from `rng`.
TimeSeries simulate_arch(const ParameterPoint& theta, std::size_t length, RngStream& rng);

// ---------------------------------------------------------------------------
// MA(2):  x(t) = e(t) + theta1 e(t-1) + theta2 e(t-2);  x(0) = e(0) is not emitted.

/// `noise` holds e(0..T); emits x(1..T).
std::vector<double> ma2_recursion(double theta1, double theta2, std::span<const double> noise);

TimeSeries simulate_ma2(const ParameterPoint& theta, std::size_t length, RngStream& rng);

// ---------------------------------------------------------------------------
// Lotka-Volterra Markov jump process (Gillespie).

enum class LvEvent { prey_birth = 0, predation = 1, predator_death = 2 };

struct LvTransition {
  double wait;
  LvEvent event;
};

/// Total event rate theta1 b1 + theta2 b1 b2 + theta3 b2.
double lv_total_rate(std::int64_t prey, std::int64_t predators, std::span<const double> theta);

/// Waiting time and type of the next event; nullopt in an absorbing state.
std::optional<LvTransition> lv_next_event(std::int64_t prey, std::int64_t predators,
                                          std::span<const double> theta, RngStream& rng);

/// Two channels (prey, predators). Each observation records the state in
/// force just before the observation time. Once `max_events` events have
/// fired the state is frozen for the remaining observations.
TimeSeries simulate_lotka_volterra(const ParameterPoint& theta, std::array<std::int64_t, 2> init,
                                   std::span<const double> obs_times, RngStream& rng,
                                   std::uint64_t max_events = 1'000'000);

// ---------------------------------------------------------------------------
// Ricker:  log N(t+1) = log r + log N(t) - N(t) + sigma e(t);  y(t) ~ Poisson(phi N(t)).
// theta = (log r, sigma, phi).

/// Latent log-population log N(1..T) from injected standard-normal noise.
std::vector<double> ricker_log_latent(double log_r, double sigma, double n0,
                                      std::span<const double> noise);

/// Draw order per step: e(t) then the Poisson observation.
TimeSeries simulate_ricker(const ParameterPoint& theta, std::size_t length, RngStream& rng,
                           double n0 = 1.0);

// ---------------------------------------------------------------------------
// Lorenz-96 / Wilks with linear closure g(x) = theta1 + theta2 x.

/// Drift  -x[k-1](x[k-2] - x[k+1]) - x[k] + F - theta1 - theta2 x[k] + eta[k]  (cyclic k).
void lorenz96_drift(std::span<const double> x, double theta1, double theta2, double forcing,
                    std::span<const double> eta, std::span<double> out);

/// One classical fourth-order Runge-Kutta step of dx/dt = drift(x).
template <class Drift>
void rk4_step(Drift&& drift, std::span<double> x, double dt, std::vector<double>& scratch) {
  const std::size_t n = x.size();
  scratch.resize(5 * n);
  std::span<double> k1(scratch.data(), n), k2(scratch.data() + n, n), k3(scratch.data() + 2 * n, n),
      k4(scratch.data() + 3 * n, n), tmp(scratch.data() + 4 * n, n);
  drift(std::span<const double>(x), k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
  drift(std::span<const double>(tmp), k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
  drift(std::span<const double>(tmp), k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
  drift(std::span<const double>(tmp), k4);
  for (std::size_t i = 0; i < n; ++i) x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

/// Integrates with eta frozen within each step. With `stochastic` false eta is
/// identically zero. Output is kLorenzDim x (steps + 1), including x0.
TimeSeries simulate_lorenz96(const ParameterPoint& theta, const LorenzSettings& settings,
                             RngStream& rng, bool stochastic = true);

// ---------------------------------------------------------------------------

/// Model-dispatching simulator with fixed settings.
class Simulator {
 public:
  explicit Simulator(ModelId model, SimulatorSettings settings = {});

  ModelId model() const noexcept { return model_; }
  const SimulatorSettings& settings() const noexcept { return settings_; }

  /// (channels, length) of every series this simulator produces.
  std::pair<std::size_t, std::size_t> shape() const noexcept;

  TimeSeries operator()(const ParameterPoint& theta, RngStream& rng) const;

 private:
  ModelId model_;
  SimulatorSettings settings_;
};

/// Parameter/data pairs with the seed used for each item.
struct SimBatch {
  ModelId model = ModelId::arch;
  PriorSpec prior;
  std::uint64_t master_seed = 0;
  std::vector<ParameterPoint> parameters;
  std::vector<TimeSeries> series;
  std::vector<std::uint64_t> seeds;

  std::size_t size() const noexcept { return series.size(); }
};

/// (train, validation) item counts: floor(ratio * m) clamped so both are >= 1.
std::pair<std::size_t, std::size_t> split_sizes(std::size_t m, double train_ratio);

/// Item i uses RngStream(derive_seed(master_seed, i)) for its prior draw and
/// its simulation, so the batch is independent of `threads`.
SimBatch generate_training_set(const Simulator& simulator, const PriorSpec& prior, std::size_t m,
                               std::uint64_t master_seed, unsigned threads = 1);

/// Same construction for explicitly given parameters (observed datasets).
SimBatch simulate_at(const Simulator& simulator, const PriorSpec& prior,
                     std::vector<ParameterPoint> parameters, std::uint64_t master_seed,
                     unsigned threads = 1);

}  // namespace lfi
