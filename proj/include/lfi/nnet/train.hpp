#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "lfi/model.hpp"
#include "lfi/nnet/network.hpp"
#include "lfi/simulators.hpp"

namespace lfi::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

struct AdamState {
  std::vector<double> m, v;
  std::uint64_t t = 0;
};

/// Bias-corrected Adam step. An empty state is zero-initialized to the size of w.
void adam_update(std::span<double> w, std::span<const double> g, AdamState& state,
                 const AdamConfig& hyper);

struct TrainConfig {
  AdamConfig adam;
  std::size_t batch_size = 256;
  std::size_t max_epochs = 100;
  /// Stop once this many consecutive epochs fail to improve the best
  /// validation loss (0 behaves like 1).
  std::size_t patience = 30;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // batch objectives averaged over the epoch
  double val_loss = 0.0;    // mean squared error on standardized targets
};

struct TrainingReport {
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  bool stopped_early = false;
  std::vector<EpochRecord> history;
};

/// Affine per-slot normalization: z = (v - mean) / scale; scale is never 0.
struct Standardizer {
  std::vector<double> mean, scale;
  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

/// Trained predictor: raw series -> parameter estimate on the original scale.
struct SummaryNetwork {
  Network network;
  Standardizer input;   // per channel
  Standardizer target;  // per parameter
  TrainingReport report;

  explicit SummaryNetwork(const NetworkConfig& config);

  std::size_t output_dim() const noexcept { return network.config().output_dim; }

  /// Deterministic; throws a configuration error on a shape mismatch.
  std::vector<double> predict(const TimeSeries& x) const;
  /// Row i holds the prediction for xs[i].
  std::vector<std::vector<double>> predict_batch(std::span<const TimeSeries> xs,
                                                 unsigned threads = 1) const;
};

std::vector<double> predict_theta(const SummaryNetwork& net, const TimeSeries& x);

/// Optimizer state needed to continue training bit-exactly.
struct TrainState {
  std::vector<double> current;
  AdamState adam;
  std::size_t next_epoch = 0;
  std::size_t wait = 0;
};

struct Checkpoint {
  SummaryNetwork net;  // best weights
  TrainConfig train;
  std::optional<TrainState> state;
};

/// Trains on the first floor(train_fraction * m) items and validates on the
/// rest. Returns the best-validation weights. Item order of each epoch is a
/// Fisher-Yates shuffle driven by (seed, epoch), so resuming from a
/// checkpoint reproduces the uninterrupted run. Throws a training error
/// naming the epoch when a loss becomes non-finite.
Checkpoint train_summary_network(const SimBatch& batch, const NetworkConfig& netcfg,
                                 const TrainConfig& traincfg, unsigned threads = 1,
                                 const Checkpoint* resume = nullptr);

nlohmann::json to_json(const NetworkConfig& config);
NetworkConfig network_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainingReport& report);

/// JSON (configs, report, standardization, tensor table) plus a float64-le
/// blob holding the best weights, then the training state if present.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& json_path);
Checkpoint load_checkpoint(const std::filesystem::path& json_path);

}  // namespace lfi::nn
