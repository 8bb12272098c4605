#pragma once

// Config-driven experiment stages. Every stage reads the artifacts of the
// previous one from the run directory, so stages can run standalone.
//
// Run directory layout:
//   config.json                       resolved experiment config
//   data/train.json                   training SimBatch (+ blobs)
//   data/observed.json                observed datasets with their true theta
//   model/network.json                DireNet checkpoint (+ weights blob)
//   model/training_report.json
//   banks/<method>.json               fitted ratio models per grid node
//   posteriors/<method>/task_NNNN.json
//   report/results.csv, report/summary.json
//   manifest.json                     digests of everything above

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lfi/eval.hpp"
#include "lfi/lfire/features.hpp"
#include "lfi/lfire/posterior.hpp"
#include "lfi/model.hpp"
#include "lfi/nnet/network.hpp"
#include "lfi/nnet/train.hpp"
#include "lfi/oracle.hpp"

namespace lfi::pipeline {

namespace fs = std::filesystem;

/// Environment variable giving the root for relative output directories.
inline constexpr const char* kOutputRootEnv = "LFI_OUTPUT_ROOT";

struct BootstrapSettings {
  std::size_t resamples = 200;
  eval::Statistic statistic = eval::Statistic::mean;
  double level = 0.95;
  friend bool operator==(const BootstrapSettings&, const BootstrapSettings&) = default;
};

struct KdeSettings {
  double bandwidth = 0.025;
  std::size_t points = 200;
  friend bool operator==(const KdeSettings&, const KdeSettings&) = default;
};

struct ExperimentConfig {
  ModelId model = ModelId::arch;
  PriorSpec prior = default_prior(ModelId::arch);
  std::size_t m = 100000;
  nn::NetworkConfig network;
  nn::TrainConfig train;  // seed is derived from the master seed
  std::vector<std::size_t> grid{20, 20};
  std::size_t n_theta = 1000;
  std::size_t n_marginal = 1000;
  std::size_t tasks = 500;
  std::vector<lfire::SummaryKind> methods{lfire::SummaryKind::direnet, lfire::SummaryKind::manual};
  std::uint64_t seed = 1;
  std::string output = "runs/default";
  lfire::FitOptions fit;
  bool fresh_marginal = false;
  double max_failure_fraction = 0.01;
  OracleSettings oracle;
  BootstrapSettings bootstrap;
  KdeSettings kde;

  /// Counts positive, grid matches the prior dimension, network shape
  /// matches the simulator, methods available for the model.
  void validate() const;
  bool uses_direnet() const;
};

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

/// Missing fields take defaults (prior and network follow the model);
/// unknown top-level keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const fs::path& path);

/// Derived seeds of the individual stages.
struct StageSeeds {
  std::uint64_t training_set, observed, network, banks, bootstrap;
};
StageSeeds stage_seeds(std::uint64_t master);

/// Output directory: `--out` if given, else config.output resolved against
/// $LFI_OUTPUT_ROOT when that is set and the path is relative.
fs::path resolve_output(const ExperimentConfig& config, const std::optional<fs::path>& out_flag);

struct Layout {
  fs::path root;
  fs::path config() const { return root / "config.json"; }
  fs::path train_batch() const { return root / "data" / "train.json"; }
  fs::path observed() const { return root / "data" / "observed.json"; }
  fs::path checkpoint() const { return root / "model" / "network.json"; }
  fs::path training_report() const { return root / "model" / "training_report.json"; }
  fs::path bank(const std::string& method) const { return root / "banks" / (method + ".json"); }
  fs::path posterior(const std::string& method, std::size_t task) const;
  fs::path results_csv() const { return root / "report" / "results.csv"; }
  fs::path summary() const { return root / "report" / "summary.json"; }
  fs::path manifest() const { return root / "manifest.json"; }
};

/// Name under which exact posteriors are stored.
inline constexpr const char* kExactMethod = "exact";

struct InferOptions {
  std::optional<fs::path> checkpoint;  // default: the run's checkpoint
  std::optional<fs::path> observed;    // default: the run's observed datasets
  /// Replace every method by the intercept-only summary (debugging aid: the
  /// posterior must equal the prior).
  bool constant_summary = false;
};

void write_config(const ExperimentConfig& config, const Layout& layout);
void cmd_simulate(const ExperimentConfig& config, const Layout& layout, unsigned threads);
/// With `resume`, continues from the saved checkpoint's training state.
nn::Checkpoint cmd_train(const ExperimentConfig& config, const Layout& layout, unsigned threads,
                         bool resume = false);
void cmd_infer(const ExperimentConfig& config, const Layout& layout, unsigned threads,
               const InferOptions& options = {});

struct MethodSummary {
  std::string method;
  std::size_t tasks = 0;
  double mean_kl = -1.0;  // < 0 without an exact posterior
  std::vector<double> mean_relative_error;
};

struct EvaluationSummary {
  std::vector<eval::TaskResult> rows;
  std::vector<MethodSummary> methods;
  std::size_t excluded_tasks = 0;  // tasks with a near-zero true component
  /// First method minus second method, when two or more methods ran.
  std::optional<std::pair<std::string, std::string>> pair;
  std::vector<double> kl_difference;                       // per task
  std::optional<eval::BootstrapReport> kl_difference_ci;
  std::vector<std::vector<double>> rel_error_difference;   // [dim][scored task]
  std::vector<eval::BootstrapReport> rel_error_difference_ci;
};

nlohmann::json to_json(const EvaluationSummary& summary, const KdeSettings& kde);

EvaluationSummary cmd_evaluate(const ExperimentConfig& config, const Layout& layout, unsigned threads);

/// Reads numbers from a CSV column (by header name) or a plain one-per-line file.
std::vector<double> read_samples(const fs::path& path, const std::string& column = "");

/// Small end-to-end ARCH run (simulate, train, infer, evaluate).
ExperimentConfig smoke_config(std::uint64_t seed);

/// Records a stage outcome in manifest.json and refreshes the digest of every
/// file under the run directory. Stage timestamps live only in the manifest.
void record_stage(const Layout& layout, const std::string& stage, const std::string& status);

/// Sorted (relative path, sha256) pairs for every artifact except the manifest.
std::vector<std::pair<std::string, std::string>> artifact_digests(const Layout& layout);

}  // namespace lfi::pipeline
