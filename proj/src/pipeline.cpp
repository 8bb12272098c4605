#include "lfi/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "lfi/error.hpp"
#include "lfi/io.hpp"
#include "lfi/log.hpp"
#include "lfi/rng.hpp"
#include "lfi/simulators.hpp"

namespace lfi::pipeline {
namespace {

using nlohmann::json;

const std::set<std::string> kConfigKeys = {
    "model", "prior",  "m",         "network", "train",     "grid",      "n_theta",   "n_m",
    "tasks", "methods", "seed",     "output",  "lfire",     "oracle",    "bootstrap", "kde"};

json fit_to_json(const ExperimentConfig& c) {
  return {{"path_length", c.fit.path_length},
          {"lambda_min_ratio", c.fit.lambda_min_ratio},
          {"folds", c.fit.folds},
          {"tolerance", c.fit.tolerance},
          {"max_sweeps", c.fit.max_sweeps},
          {"standardize", c.fit.standardize},
          {"early_path_stop", c.fit.early_path_stop},
          {"fresh_marginal", c.fresh_marginal},
          {"max_failure_fraction", c.max_failure_fraction}};
}

void fit_from_json(const json& j, ExperimentConfig& c) {
  c.fit.path_length = j.value("path_length", c.fit.path_length);
  c.fit.lambda_min_ratio = j.value("lambda_min_ratio", c.fit.lambda_min_ratio);
  c.fit.folds = j.value("folds", c.fit.folds);
  c.fit.tolerance = j.value("tolerance", c.fit.tolerance);
  c.fit.max_sweeps = j.value("max_sweeps", c.fit.max_sweeps);
  c.fit.standardize = j.value("standardize", c.fit.standardize);
  c.fit.early_path_stop = j.value("early_path_stop", c.fit.early_path_stop);
  c.fresh_marginal = j.value("fresh_marginal", c.fresh_marginal);
  c.max_failure_fraction = j.value("max_failure_fraction", c.max_failure_fraction);
}

nn::NetworkConfig network_for(ModelId model) {
  const auto [channels, length] = Simulator(model).shape();
  return nn::default_network_config(channels, length, parameter_dim(model));
}

std::string iso_time_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string method_name(lfire::SummaryKind kind) { return lfire::to_string(kind); }

lfire::LfireSettings lfire_settings(const ExperimentConfig& c) {
  lfire::LfireSettings s;
  s.n_theta = c.n_theta;
  s.n_marginal = c.n_marginal;
  s.fit = c.fit;
  s.fresh_marginal = c.fresh_marginal;
  s.max_failure_fraction = c.max_failure_fraction;
  return s;
}

SimBatch load_batch_for(const ExperimentConfig& config, const fs::path& path, const char* what) {
  if (!fs::exists(path)) {
    fail(ErrorKind::io, std::string(what) + " not found: " + path.string() + " (run `simulate` first)");
  }
  SimBatch batch = io::load_simbatch(path);
  if (batch.model != config.model) {
    fail(ErrorKind::configuration, std::string(what) + " " + path.string() + " holds model '" +
                                       std::string(to_string(batch.model)) + "', config says '" +
                                       std::string(to_string(config.model)) + "'");
  }
  return batch;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

void ExperimentConfig::validate() const {
  prior.validate();
  if (prior.dim() != parameter_dim(model)) {
    fail(ErrorKind::configuration, "prior dimension does not match model '" + std::string(to_string(model)) + "'");
  }
  if (m < 2) fail(ErrorKind::configuration, "m must be at least 2 (got " + std::to_string(m) + ")");
  if (n_theta == 0 || n_marginal < 2) fail(ErrorKind::configuration, "n_theta must be positive and n_m at least 2");
  if (tasks == 0) fail(ErrorKind::configuration, "tasks must be positive");
  if (grid.size() != prior.dim()) fail(ErrorKind::configuration, "grid needs one size per parameter");
  for (auto g : grid) {
    if (g == 0) fail(ErrorKind::configuration, "grid sizes must be positive");
  }
  if (methods.empty()) fail(ErrorKind::configuration, "at least one summary method is required");
  for (auto k : methods) {
    if (k == lfire::SummaryKind::manual && model == ModelId::ricker) {
      fail(ErrorKind::configuration, "no manual summary statistics for model 'ricker'");
    }
  }
  if (fit.folds < 2) fail(ErrorKind::configuration, "lfire.folds must be at least 2");
  if (fit.path_length == 0) fail(ErrorKind::configuration, "lfire.path_length must be positive");
  if (!(bootstrap.level > 0.0 && bootstrap.level < 1.0) || bootstrap.resamples == 0) {
    fail(ErrorKind::configuration, "bootstrap needs resamples > 0 and level in (0, 1)");
  }
  if (!(kde.bandwidth > 0.0) || kde.points < 2) fail(ErrorKind::configuration, "kde needs bandwidth > 0 and points >= 2");
  train.validate();
  network.validate();
  const auto [channels, length] = Simulator(model).shape();
  if (network.in_channels != channels || network.in_length != length || network.output_dim != parameter_dim(model)) {
    fail(ErrorKind::configuration, "network input/output shape does not match model '" +
                                       std::string(to_string(model)) + "'");
  }
}

bool ExperimentConfig::uses_direnet() const {
  return std::find(methods.begin(), methods.end(), lfire::SummaryKind::direnet) != methods.end();
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) { return to_json(a) == to_json(b); }

json to_json(const ExperimentConfig& c) {
  json train = nn::to_json(c.train);
  train.erase("seed");
  json methods = json::array();
  for (auto k : c.methods) methods.push_back(method_name(k));
  return {{"model", std::string(to_string(c.model))},
          {"prior", io::to_json(c.prior)},
          {"m", c.m},
          {"network", nn::to_json(c.network)},
          {"train", train},
          {"grid", c.grid},
          {"n_theta", c.n_theta},
          {"n_m", c.n_marginal},
          {"tasks", c.tasks},
          {"methods", methods},
          {"seed", c.seed},
          {"output", c.output},
          {"lfire", fit_to_json(c)},
          {"oracle", {{"quadrature_nodes", c.oracle.quadrature_nodes}}},
          {"bootstrap",
           {{"resamples", c.bootstrap.resamples},
            {"statistic", eval::to_string(c.bootstrap.statistic)},
            {"level", c.bootstrap.level}}},
          {"kde", {{"bandwidth", c.kde.bandwidth}, {"points", c.kde.points}}}};
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorKind::configuration, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kConfigKeys.contains(key)) fail(ErrorKind::configuration, "unknown config key '" + key + "'");
  }
  try {
    ExperimentConfig c;
    c.model = parse_model_id(j.value("model", std::string("arch")));
    c.prior = j.contains("prior") ? io::prior_from_json(j.at("prior")) : default_prior(c.model);
    c.network = j.contains("network") ? nn::network_config_from_json(j.at("network")) : network_for(c.model);
    if (j.contains("train")) {
      json train = j.at("train");
      train.erase("seed");
      c.train = nn::train_config_from_json(train);
    }
    c.m = j.value("m", c.m);
    c.grid = j.value("grid", std::vector<std::size_t>(c.prior.dim(), 20));
    c.n_theta = j.value("n_theta", c.n_theta);
    c.n_marginal = j.value("n_m", c.n_marginal);
    c.tasks = j.value("tasks", c.tasks);
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& name : j.at("methods")) c.methods.push_back(lfire::parse_summary_kind(name.get<std::string>()));
    } else if (c.model == ModelId::ricker) {
      c.methods = {lfire::SummaryKind::direnet};
    }
    c.seed = j.value("seed", c.seed);
    c.output = j.value("output", c.output);
    if (j.contains("lfire")) fit_from_json(j.at("lfire"), c);
    if (j.contains("oracle")) c.oracle.quadrature_nodes = j.at("oracle").value("quadrature_nodes", c.oracle.quadrature_nodes);
    if (j.contains("bootstrap")) {
      const auto& b = j.at("bootstrap");
      c.bootstrap.resamples = b.value("resamples", c.bootstrap.resamples);
      c.bootstrap.statistic = eval::parse_statistic(b.value("statistic", std::string("mean")));
      c.bootstrap.level = b.value("level", c.bootstrap.level);
    }
    if (j.contains("kde")) {
      c.kde.bandwidth = j.at("kde").value("bandwidth", c.kde.bandwidth);
      c.kde.points = j.at("kde").value("points", c.kde.points);
    }
    return c;
  } catch (const json::exception& e) {
    fail(ErrorKind::configuration, std::string("malformed config: ") + e.what());
  }
}

ExperimentConfig load_config(const fs::path& path) {
  json doc;
  try {
    doc = io::read_json(path);
  } catch (const Error& e) {
    if (!fs::exists(path)) throw;
    fail(ErrorKind::configuration, e.what());
  }
  return config_from_json(doc);
}

StageSeeds stage_seeds(std::uint64_t master) {
  return {derive_seed(master, 1), derive_seed(master, 2), derive_seed(master, 3), derive_seed(master, 4),
          derive_seed(master, 5)};
}

fs::path resolve_output(const ExperimentConfig& config, const std::optional<fs::path>& out_flag) {
  if (out_flag) return *out_flag;
  fs::path out(config.output);
  if (out.is_relative()) {
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) return fs::path(root) / out;
  }
  return out;
}

fs::path Layout::posterior(const std::string& method, std::size_t task) const {
  char name[32];
  std::snprintf(name, sizeof name, "task_%04zu.json", task);
  return root / "posteriors" / method / name;
}

// ---------------------------------------------------------------------------
// Stages

void write_config(const ExperimentConfig& config, const Layout& layout) {
  io::write_json(layout.config(), to_json(config));
}

void cmd_simulate(const ExperimentConfig& config, const Layout& layout, unsigned threads) {
  config.validate();
  const auto seeds = stage_seeds(config.seed);
  const Simulator sim(config.model);
  log::info("simulating " + std::to_string(config.m) + " training items");
  io::save_simbatch(generate_training_set(sim, config.prior, config.m, seeds.training_set, threads),
                    layout.train_batch());

  // Observed datasets: theta_true from the prior, recorded with the series.
  RngStream rng(seeds.observed);
  auto thetas = sample_prior(config.model, config.prior, config.tasks, rng);
  log::info("simulating " + std::to_string(config.tasks) + " observed datasets");
  io::save_simbatch(simulate_at(sim, config.prior, std::move(thetas), derive_seed(seeds.observed, 1), threads),
                    layout.observed());
}

nn::Checkpoint cmd_train(const ExperimentConfig& config, const Layout& layout, unsigned threads, bool resume) {
  config.validate();
  const SimBatch batch = load_batch_for(config, layout.train_batch(), "training set");
  nn::TrainConfig train = config.train;
  train.seed = stage_seeds(config.seed).network;

  std::optional<nn::Checkpoint> previous;
  if (resume) {
    if (!fs::exists(layout.checkpoint())) {
      fail(ErrorKind::io, "no checkpoint to resume from: " + layout.checkpoint().string());
    }
    previous = nn::load_checkpoint(layout.checkpoint());
    if (!(previous->net.network.config() == config.network) || !(previous->train == train)) {
      fail(ErrorKind::configuration, "checkpoint was trained under a different network or training config");
    }
  }
  nn::Checkpoint ck =
      nn::train_summary_network(batch, config.network, train, threads, previous ? &*previous : nullptr);
  nn::save_checkpoint(ck, layout.checkpoint());
  io::write_json(layout.training_report(), nn::to_json(ck.net.report));
  return ck;
}

void cmd_infer(const ExperimentConfig& config, const Layout& layout, unsigned threads, const InferOptions& options) {
  config.validate();
  const SimBatch observed = load_batch_for(config, options.observed.value_or(layout.observed()), "observed datasets");
  const auto seeds = stage_seeds(config.seed);
  const Simulator sim(config.model);

  std::vector<lfire::SummaryKind> methods = config.methods;
  if (options.constant_summary) methods = {lfire::SummaryKind::constant};

  std::optional<nn::Checkpoint> ck;
  if (std::find(methods.begin(), methods.end(), lfire::SummaryKind::direnet) != methods.end()) {
    const fs::path path = options.checkpoint.value_or(layout.checkpoint());
    if (!fs::exists(path)) {
      fail(ErrorKind::configuration, "summary method 'direnet' needs a trained checkpoint; not found: " + path.string());
    }
    ck = nn::load_checkpoint(path);
    if (!(ck->net.network.config() == config.network)) {
      fail(ErrorKind::configuration, "checkpoint network does not match the config");
    }
  }

  for (auto kind : methods) {
    const std::string name = method_name(kind);
    const lfire::FeatureMap features = kind == lfire::SummaryKind::direnet ? lfire::FeatureMap::direnet(ck->net)
                                       : kind == lfire::SummaryKind::manual ? lfire::FeatureMap::manual(config.model)
                                                                             : lfire::FeatureMap::constant();
    log::info("fitting ratio models for '" + name + "' on a " + std::to_string(GridSpec::spanning(config.prior, config.grid).size()) +
              "-node grid");
    const auto started = std::chrono::steady_clock::now();
    // One bank per method serves every observed dataset; all methods share
    // the bank seed so their simulations are paired.
    const auto bank = lfire::build_ratio_bank(sim, config.prior, config.grid, features, lfire_settings(config),
                                              seeds.banks, threads);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    log::info("'" + name + "' bank ready in " + std::to_string(secs) + " s (" + std::to_string(bank.failures()) +
              " failed nodes)");
    lfire::save_ratio_bank(bank, layout.bank(name));
    for (std::size_t t = 0; t < observed.size(); ++t) {
      save_posterior_grid(bank.posterior(features(observed.series[t])), layout.posterior(name, t));
    }
  }

  if (has_exact_likelihood(config.model) && !options.constant_summary) {
    log::info("computing exact posteriors");
    for (std::size_t t = 0; t < observed.size(); ++t) {
      save_posterior_grid(exact_posterior(config.model, observed.series[t], config.prior, config.grid, config.oracle, threads),
                          layout.posterior(kExactMethod, t));
    }
  }
}

// ---------------------------------------------------------------------------
// Evaluation

EvaluationSummary cmd_evaluate(const ExperimentConfig& config, const Layout& layout, unsigned threads) {
  config.validate();
  const SimBatch observed = load_batch_for(config, layout.observed(), "observed datasets");
  const std::size_t n = observed.size(), d = parameter_dim(config.model);
  const bool with_exact = has_exact_likelihood(config.model) && fs::exists(layout.posterior(kExactMethod, 0));

  EvaluationSummary out;
  std::vector<std::string> names;
  for (auto k : config.methods) names.push_back(method_name(k));
  for (const auto& name : names) {
    for (std::size_t t = 0; t < n; ++t) {
      if (!fs::exists(layout.posterior(name, t))) {
        fail(ErrorKind::configuration, "unpaired inputs: method '" + name + "' has no posterior for task " +
                                           std::to_string(t) + " (" + layout.posterior(name, t).string() + ")");
      }
    }
  }

  std::vector<bool> scored(n, true);
  for (std::size_t t = 0; t < n; ++t) {
    for (double v : observed.parameters[t].values) scored[t] = scored[t] && std::abs(v) >= eval::kRelativeErrorMinMagnitude;
    out.excluded_tasks += !scored[t];
  }
  if (out.excluded_tasks > 0) {
    log::warn(std::to_string(out.excluded_tasks) + " task(s) with a near-zero true parameter excluded from relative errors");
  }

  // kl[method][task], re[method][task][dim]
  std::vector<std::vector<double>> kl(names.size(), std::vector<double>(n, -1.0));
  std::vector<std::vector<std::vector<double>>> re(names.size(), std::vector<std::vector<double>>(n));
  for (std::size_t t = 0; t < n; ++t) {
    std::optional<PosteriorGrid> exact;
    if (with_exact) exact = load_posterior_grid(layout.posterior(kExactMethod, t));
    for (std::size_t k = 0; k < names.size(); ++k) {
      const PosteriorGrid post = load_posterior_grid(layout.posterior(names[k], t));
      eval::TaskResult row;
      row.task = t;
      row.method = names[k];
      row.theta_true = observed.parameters[t].values;
      row.posterior_mean = eval::posterior_mean(post);
      if (scored[t]) row.relative_error = eval::relative_error(row.posterior_mean, row.theta_true);
      if (exact) row.kl = eval::kl_divergence(*exact, post);
      kl[k][t] = row.kl;
      re[k][t] = row.relative_error;
      out.rows.push_back(std::move(row));
    }
  }

  for (std::size_t k = 0; k < names.size(); ++k) {
    MethodSummary s;
    s.method = names[k];
    s.tasks = n;
    if (with_exact) s.mean_kl = mean_of(kl[k]);
    s.mean_relative_error.assign(d, 0.0);
    std::size_t count = 0;
    for (std::size_t t = 0; t < n; ++t) {
      if (!scored[t]) continue;
      ++count;
      for (std::size_t j = 0; j < d; ++j) s.mean_relative_error[j] += re[k][t][j];
    }
    for (double& v : s.mean_relative_error) v = count ? v / static_cast<double>(count) : std::nan("");
    out.methods.push_back(std::move(s));
  }

  if (names.size() >= 2) {
    out.pair = {names[0], names[1]};
    const auto seed = stage_seeds(config.seed).bootstrap;
    const auto& bs = config.bootstrap;
    if (with_exact) {
      out.kl_difference = eval::rel_error_difference(kl[0], kl[1]);
      if (n >= 2) {
        out.kl_difference_ci = eval::bootstrap_ci(out.kl_difference, bs.statistic, bs.resamples, bs.level,
                                                  derive_seed(seed, 0), threads);
      }
    }
    out.rel_error_difference.assign(d, {});
    for (std::size_t j = 0; j < d; ++j) {
      std::vector<double> a, b;
      for (std::size_t t = 0; t < n; ++t) {
        if (!scored[t]) continue;
        a.push_back(re[0][t][j]);
        b.push_back(re[1][t][j]);
      }
      out.rel_error_difference[j] = eval::rel_error_difference(a, b);
      if (a.size() >= 2) {
        out.rel_error_difference_ci.push_back(eval::bootstrap_ci(out.rel_error_difference[j], bs.statistic,
                                                                 bs.resamples, bs.level, derive_seed(seed, j + 1), threads));
      }
    }
  }

  eval::write_text(layout.results_csv(), eval::task_results_csv(out.rows));
  io::write_json(layout.summary(), to_json(out, config.kde));
  return out;
}

json to_json(const EvaluationSummary& s, const KdeSettings& kde) {
  json methods = json::array();
  for (const auto& m : s.methods) {
    json e = {{"method", m.method}, {"tasks", m.tasks}, {"mean_relative_error", m.mean_relative_error}};
    if (m.mean_kl >= 0.0) e["mean_kl"] = m.mean_kl;
    methods.push_back(e);
  }
  json doc = {{"methods", methods}, {"excluded_tasks", s.excluded_tasks}};
  if (s.pair) {
    json diff = {{"a", s.pair->first}, {"b", s.pair->second}};
    if (!s.kl_difference.empty()) {
      diff["kl_mean"] = mean_of(s.kl_difference);
      if (s.kl_difference_ci) diff["kl_bootstrap"] = eval::to_json(*s.kl_difference_ci);
    }
    json rel = json::array();
    for (std::size_t j = 0; j < s.rel_error_difference.size(); ++j) {
      const auto& delta = s.rel_error_difference[j];
      json e = {{"dim", j + 1}, {"tasks", delta.size()}};
      if (!delta.empty()) {
        e["mean"] = mean_of(delta);
        const auto [lo, hi] = std::minmax_element(delta.begin(), delta.end());
        const auto xs = eval::linspace(*lo - 4.0 * kde.bandwidth, *hi + 4.0 * kde.bandwidth, kde.points);
        e["kde"] = {{"bandwidth", kde.bandwidth},
                    {"points", eval::kde_curve_json(xs, eval::gaussian_kde(delta, kde.bandwidth, xs))}};
      }
      if (j < s.rel_error_difference_ci.size()) e["bootstrap"] = eval::to_json(s.rel_error_difference_ci[j]);
      rel.push_back(e);
    }
    diff["rel_error"] = rel;
    doc["difference"] = diff;
  }
  return doc;
}

std::vector<double> read_samples(const fs::path& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  std::vector<double> out;
  std::string line;
  std::ptrdiff_t col = -1;
  const auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!column.empty()) {
    if (!std::getline(in, line)) fail(ErrorKind::configuration, path.string() + " is empty");
    const auto header = split(line);
    const auto it = std::find(header.begin(), header.end(), column);
    if (it == header.end()) fail(ErrorKind::configuration, "column '" + column + "' not found in " + path.string());
    col = it - header.begin();
  }
  std::size_t lineno = column.empty() ? 0 : 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::string cell = line;
    if (col >= 0) {
      const auto cells = split(line);
      if (static_cast<std::size_t>(col) >= cells.size()) continue;
      cell = cells[static_cast<std::size_t>(col)];
      if (cell.empty()) continue;  // unscored task
    }
    try {
      std::size_t used = 0;
      const double v = std::stod(cell, &used);
      if (used != cell.size()) throw std::invalid_argument(cell);
      out.push_back(v);
    } catch (const std::exception&) {
      fail(ErrorKind::configuration, path.string() + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
    }
  }
  return out;
}

ExperimentConfig smoke_config(std::uint64_t seed) {
  ExperimentConfig c;
  c.model = ModelId::arch;
  c.prior = default_prior(c.model);
  c.network = network_for(c.model);
  c.m = 200;
  c.train.max_epochs = 2;
  c.train.patience = 2;
  c.train.batch_size = 64;
  c.grid = {5, 5};
  c.n_theta = 60;
  c.n_marginal = 60;
  c.tasks = 4;
  c.seed = seed;
  c.output = "runs/smoke";
  c.fit.folds = 5;
  c.fit.path_length = 30;
  c.bootstrap.resamples = 50;
  return c;
}

// ---------------------------------------------------------------------------
// Manifest

std::vector<std::pair<std::string, std::string>> artifact_digests(const Layout& layout) {
  std::vector<std::pair<std::string, std::string>> out;
  if (!fs::exists(layout.root)) return out;
  for (const auto& entry : fs::recursive_directory_iterator(layout.root)) {
    if (!entry.is_regular_file() || entry.path() == layout.manifest()) continue;
    out.emplace_back(fs::relative(entry.path(), layout.root).generic_string(), io::sha256_file(entry.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

void record_stage(const Layout& layout, const std::string& stage, const std::string& status) {
  json doc = {{"format", "lfi-run-manifest"}, {"stages", json::object()}};
  if (fs::exists(layout.manifest())) {
    try {
      doc = io::read_json(layout.manifest());
    } catch (const Error& e) {
      log::warn(std::string("rewriting unreadable manifest: ") + e.what());
    }
  }
  doc["stages"][stage] = {{"status", status}, {"completed_at", iso_time_now()}};
  doc["config_sha256"] = fs::exists(layout.config()) ? io::sha256_file(layout.config()) : std::string();
  json artifacts = json::array();
  for (const auto& [path, digest] : artifact_digests(layout)) artifacts.push_back({{"path", path}, {"sha256", digest}});
  doc["artifacts"] = artifacts;
  io::write_json(layout.manifest(), doc);
}

}  // namespace lfi::pipeline
