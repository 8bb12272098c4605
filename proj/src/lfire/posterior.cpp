#include "lfi/lfire/posterior.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "lfi/error.hpp"
#include "lfi/io.hpp"
#include "lfi/log.hpp"
#include "lfi/parallel.hpp"
#include "lfi/rng.hpp"

namespace lfi::lfire {
namespace {

using nlohmann::json;

constexpr std::uint64_t kFoldStream = 0xF01D;
constexpr std::uint64_t kMarginalStream = 0x4D41;

std::string format_theta(std::span<const double> theta) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < theta.size(); ++i) os << (i ? ", " : "") << theta[i];
  os << ')';
  return os.str();
}

std::vector<std::vector<double>> features_of(const SimBatch& batch, const FeatureMap& features,
                                             unsigned threads) {
  std::vector<std::vector<double>> out(batch.size());
  parallel_for(batch.size(), threads, [&](std::size_t i) { out[i] = features(batch.series[i]); });
  return out;
}

const char* status_name(NodeStatus s) {
  switch (s) {
    case NodeStatus::ok: return "ok";
    case NodeStatus::outside_prior: return "outside-prior";
    case NodeStatus::failed: return "failed";
  }
  return "unknown";
}

NodeStatus parse_status(const std::string& s) {
  if (s == "ok") return NodeStatus::ok;
  if (s == "outside-prior") return NodeStatus::outside_prior;
  if (s == "failed") return NodeStatus::failed;
  fail(ErrorKind::io, "unknown node status '" + s + "'");
}

}  // namespace

std::size_t RatioBank::failures() const noexcept {
  std::size_t n = 0;
  for (auto s : status) n += s == NodeStatus::failed;
  return n;
}

PosteriorGrid RatioBank::posterior(std::span<const double> psi_obs) const {
  std::vector<double> logw(grid.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (status[i] == NodeStatus::ok) logw[i] = log_ratio(models[i], psi_obs);
  }
  return normalize_log_weights(model, prior, grid, logw);
}

RatioBank build_ratio_bank(const Simulator& simulator, const PriorSpec& prior,
                           std::span<const std::size_t> grid_shape, const FeatureMap& features,
                           const LfireSettings& settings, std::uint64_t seed, unsigned threads) {
  if (settings.n_theta == 0 || settings.n_marginal == 0) {
    fail(ErrorKind::configuration, "n_theta and n_m must be positive");
  }
  prior.validate();
  RatioBank bank;
  bank.model = simulator.model();
  bank.prior = prior;
  bank.grid = GridSpec::spanning(prior, grid_shape);
  bank.summary = features.kind();
  const std::size_t nodes = bank.grid.size();
  bank.status.assign(nodes, NodeStatus::outside_prior);
  bank.models.assign(nodes, RatioModel{});

  const std::uint64_t marginal_seed = derive_seed(seed, 0);
  std::vector<std::vector<double>> shared_marginal;
  if (!settings.fresh_marginal) {
    const auto pool = generate_training_set(simulator, prior, settings.n_marginal, marginal_seed, threads);
    shared_marginal = features_of(pool, features, threads);
  }

  std::vector<std::string> errors(nodes);
  parallel_for(nodes, threads, [&](std::size_t i) {
    const auto theta = bank.grid.node(i);
    if (!prior.contains(theta)) return;
    const auto started = std::chrono::steady_clock::now();
    const std::uint64_t node_seed = derive_seed(seed, i + 1);
    try {
      std::vector<ParameterPoint> at(settings.n_theta, ParameterPoint::make(bank.model, theta));
      const auto theta_batch = simulate_at(simulator, prior, std::move(at), node_seed, 1);
      auto theta_features = features_of(theta_batch, features, 1);
      std::vector<std::vector<double>> marginal;
      if (settings.fresh_marginal) {
        const auto pool = generate_training_set(simulator, prior, settings.n_marginal,
                                                derive_seed(node_seed, kMarginalStream), 1);
        marginal = features_of(pool, features, 1);
      } else {
        marginal = shared_marginal;
      }
      ClassificationSets sets(std::move(theta_features), std::move(marginal));
      FitOptions fit = settings.fit;
      fit.fold_seed = derive_seed(node_seed, kFoldStream);
      bank.models[i] = fit_ratio(sets, fit);
      bank.models[i].theta = theta;
      bank.status[i] = NodeStatus::ok;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::fit && e.kind() != ErrorKind::numerical &&
          e.kind() != ErrorKind::simulation) {
        throw;
      }
      bank.status[i] = NodeStatus::failed;
      errors[i] = e.what();
      log::warn("node " + std::to_string(i) + " theta=" + format_theta(theta) + " failed: " + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    log::debug("node " + std::to_string(i) + " fitted in " + std::to_string(secs) + " s");
  });

  std::size_t in_support = 0;
  for (auto s : bank.status) in_support += s != NodeStatus::outside_prior;
  const std::size_t failed = bank.failures();
  if (failed > 0 &&
      static_cast<double>(failed) >= settings.max_failure_fraction * static_cast<double>(in_support)) {
    std::size_t first = 0;
    while (bank.status[first] != NodeStatus::failed) ++first;
    fail(ErrorKind::fit, std::to_string(failed) + " of " + std::to_string(in_support) +
                             " grid nodes failed; first at node " + std::to_string(first) + " theta=" +
                             format_theta(bank.grid.node(first)) + ": " + errors[first]);
  }
  for (std::size_t i = 0; i < nodes; ++i) {
    if (bank.status[i] == NodeStatus::ok) {
      bank.feature_dim = bank.models[i].beta.size();
      break;
    }
  }
  return bank;
}

PosteriorGrid lfire_posterior(const TimeSeries& x_obs, const PriorSpec& prior,
                              std::span<const std::size_t> grid_shape, const Simulator& simulator,
                              const FeatureMap& features, const LfireSettings& settings,
                              std::uint64_t seed, unsigned threads) {
  const auto bank = build_ratio_bank(simulator, prior, grid_shape, features, settings, seed, threads);
  return bank.posterior(features(x_obs));
}

void save_ratio_bank(const RatioBank& bank, const std::filesystem::path& json_path) {
  const std::size_t p = bank.feature_dim;
  std::vector<double> blob(bank.grid.size() * p, 0.0);
  json nodes = json::array();
  for (std::size_t i = 0; i < bank.grid.size(); ++i) {
    json node = {{"index", i}, {"status", status_name(bank.status[i])}};
    if (bank.status[i] == NodeStatus::ok) {
      std::copy(bank.models[i].beta.begin(), bank.models[i].beta.end(), blob.begin() + static_cast<std::ptrdiff_t>(i * p));
      node["lambda"] = bank.models[i].lambda;
      node["lambda_index"] = bank.models[i].lambda_index;
    }
    nodes.push_back(node);
  }
  const auto blob_path = io::sibling(json_path, "betas.bin");
  io::write_f64_blob(blob_path, blob);
  io::write_json(json_path, {{"format", "lfi-ratio-bank"},
                             {"model", std::string(to_string(bank.model))},
                             {"prior", io::to_json(bank.prior)},
                             {"axes", bank.grid.axes},
                             {"summary", to_string(bank.summary)},
                             {"feature_dim", p},
                             {"dtype", io::kDtype},
                             {"betas_file", blob_path.filename().string()},
                             {"nodes", nodes}});
}

RatioBank load_ratio_bank(const std::filesystem::path& json_path) {
  const json doc = io::read_json(json_path);
  try {
    if (doc.at("format") != "lfi-ratio-bank") fail(ErrorKind::io, "not a ratio bank: " + json_path.string());
    RatioBank bank;
    bank.model = parse_model_id(doc.at("model").get<std::string>());
    bank.prior = io::prior_from_json(doc.at("prior"));
    bank.grid.axes = doc.at("axes").get<std::vector<std::vector<double>>>();
    bank.summary = parse_summary_kind(doc.at("summary").get<std::string>());
    bank.feature_dim = doc.at("feature_dim");
    const std::size_t n = bank.grid.size(), p = bank.feature_dim;
    const auto blob = io::read_f64_blob(json_path.parent_path() / doc.at("betas_file").get<std::string>(), n * p);
    const auto& nodes = doc.at("nodes");
    if (nodes.size() != n) fail(ErrorKind::io, "ratio bank node count does not match its grid");
    bank.status.resize(n);
    bank.models.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      bank.status[i] = parse_status(nodes[i].at("status").get<std::string>());
      if (bank.status[i] != NodeStatus::ok) continue;
      auto& m = bank.models[i];
      m.beta.assign(blob.begin() + static_cast<std::ptrdiff_t>(i * p), blob.begin() + static_cast<std::ptrdiff_t>((i + 1) * p));
      m.lambda = nodes[i].at("lambda");
      m.lambda_index = nodes[i].at("lambda_index");
      m.theta = bank.grid.node(i);
    }
    return bank;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::io, "malformed ratio bank " + json_path.string() + ": " + e.what());
  }
}

}  // namespace lfi::lfire
