#include "lfi/nnet/train.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "lfi/error.hpp"
#include "lfi/io.hpp"
#include "lfi/log.hpp"
#include "lfi/parallel.hpp"
#include "lfi/rng.hpp"

namespace lfi::nn {
namespace {

using nlohmann::json;

constexpr std::size_t kEvalBlock = 64;

Standardizer fit_standardizer(std::size_t slots, std::size_t n,
                              const std::function<std::span<const double>(std::size_t, std::size_t)>& values) {
  Standardizer s;
  s.mean.assign(slots, 0.0);
  s.scale.assign(slots, 1.0);
  for (std::size_t k = 0; k < slots; ++k) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (double v : values(i, k)) sum += v;
      count += values(i, k).size();
    }
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (double v : values(i, k)) ss += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(count));
    s.mean[k] = mean;
    s.scale[k] = sd > 0.0 && std::isfinite(sd) ? sd : 1.0;
  }
  return s;
}

void standardize_series(const TimeSeries& x, const Standardizer& s, std::span<double> out) {
  const std::size_t L = x.length();
  for (std::size_t c = 0; c < x.channels(); ++c) {
    const auto ch = x.channel(c);
    for (std::size_t t = 0; t < L; ++t) out[c * L + t] = (ch[t] - s.mean[c]) / s.scale[c];
  }
}

void standardize_target(std::span<const double> theta, const Standardizer& s, std::span<double> out) {
  for (std::size_t k = 0; k < theta.size(); ++k) out[k] = (theta[k] - s.mean[k]) / s.scale[k];
}

void check_input(const NetworkConfig& c, const TimeSeries& x) {
  if (x.channels() != c.in_channels || x.length() != c.in_length) {
    fail(ErrorKind::configuration,
         "network expects " + std::to_string(c.in_channels) + "x" + std::to_string(c.in_length) +
             " input, got " + std::to_string(x.channels()) + "x" + std::to_string(x.length()));
  }
}

/// Mean squared error over items [begin, end) of the batch, standardized scale.
double validation_mse(const SummaryNetwork& net, const SimBatch& batch, std::size_t begin,
                      std::size_t end, unsigned threads) {
  const std::size_t n = end - begin, d = net.output_dim(), in = net.network.input_size();
  const std::size_t blocks = (n + kEvalBlock - 1) / kEvalBlock;
  std::vector<double> block_sq(blocks, 0.0);
  parallel_for(blocks, threads, [&](std::size_t b) {
    Workspace ws;
    std::vector<double> x(in), y(d), out(d);
    double sq = 0.0;
    for (std::size_t i = begin + b * kEvalBlock; i < std::min(end, begin + (b + 1) * kEvalBlock); ++i) {
      standardize_series(batch.series[i], net.input, x);
      standardize_target(batch.parameters[i].values, net.target, y);
      net.network.forward(x, out, ws);
      for (std::size_t k = 0; k < d; ++k) sq += (out[k] - y[k]) * (out[k] - y[k]);
    }
    block_sq[b] = sq;
  });
  double sq = 0.0;
  for (double v : block_sq) sq += v;
  return sq / static_cast<double>(n * d);
}

json standardizer_json(const Standardizer& s) { return {{"mean", s.mean}, {"scale", s.scale}}; }

Standardizer standardizer_from(const json& j) {
  return {j.at("mean").get<std::vector<double>>(), j.at("scale").get<std::vector<double>>()};
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_inf(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

}  // namespace

void adam_update(std::span<double> w, std::span<const double> g, AdamState& st, const AdamConfig& h) {
  if (st.m.empty()) {
    st.m.assign(w.size(), 0.0);
    st.v.assign(w.size(), 0.0);
    st.t = 0;
  }
  if (g.size() != w.size() || st.m.size() != w.size() || st.v.size() != w.size()) {
    fail(ErrorKind::configuration, "adam: weight/gradient/state sizes differ");
  }
  ++st.t;
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(st.t));
  for (std::size_t i = 0; i < w.size(); ++i) {
    st.m[i] = h.beta1 * st.m[i] + (1.0 - h.beta1) * g[i];
    st.v[i] = h.beta2 * st.v[i] + (1.0 - h.beta2) * g[i] * g[i];
    const double m_hat = st.m[i] / c1;
    const double v_hat = st.v[i] / c2;
    w[i] -= h.lr * m_hat / (std::sqrt(v_hat) + h.eps);
  }
}

void TrainConfig::validate() const {
  if (batch_size == 0 || max_epochs == 0) {
    fail(ErrorKind::configuration, "train: batch size and max epochs must be positive");
  }
  if (patience > max_epochs) fail(ErrorKind::configuration, "train: patience exceeds max epochs");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    fail(ErrorKind::configuration, "train: split fraction must lie in (0, 1)");
  }
  if (!(adam.lr > 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) ||
      !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) || !(adam.eps > 0.0)) {
    fail(ErrorKind::configuration, "train: invalid Adam hyperparameters");
  }
}

SummaryNetwork::SummaryNetwork(const NetworkConfig& config) : network(config) {
  input.mean.assign(config.in_channels, 0.0);
  input.scale.assign(config.in_channels, 1.0);
  target.mean.assign(config.output_dim, 0.0);
  target.scale.assign(config.output_dim, 1.0);
}

std::vector<double> SummaryNetwork::predict(const TimeSeries& x) const {
  check_input(network.config(), x);
  std::vector<double> z(network.input_size()), out(output_dim());
  standardize_series(x, input, z);
  Workspace ws;
  network.forward(z, out, ws);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = out[k] * target.scale[k] + target.mean[k];
  return out;
}

std::vector<std::vector<double>> SummaryNetwork::predict_batch(std::span<const TimeSeries> xs,
                                                               unsigned threads) const {
  std::vector<std::vector<double>> out(xs.size());
  parallel_for(xs.size(), threads, [&](std::size_t i) { out[i] = predict(xs[i]); });
  return out;
}

std::vector<double> predict_theta(const SummaryNetwork& net, const TimeSeries& x) {
  return net.predict(x);
}

Checkpoint train_summary_network(const SimBatch& batch, const NetworkConfig& netcfg,
                                 const TrainConfig& cfg, unsigned threads, const Checkpoint* resume) {
  cfg.validate();
  netcfg.validate();
  const std::size_t m = batch.size();
  if (m < 2) fail(ErrorKind::configuration, "train: need at least 2 items");
  if (netcfg.output_dim != batch.parameters.front().dim()) {
    fail(ErrorKind::configuration, "train: output dimension does not match the batch parameters");
  }
  for (std::size_t i = 0; i < m; ++i) {
    check_input(netcfg, batch.series[i]);
    if (!batch.series[i].all_finite()) {
      fail(ErrorKind::training, "train: non-finite simulated value in item " + std::to_string(i));
    }
  }
  const auto [n_train, n_val] = split_sizes(m, cfg.train_fraction);

  Checkpoint ck{SummaryNetwork(netcfg), cfg, TrainState{}};
  TrainState& st = *ck.state;
  if (resume != nullptr) {
    if (!(resume->net.network.config() == netcfg)) {
      fail(ErrorKind::configuration, "train: resume checkpoint has a different network config");
    }
    if (!resume->state) fail(ErrorKind::configuration, "train: checkpoint holds no training state");
    ck.net = resume->net;
    st = *resume->state;
  } else {
    ck.net.input = fit_standardizer(netcfg.in_channels, n_train, [&](std::size_t i, std::size_t c) {
      return batch.series[i].channel(c);
    });
    ck.net.target = fit_standardizer(netcfg.output_dim, n_train, [&](std::size_t i, std::size_t k) {
      return std::span<const double>(batch.parameters[i].values).subspan(k, 1);
    });
    RngStream init(derive_seed(cfg.seed, 0));
    ck.net.network.initialize(init);
    st.current.assign(ck.net.network.parameters().begin(), ck.net.network.parameters().end());
    ck.net.report.best_val_loss = std::numeric_limits<double>::infinity();
  }
  TrainingReport& report = ck.net.report;
  if (report.stopped_early) return ck;

  // The working network carries the current weights; ck.net keeps the best.
  Network work(netcfg);
  std::copy(st.current.begin(), st.current.end(), work.parameters().begin());
  SummaryNetwork probe = ck.net;

  const std::size_t in = work.input_size(), d = netcfg.output_dim, p = work.parameter_count();
  std::vector<double> xs(cfg.batch_size * in), ys(cfg.batch_size * d), grad(p);
  std::vector<std::size_t> order(n_train);

  for (std::size_t epoch = st.next_epoch; epoch < cfg.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    RngStream shuffle(derive_seed(cfg.seed, epoch + 1));
    for (std::size_t i = n_train; i > 1; --i) std::swap(order[i - 1], order[shuffle.uniform_index(i)]);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n_train; start += cfg.batch_size) {
      const std::size_t n = std::min(cfg.batch_size, n_train - start);
      for (std::size_t b = 0; b < n; ++b) {
        const std::size_t item = order[start + b];
        standardize_series(batch.series[item], ck.net.input, std::span<double>(xs).subspan(b * in, in));
        standardize_target(batch.parameters[item].values, ck.net.target,
                           std::span<double>(ys).subspan(b * d, d));
      }
      const double loss = work.loss_and_gradient(std::span<const double>(xs).first(n * in),
                                                 std::span<const double>(ys).first(n * d), n, grad, threads);
      if (!std::isfinite(loss)) {
        fail(ErrorKind::training, "non-finite training loss at epoch " + std::to_string(epoch));
      }
      loss_sum += loss * static_cast<double>(n);
      adam_update(work.parameters(), grad, st.adam, cfg.adam);
    }

    std::copy(work.parameters().begin(), work.parameters().end(), probe.network.parameters().begin());
    const double val = validation_mse(probe, batch, n_train, n_train + n_val, threads);
    if (!std::isfinite(val)) {
      fail(ErrorKind::training, "non-finite validation loss at epoch " + std::to_string(epoch));
    }
    const double train_loss = loss_sum / static_cast<double>(n_train);
    report.history.push_back({epoch, train_loss, val});
    report.epochs_run = epoch + 1;
    log::info("epoch " + std::to_string(epoch) + " train " + std::to_string(train_loss) + " val " +
              std::to_string(val));

    if (val < report.best_val_loss) {
      report.best_val_loss = val;
      report.best_epoch = epoch;
      std::copy(work.parameters().begin(), work.parameters().end(), ck.net.network.parameters().begin());
      st.wait = 0;
    } else {
      ++st.wait;
    }
    st.next_epoch = epoch + 1;
    st.current.assign(work.parameters().begin(), work.parameters().end());
    if (st.wait >= std::max<std::size_t>(cfg.patience, 1)) {
      report.stopped_early = true;
      break;
    }
  }
  return ck;
}

json to_json(const NetworkConfig& c) {
  const auto conv = [](const ConvSpec& s) {
    return json{{"filters", s.filters}, {"kernel", s.kernel}, {"stride", s.stride}};
  };
  return {{"in_channels", c.in_channels}, {"in_length", c.in_length}, {"conv1", conv(c.conv1)},
          {"pool_width", c.pool_width},   {"conv2", conv(c.conv2)},   {"dense_units", c.dense_units},
          {"output_dim", c.output_dim},   {"l2_output", c.l2_output}, {"activation", "relu"}};
}

NetworkConfig network_config_from_json(const json& j) {
  NetworkConfig c;
  const auto conv = [](const json& s, ConvSpec& out) {
    out.filters = s.value("filters", out.filters);
    out.kernel = s.value("kernel", out.kernel);
    out.stride = s.value("stride", out.stride);
  };
  c.in_channels = j.value("in_channels", c.in_channels);
  c.in_length = j.value("in_length", c.in_length);
  if (j.contains("conv1")) conv(j.at("conv1"), c.conv1);
  c.pool_width = j.value("pool_width", c.pool_width);
  if (j.contains("conv2")) conv(j.at("conv2"), c.conv2);
  c.dense_units = j.value("dense_units", c.dense_units);
  c.output_dim = j.value("output_dim", c.output_dim);
  c.l2_output = j.value("l2_output", c.l2_output);
  if (j.value("activation", std::string("relu")) != "relu") {
    fail(ErrorKind::configuration, "network: only the relu activation is supported");
  }
  return c;
}

json to_json(const TrainConfig& c) {
  return {{"adam", {{"lr", c.adam.lr}, {"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"eps", c.adam.eps}}},
          {"batch_size", c.batch_size},
          {"max_epochs", c.max_epochs},
          {"patience", c.patience},
          {"train_fraction", c.train_fraction},
          {"seed", c.seed},
          {"loss", "mse"}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  if (j.contains("adam")) {
    const auto& a = j.at("adam");
    c.adam.lr = a.value("lr", c.adam.lr);
    c.adam.beta1 = a.value("beta1", c.adam.beta1);
    c.adam.beta2 = a.value("beta2", c.adam.beta2);
    c.adam.eps = a.value("eps", c.adam.eps);
  }
  c.batch_size = j.value("batch_size", c.batch_size);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.train_fraction = j.value("train_fraction", c.train_fraction);
  c.seed = j.value("seed", c.seed);
  if (j.value("loss", std::string("mse")) != "mse") {
    fail(ErrorKind::configuration, "train: only the mse loss is supported");
  }
  return c;
}

json to_json(const TrainingReport& r) {
  json hist = json::array();
  for (const auto& e : r.history) {
    hist.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss}});
  }
  return {{"epochs_run", r.epochs_run},
          {"best_epoch", r.best_epoch},
          {"best_val_loss", finite_or_null(r.best_val_loss)},
          {"stopped_early", r.stopped_early},
          {"history", hist}};
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& json_path) {
  const Network& net = ck.net.network;
  json tensors = json::array();
  for (const auto& t : net.tensors()) {
    tensors.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", t.offset}});
  }
  std::vector<double> blob(net.parameters().begin(), net.parameters().end());
  json sections = json::array({"best"});
  json state = nullptr;
  if (ck.state) {
    const TrainState& st = *ck.state;
    const auto append = [&](const std::vector<double>& v, const char* name) {
      std::vector<double> padded = v;
      padded.resize(net.parameter_count(), 0.0);
      blob.insert(blob.end(), padded.begin(), padded.end());
      sections.push_back(name);
    };
    append(st.current, "current");
    append(st.adam.m, "adam_m");
    append(st.adam.v, "adam_v");
    state = {{"next_epoch", st.next_epoch}, {"wait", st.wait}, {"adam_t", st.adam.t}};
  }
  const auto blob_path = io::sibling(json_path, "weights.bin");
  io::write_f64_blob(blob_path, blob);
  json doc = {{"format", "lfi-summary-network"},
              {"network", to_json(net.config())},
              {"train", to_json(ck.train)},
              {"report", to_json(ck.net.report)},
              {"input_standardization", standardizer_json(ck.net.input)},
              {"target_standardization", standardizer_json(ck.net.target)},
              {"tensors", tensors},
              {"parameter_count", net.parameter_count()},
              {"dtype", io::kDtype},
              {"weights_file", blob_path.filename().string()},
              {"blob_sections", sections},
              {"state", state}};
  io::write_json(json_path, doc);
}

Checkpoint load_checkpoint(const std::filesystem::path& json_path) {
  const json doc = io::read_json(json_path);
  try {
    if (doc.at("format") != "lfi-summary-network") {
      fail(ErrorKind::configuration, "not a summary-network checkpoint: " + json_path.string());
    }
    const NetworkConfig netcfg = network_config_from_json(doc.at("network"));
    Checkpoint ck{SummaryNetwork(netcfg), train_config_from_json(doc.at("train")), std::nullopt};
    const std::size_t p = ck.net.network.parameter_count();
    if (doc.at("parameter_count").get<std::size_t>() != p) {
      fail(ErrorKind::configuration, "checkpoint parameter count does not match its config");
    }
    const std::size_t sections = doc.at("blob_sections").size();
    const auto blob = io::read_f64_blob(json_path.parent_path() / doc.at("weights_file").get<std::string>(),
                                        sections * p);
    const auto section = [&](std::size_t s) {
      return std::vector<double>(blob.begin() + static_cast<std::ptrdiff_t>(s * p),
                                 blob.begin() + static_cast<std::ptrdiff_t>((s + 1) * p));
    };
    const auto best = section(0);
    std::copy(best.begin(), best.end(), ck.net.network.parameters().begin());
    ck.net.input = standardizer_from(doc.at("input_standardization"));
    ck.net.target = standardizer_from(doc.at("target_standardization"));
    const json& r = doc.at("report");
    ck.net.report.epochs_run = r.at("epochs_run");
    ck.net.report.best_epoch = r.at("best_epoch");
    ck.net.report.best_val_loss = number_or_inf(r.at("best_val_loss"));
    ck.net.report.stopped_early = r.at("stopped_early");
    for (const auto& e : r.at("history")) {
      ck.net.report.history.push_back({e.at("epoch"), e.at("train_loss"), e.at("val_loss")});
    }
    if (!doc.at("state").is_null() && sections == 4) {
      const json& s = doc.at("state");
      TrainState st;
      st.current = section(1);
      st.adam.m = section(2);
      st.adam.v = section(3);
      st.adam.t = s.at("adam_t");
      st.next_epoch = s.at("next_epoch");
      st.wait = s.at("wait");
      if (st.adam.t == 0) {
        st.adam.m.clear();
        st.adam.v.clear();
      }
      ck.state = std::move(st);
    }
    return ck;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::io, "malformed checkpoint " + json_path.string() + ": " + e.what());
  }
}

}  // namespace lfi::nn
