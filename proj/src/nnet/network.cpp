#include "lfi/nnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lfi/error.hpp"
#include "lfi/parallel.hpp"
#include "lfi/rng.hpp"
#include "lfi/simd/kernels.hpp"

namespace lfi::nn {
namespace {

constexpr std::size_t kChunk = 16;

enum Tensor : std::size_t { kConv1W, kConv1B, kConv2W, kConv2B, kDenseW, kDenseB, kOutW, kOutB };

void prepare(const NetworkConfig& c, Workspace& ws) {
  const auto s1 = c.conv1_shape();
  const auto s2 = c.conv2_shape();
  const std::size_t pooled = s1.filters * c.pooled_length();
  ws.patches1.resize(s1.out_length() * s1.patch_size());
  ws.a1.resize(s1.filters * s1.out_length());
  ws.h1.resize(ws.a1.size());
  ws.pooled.resize(pooled);
  ws.argmax.resize(pooled);
  ws.patches2.resize(s2.out_length() * s2.patch_size());
  ws.a2.resize(c.flat_size());
  ws.flat.resize(c.flat_size());
  ws.a3.resize(c.dense_units);
  ws.h3.resize(c.dense_units);
  ws.out.resize(c.output_dim);
  ws.d_a3.resize(c.dense_units);
  ws.d_flat.resize(c.flat_size());
  ws.d_pooled.resize(pooled);
  ws.d_a1.resize(ws.a1.size());
  ws.d_patches.resize(ws.patches2.size());
  ws.d_out.resize(c.output_dim);
}

}  // namespace

Conv1dShape NetworkConfig::conv1_shape() const noexcept {
  return {in_channels, in_length, conv1.filters, conv1.kernel, conv1.stride};
}

std::size_t NetworkConfig::pooled_length() const noexcept {
  return pool_width == 0 ? 0 : conv1_shape().out_length() / pool_width;
}

Conv1dShape NetworkConfig::conv2_shape() const noexcept {
  return {conv1.filters, pooled_length(), conv2.filters, conv2.kernel, conv2.stride};
}

std::size_t NetworkConfig::flat_size() const noexcept {
  return conv2.filters * conv2_shape().out_length();
}

void NetworkConfig::validate() const {
  if (pool_width == 0 || dense_units == 0 || output_dim == 0) {
    fail(ErrorKind::configuration, "network: all sizes must be positive");
  }
  check_shape(conv1_shape());
  if (pooled_length() == 0) fail(ErrorKind::configuration, "network: pooling leaves no features");
  check_shape(conv2_shape());
  if (!(l2_output >= 0.0) || !std::isfinite(l2_output)) {
    fail(ErrorKind::configuration, "network: output penalty must be finite and >= 0");
  }
}

NetworkConfig default_network_config(std::size_t channels, std::size_t length, std::size_t output_dim) {
  NetworkConfig c;
  c.in_channels = channels;
  c.in_length = length;
  c.output_dim = output_dim;
  return c;
}

Network::Network(NetworkConfig config) : config_(std::move(config)) {
  config_.validate();
  const auto s1 = config_.conv1_shape();
  const auto s2 = config_.conv2_shape();
  const std::size_t flat = config_.flat_size(), units = config_.dense_units, d = config_.output_dim;
  const std::vector<std::pair<std::string, std::vector<std::size_t>>> layout = {
      {"conv1.weight", {s1.filters, s1.in_channels, s1.kernel}},
      {"conv1.bias", {s1.filters}},
      {"conv2.weight", {s2.filters, s2.in_channels, s2.kernel}},
      {"conv2.bias", {s2.filters}},
      {"dense.weight", {units, flat}},
      {"dense.bias", {units}},
      {"output.weight", {d, units}},
      {"output.bias", {d}},
  };
  std::size_t offset = 0;
  for (const auto& [name, shape] : layout) {
    std::size_t size = 1;
    for (auto s : shape) size *= s;
    tensors_.push_back({name, shape, offset, size});
    offset += size;
  }
  params_.assign(offset, 0.0);
}

std::size_t Network::hidden_parameter_count() const noexcept { return tensors_[kOutW].offset; }

std::span<double> Network::tensor(std::size_t i) noexcept {
  return {params_.data() + tensors_[i].offset, tensors_[i].size};
}

std::span<const double> Network::tensor(std::size_t i) const noexcept {
  return {params_.data() + tensors_[i].offset, tensors_[i].size};
}

void Network::initialize(RngStream& rng) {
  std::fill(params_.begin(), params_.end(), 0.0);
  const auto fill_uniform = [&](std::size_t index, double limit) {
    for (double& w : tensor(index)) w = rng.uniform(-limit, limit);
  };
  const auto s1 = config_.conv1_shape();
  const auto s2 = config_.conv2_shape();
  fill_uniform(kConv1W, std::sqrt(6.0 / static_cast<double>(s1.patch_size())));
  fill_uniform(kConv2W, std::sqrt(6.0 / static_cast<double>(s2.patch_size())));
  fill_uniform(kDenseW, std::sqrt(6.0 / static_cast<double>(config_.flat_size())));
  fill_uniform(kOutW, std::sqrt(3.0 / static_cast<double>(config_.dense_units)));
}

void Network::forward(std::span<const double> x, std::span<double> out, Workspace& ws) const {
  if (x.size() != input_size()) {
    fail(ErrorKind::configuration, "network: input has " + std::to_string(x.size()) +
                                       " values, expected " + std::to_string(input_size()));
  }
  prepare(config_, ws);
  const auto s1 = config_.conv1_shape();
  const auto s2 = config_.conv2_shape();
  im2col(s1, x, ws.patches1);
  conv1d_forward(s1, ws.patches1, tensor(kConv1W), tensor(kConv1B), ws.a1);
  std::copy(ws.a1.begin(), ws.a1.end(), ws.h1.begin());
  relu_inplace(ws.h1);
  maxpool_forward(s1.filters, s1.out_length(), config_.pool_width, ws.h1, ws.pooled, ws.argmax);
  im2col(s2, ws.pooled, ws.patches2);
  conv1d_forward(s2, ws.patches2, tensor(kConv2W), tensor(kConv2B), ws.a2);
  std::copy(ws.a2.begin(), ws.a2.end(), ws.flat.begin());
  relu_inplace(ws.flat);
  dense_forward(config_.flat_size(), config_.dense_units, ws.flat, tensor(kDenseW), tensor(kDenseB), ws.a3);
  std::copy(ws.a3.begin(), ws.a3.end(), ws.h3.begin());
  relu_inplace(ws.h3);
  dense_forward(config_.dense_units, config_.output_dim, ws.h3, tensor(kOutW), tensor(kOutB), ws.out);
  std::copy(ws.out.begin(), ws.out.end(), out.begin());
}

void Network::backward_item(std::span<const double> d_out, Workspace& ws, std::span<double> grad) const {
  const auto s1 = config_.conv1_shape();
  const auto s2 = config_.conv2_shape();
  const auto gview = [&](std::size_t i) {
    return grad.subspan(tensors_[i].offset, tensors_[i].size);
  };
  dense_backward(config_.dense_units, config_.output_dim, ws.h3, tensor(kOutW), d_out, gview(kOutW),
                 gview(kOutB), ws.d_a3);
  relu_backward(ws.a3, ws.d_a3);
  dense_backward(config_.flat_size(), config_.dense_units, ws.flat, tensor(kDenseW), ws.d_a3,
                 gview(kDenseW), gview(kDenseB), ws.d_flat);
  relu_backward(ws.a2, ws.d_flat);
  conv1d_backward(s2, ws.patches2, tensor(kConv2W), ws.d_flat, gview(kConv2W), gview(kConv2B),
                  ws.d_pooled, ws.d_patches);
  maxpool_backward(s1.filters, s1.out_length(), config_.pool_width, ws.argmax, ws.d_pooled, ws.d_a1);
  relu_backward(ws.a1, ws.d_a1);
  conv1d_backward(s1, ws.patches1, tensor(kConv1W), ws.d_a1, gview(kConv1W), gview(kConv1B), {}, {});
}

std::vector<double> Network::forward_batch(std::span<const double> xs, std::size_t n) const {
  const std::size_t in = input_size(), d = config_.output_dim;
  if (xs.size() != n * in) fail(ErrorKind::configuration, "network: batch size does not match input");
  std::vector<double> out(n * d);
  Workspace ws;
  for (std::size_t i = 0; i < n; ++i) {
    forward(xs.subspan(i * in, in), std::span<double>(out).subspan(i * d, d), ws);
  }
  return out;
}

double Network::output_penalty() const noexcept {
  const auto w = tensor(kOutW);
  return config_.l2_output * simd::dot(w, w);
}

double Network::loss_and_gradient(std::span<const double> xs, std::span<const double> ys,
                                  std::size_t n, std::span<double> grad, unsigned threads) const {
  const std::size_t in = input_size(), d = config_.output_dim, p = params_.size();
  if (n == 0) fail(ErrorKind::configuration, "network: empty batch");
  if (xs.size() != n * in || ys.size() != n * d || grad.size() != p) {
    fail(ErrorKind::configuration, "network: batch/gradient sizes do not match");
  }
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> partial(chunks);
  std::vector<double> chunk_sq(chunks, 0.0);
  const double scale = 2.0 / static_cast<double>(n * d);
  parallel_for(chunks, threads, [&](std::size_t c) {
    Workspace ws;
    std::vector<double>& g = partial[c];
    g.assign(p, 0.0);
    std::vector<double> out(d), d_out(d);
    double sq = 0.0;
    for (std::size_t i = c * kChunk; i < std::min(n, (c + 1) * kChunk); ++i) {
      const auto x = xs.subspan(i * in, in);
      forward(x, out, ws);
      for (std::size_t k = 0; k < d; ++k) {
        const double r = out[k] - ys[i * d + k];
        sq += r * r;
        d_out[k] = scale * r;
      }
      backward_item(d_out, ws, g);
    }
    chunk_sq[c] = sq;
  });
  // Pairwise reduction in a fixed tree order.
  for (std::size_t step = 1; step < chunks; step *= 2) {
    for (std::size_t c = 0; c + step < chunks; c += 2 * step) {
      simd::axpy(1.0, partial[c + step], partial[c]);
      chunk_sq[c] += chunk_sq[c + step];
    }
  }
  std::copy(partial[0].begin(), partial[0].end(), grad.begin());
  const auto w_out = tensor(kOutW);
  simd::axpy(2.0 * config_.l2_output, w_out, grad.subspan(tensors_[kOutW].offset, tensors_[kOutW].size));
  return chunk_sq[0] / static_cast<double>(n * d) + output_penalty();
}

double Network::mse(std::span<const double> xs, std::span<const double> ys, std::size_t n) const {
  const std::size_t d = config_.output_dim;
  if (ys.size() != n * d) fail(ErrorKind::configuration, "network: target size does not match");
  const auto out = forward_batch(xs, n);
  double sq = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double r = out[i] - ys[i];
    sq += r * r;
  }
  return sq / static_cast<double>(n * d);
}

double Network::loss(std::span<const double> xs, std::span<const double> ys, std::size_t n) const {
  return mse(xs, ys, n) + output_penalty();
}

}  // namespace lfi::nn
