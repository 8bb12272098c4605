#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lfi/nnet/layers.hpp"

namespace lfi {
class RngStream;
}

namespace lfi::nn {

struct ConvSpec {
  std::size_t filters = 8;
  std::size_t kernel = 9;
  std::size_t stride = 1;
  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

/// conv1 -> ReLU -> maxpool -> conv2 -> ReLU -> flatten -> dense -> ReLU -> linear.
struct NetworkConfig {
  std::size_t in_channels = 1;
  std::size_t in_length = 100;
  ConvSpec conv1{8, 9, 1};
  std::size_t pool_width = 4;
  ConvSpec conv2{8, 7, 2};
  std::size_t dense_units = 100;
  std::size_t output_dim = 2;
  double l2_output = 0.001;  // penalty on output-layer weights (bias excluded)

  Conv1dShape conv1_shape() const noexcept;
  std::size_t pooled_length() const noexcept;
  Conv1dShape conv2_shape() const noexcept;
  std::size_t flat_size() const noexcept;

  /// Throws a configuration error for non-positive sizes or an empty feature map.
  void validate() const;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// Default architecture for a model's (channels, length, parameter dim).
NetworkConfig default_network_config(std::size_t channels, std::size_t length, std::size_t output_dim);

struct TensorInfo {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// Per-item activations kept for the backward pass.
struct Workspace {
  std::vector<double> patches1, a1, h1, pooled, patches2, a2, flat, a3, h3, out;
  std::vector<std::uint32_t> argmax;
  std::vector<double> d_a3, d_flat, d_pooled, d_a1, d_patches, d_out;
};

/// Parameters live in one flat arena; tensors are views into it in the order
/// conv1.w, conv1.b, conv2.w, conv2.b, dense.w, dense.b, out.w, out.b.
class Network {
 public:
  explicit Network(NetworkConfig config);

  const NetworkConfig& config() const noexcept { return config_; }
  const std::vector<TensorInfo>& tensors() const noexcept { return tensors_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }
  /// Everything except the output layer.
  std::size_t hidden_parameter_count() const noexcept;

  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }
  std::span<double> tensor(std::size_t index) noexcept;
  std::span<const double> tensor(std::size_t index) const noexcept;

  /// He-uniform hidden layers, LeCun-uniform output layer, zero biases.
  void initialize(RngStream& rng);

  std::size_t input_size() const noexcept { return config_.in_channels * config_.in_length; }

  /// One prepared (standardized) item of input_size() values -> output_dim values.
  void forward(std::span<const double> x, std::span<double> out, Workspace& ws) const;

  /// n items stored back to back; identical to n calls of forward().
  std::vector<double> forward_batch(std::span<const double> xs, std::size_t n) const;

  /// Objective: mean over items and outputs of squared error, plus
  /// l2_output * ||out.w||^2. `grad` (parameter_count()) is overwritten.
  /// Items are processed in fixed chunks whose gradients are combined by
  /// pairwise reduction, so the result does not depend on `threads`.
  double loss_and_gradient(std::span<const double> xs, std::span<const double> ys, std::size_t n,
                           std::span<double> grad, unsigned threads = 1) const;

  /// Same objective without the gradient.
  double loss(std::span<const double> xs, std::span<const double> ys, std::size_t n) const;

  /// Mean squared error alone (no penalty).
  double mse(std::span<const double> xs, std::span<const double> ys, std::size_t n) const;

  double output_penalty() const noexcept;

 private:
  /// Uses the activations left in `ws` by the preceding forward().
  void backward_item(std::span<const double> d_out, Workspace& ws, std::span<double> grad) const;

  NetworkConfig config_;
  std::vector<double> params_;
  std::vector<TensorInfo> tensors_;
};

}  // namespace lfi::nn
