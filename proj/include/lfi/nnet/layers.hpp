#pragma once

// Layer kernels for single items. Tensors are flat row-major spans:
// activations [channel][time], conv weights [filter][channel][tap],
// dense weights [out][in]. Backward passes accumulate (+=) into parameter
// gradients and overwrite input gradients.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lfi::nn {

struct Conv1dShape {
  std::size_t in_channels = 1;
  std::size_t in_length = 1;
  std::size_t filters = 1;
  std::size_t kernel = 1;
  std::size_t stride = 1;

  /// floor((L - k) / stride) + 1; 0 when k > L.
  std::size_t out_length() const noexcept {
    return kernel > in_length ? 0 : (in_length - kernel) / stride + 1;
  }
  std::size_t patch_size() const noexcept { return in_channels * kernel; }
  std::size_t weight_count() const noexcept { return filters * in_channels * kernel; }
};

/// Throws a configuration error unless all sizes are positive and k <= L.
void check_shape(const Conv1dShape& shape);

/// Gathers input windows: patches[i][c*k + j] = in[c][i*stride + j].
void im2col(const Conv1dShape& shape, std::span<const double> in, std::span<double> patches);

/// out[f][i] = sum_{c,j} w[f][c][j] in[c][i*stride + j] + b[f], from prepared patches.
void conv1d_forward(const Conv1dShape& shape, std::span<const double> patches,
                    std::span<const double> w, std::span<const double> b, std::span<double> out);

/// `dpatches` is scratch of size out_length * patch_size. `din` may be empty.
void conv1d_backward(const Conv1dShape& shape, std::span<const double> patches,
                     std::span<const double> w, std::span<const double> dout,
                     std::span<double> dw, std::span<double> db, std::span<double> din,
                     std::span<double> dpatches);

/// Allocating convenience wrapper (validates the shape).
std::vector<double> conv1d(const Conv1dShape& shape, std::span<const double> in,
                           std::span<const double> w, std::span<const double> b);

/// Non-overlapping windows; a trailing remainder shorter than `width` is dropped.
/// argmax[c][i] holds the input index (within the channel) of the first maximum.
void maxpool_forward(std::size_t channels, std::size_t length, std::size_t width,
                     std::span<const double> in, std::span<double> out,
                     std::span<std::uint32_t> argmax);
void maxpool_backward(std::size_t channels, std::size_t length, std::size_t width,
                      std::span<const std::uint32_t> argmax, std::span<const double> dout,
                      std::span<double> din);
std::vector<double> maxpool(std::size_t channels, std::size_t length, std::size_t width,
                            std::span<const double> in);

/// out = W in + b.
void dense_forward(std::size_t in_dim, std::size_t out_dim, std::span<const double> in,
                   std::span<const double> w, std::span<const double> b, std::span<double> out);
/// `din` may be empty.
void dense_backward(std::size_t in_dim, std::size_t out_dim, std::span<const double> in,
                    std::span<const double> w, std::span<const double> dout, std::span<double> dw,
                    std::span<double> db, std::span<double> din);

void relu_inplace(std::span<double> x) noexcept;
/// d *= (pre > 0).
void relu_backward(std::span<const double> pre, std::span<double> d) noexcept;

}  // namespace lfi::nn
