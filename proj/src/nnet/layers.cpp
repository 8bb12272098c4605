#include "lfi/nnet/layers.hpp"

#include <algorithm>
#include <string>

#include "lfi/error.hpp"
#include "lfi/simd/kernels.hpp"

namespace lfi::nn {

void check_shape(const Conv1dShape& s) {
  if (s.in_channels == 0 || s.in_length == 0 || s.filters == 0 || s.kernel == 0 || s.stride == 0) {
    fail(ErrorKind::configuration, "conv1d: all sizes must be positive");
  }
  if (s.kernel > s.in_length) {
    fail(ErrorKind::configuration, "conv1d: kernel " + std::to_string(s.kernel) +
                                       " exceeds input length " + std::to_string(s.in_length));
  }
}

void im2col(const Conv1dShape& s, std::span<const double> in, std::span<double> patches) {
  const std::size_t lo = s.out_length(), ps = s.patch_size();
  for (std::size_t i = 0; i < lo; ++i) {
    double* row = patches.data() + i * ps;
    for (std::size_t c = 0; c < s.in_channels; ++c) {
      const double* src = in.data() + c * s.in_length + i * s.stride;
      std::copy(src, src + s.kernel, row + c * s.kernel);
    }
  }
}

void conv1d_forward(const Conv1dShape& s, std::span<const double> patches,
                    std::span<const double> w, std::span<const double> b, std::span<double> out) {
  const std::size_t lo = s.out_length(), ps = s.patch_size();
  for (std::size_t f = 0; f < s.filters; ++f) {
    const auto wf = w.subspan(f * ps, ps);
    for (std::size_t i = 0; i < lo; ++i) {
      out[f * lo + i] = simd::dot(wf, patches.subspan(i * ps, ps)) + b[f];
    }
  }
}

void conv1d_backward(const Conv1dShape& s, std::span<const double> patches,
                     std::span<const double> w, std::span<const double> dout,
                     std::span<double> dw, std::span<double> db, std::span<double> din,
                     std::span<double> dpatches) {
  const std::size_t lo = s.out_length(), ps = s.patch_size();
  for (std::size_t f = 0; f < s.filters; ++f) {
    auto dwf = dw.subspan(f * ps, ps);
    double bias_grad = 0.0;
    for (std::size_t i = 0; i < lo; ++i) {
      const double g = dout[f * lo + i];
      if (g == 0.0) continue;
      bias_grad += g;
      simd::axpy(g, patches.subspan(i * ps, ps), dwf);
    }
    db[f] += bias_grad;
  }
  if (din.empty()) return;
  std::fill(dpatches.begin(), dpatches.begin() + static_cast<std::ptrdiff_t>(lo * ps), 0.0);
  for (std::size_t i = 0; i < lo; ++i) {
    auto row = dpatches.subspan(i * ps, ps);
    for (std::size_t f = 0; f < s.filters; ++f) {
      const double g = dout[f * lo + i];
      if (g != 0.0) simd::axpy(g, w.subspan(f * ps, ps), row);
    }
  }
  std::fill(din.begin(), din.end(), 0.0);
  for (std::size_t i = 0; i < lo; ++i) {
    const double* row = dpatches.data() + i * ps;
    for (std::size_t c = 0; c < s.in_channels; ++c) {
      double* dst = din.data() + c * s.in_length + i * s.stride;
      for (std::size_t j = 0; j < s.kernel; ++j) dst[j] += row[c * s.kernel + j];
    }
  }
}

std::vector<double> conv1d(const Conv1dShape& s, std::span<const double> in,
                           std::span<const double> w, std::span<const double> b) {
  check_shape(s);
  if (in.size() != s.in_channels * s.in_length || w.size() != s.weight_count() ||
      b.size() != s.filters) {
    fail(ErrorKind::configuration, "conv1d: tensor sizes do not match the shape");
  }
  std::vector<double> patches(s.out_length() * s.patch_size());
  std::vector<double> out(s.filters * s.out_length());
  im2col(s, in, patches);
  conv1d_forward(s, patches, w, b, out);
  return out;
}

void maxpool_forward(std::size_t channels, std::size_t length, std::size_t width,
                     std::span<const double> in, std::span<double> out,
                     std::span<std::uint32_t> argmax) {
  const std::size_t lo = length / width;
  for (std::size_t c = 0; c < channels; ++c) {
    const double* src = in.data() + c * length;
    for (std::size_t i = 0; i < lo; ++i) {
      std::size_t best = i * width;
      for (std::size_t j = best + 1; j < (i + 1) * width; ++j) {
        if (src[j] > src[best]) best = j;
      }
      out[c * lo + i] = src[best];
      argmax[c * lo + i] = static_cast<std::uint32_t>(best);
    }
  }
}

void maxpool_backward(std::size_t channels, std::size_t length, std::size_t width,
                      std::span<const std::uint32_t> argmax, std::span<const double> dout,
                      std::span<double> din) {
  const std::size_t lo = length / width;
  std::fill(din.begin(), din.end(), 0.0);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t i = 0; i < lo; ++i) din[c * length + argmax[c * lo + i]] += dout[c * lo + i];
  }
}

std::vector<double> maxpool(std::size_t channels, std::size_t length, std::size_t width,
                            std::span<const double> in) {
  if (width == 0) fail(ErrorKind::configuration, "maxpool: width must be positive");
  const std::size_t lo = length / width;
  std::vector<double> out(channels * lo);
  std::vector<std::uint32_t> arg(channels * lo);
  maxpool_forward(channels, length, width, in, out, arg);
  return out;
}

void dense_forward(std::size_t in_dim, std::size_t out_dim, std::span<const double> in,
                   std::span<const double> w, std::span<const double> b, std::span<double> out) {
  for (std::size_t o = 0; o < out_dim; ++o) out[o] = simd::dot(w.subspan(o * in_dim, in_dim), in) + b[o];
}

void dense_backward(std::size_t in_dim, std::size_t out_dim, std::span<const double> in,
                    std::span<const double> w, std::span<const double> dout, std::span<double> dw,
                    std::span<double> db, std::span<double> din) {
  if (!din.empty()) std::fill(din.begin(), din.end(), 0.0);
  for (std::size_t o = 0; o < out_dim; ++o) {
    const double g = dout[o];
    if (g == 0.0) continue;
    db[o] += g;
    simd::axpy(g, in, dw.subspan(o * in_dim, in_dim));
    if (!din.empty()) simd::axpy(g, w.subspan(o * in_dim, in_dim), din);
  }
}

void relu_inplace(std::span<double> x) noexcept {
  for (double& v : x) v = v > 0.0 ? v : 0.0;
}

void relu_backward(std::span<const double> pre, std::span<double> d) noexcept {
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(pre[i] > 0.0)) d[i] = 0.0;
  }
}

}  // namespace lfi::nn
