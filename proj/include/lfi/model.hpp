#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lfi {

class RngStream;

enum class ModelId { arch, ma2, lotka_volterra, ricker, lorenz96 };

std::string_view to_string(ModelId id) noexcept;
/// Accepts "arch", "ma2", "lotka-volterra", "ricker", "lorenz96".
ModelId parse_model_id(std::string_view name);

/// Number of model parameters for the model.
std::size_t parameter_dim(ModelId id) noexcept;

/// A parameter value tagged with the model it belongs to.
struct ParameterPoint {
  ModelId model;
  std::vector<double> values;

  /// Throws a configuration error when the dimension does not match the model.
  static ParameterPoint make(ModelId model, std::vector<double> values);

  std::size_t dim() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// Fixed-length real-valued record, stored row-major as [channel][time].
class TimeSeries {
 public:
  TimeSeries() = default;
  TimeSeries(std::size_t channels, std::size_t length);
  TimeSeries(std::size_t channels, std::size_t length, std::vector<double> samples);

  std::size_t channels() const noexcept { return channels_; }
  std::size_t length() const noexcept { return length_; }

  double& at(std::size_t c, std::size_t t) { return samples_[c * length_ + t]; }
  double at(std::size_t c, std::size_t t) const { return samples_[c * length_ + t]; }

  std::span<const double> channel(std::size_t c) const {
    return {samples_.data() + c * length_, length_};
  }
  std::span<double> channel(std::size_t c) { return {samples_.data() + c * length_, length_}; }

  std::span<const double> samples() const noexcept { return samples_; }
  std::span<double> samples() noexcept { return samples_; }

  bool all_finite() const noexcept;

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

 private:
  std::size_t channels_ = 0;
  std::size_t length_ = 0;
  std::vector<double> samples_;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Strict linear inequality  sum_i coeffs[i] * theta[i] < rhs.
struct LinearConstraint {
  std::vector<double> coeffs;
  double rhs = 0.0;
  friend bool operator==(const LinearConstraint&, const LinearConstraint&) = default;
};

/// Uniform prior over a box, optionally cut by linear constraints.
struct PriorSpec {
  enum class Kind { uniform_box, uniform_triangle };

  Kind kind = Kind::uniform_box;
  std::vector<Interval> bounds;
  std::vector<LinearConstraint> constraints;

  std::size_t dim() const noexcept { return bounds.size(); }

  /// Closed bounds, strict constraints.
  bool contains(std::span<const double> theta) const noexcept;

  /// Throws a configuration error for inverted/non-finite bounds or an
  /// empty constrained support.
  void validate() const;

  /// Log density relative to the box volume; -inf outside the support.
  /// Uniform priors are constant on the support, so the value only matters
  /// for membership.
  double log_density(std::span<const double> theta) const noexcept;

  friend bool operator==(const PriorSpec&, const PriorSpec&) = default;
};

/// Priors used in the experiments, per model.
PriorSpec default_prior(ModelId id);

std::vector<ParameterPoint> sample_prior(ModelId model, const PriorSpec& prior, std::size_t n,
                                         RngStream& rng);

}  // namespace lfi
