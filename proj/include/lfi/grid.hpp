#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "lfi/model.hpp"

namespace lfi {

/// Regular rectangular lattice. Nodes are enumerated row-major: the last axis
/// varies fastest.
struct GridSpec {
  std::vector<std::vector<double>> axes;

  /// shape[i] endpoint-inclusive nodes across prior.bounds[i].
  static GridSpec spanning(const PriorSpec& prior, std::span<const std::size_t> shape);

  std::size_t dim() const noexcept { return axes.size(); }
  std::size_t size() const noexcept;
  std::vector<std::size_t> shape() const;
  std::vector<double> node(std::size_t index) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Normalized posterior masses on a grid over the prior support.
struct PosteriorGrid {
  ModelId model = ModelId::arch;
  PriorSpec prior;
  GridSpec grid;
  std::vector<double> masses;

  /// Index of the largest mass (first on ties).
  std::size_t argmax() const;
};

/// Normalizes unnormalized log-weights by log-sum-exp. Nodes outside the prior
/// support are forced to mass exactly 0 regardless of their weight. Throws a
/// numerical error when every in-support weight is -inf.
PosteriorGrid normalize_log_weights(ModelId model, const PriorSpec& prior, const GridSpec& grid,
                                    std::span<const double> log_weights);

/// JSON sidecar (axes, prior, model-id) plus a float64-le mass blob.
void save_posterior_grid(const PosteriorGrid& posterior, const std::filesystem::path& json_path);
PosteriorGrid load_posterior_grid(const std::filesystem::path& json_path);

}  // namespace lfi
