#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lfi/grid.hpp"
#include "lfi/lfire/features.hpp"
#include "lfi/lfire/ratio.hpp"
#include "lfi/model.hpp"
#include "lfi/simulators.hpp"

namespace lfi::lfire {

struct LfireSettings {
  std::size_t n_theta = 1000;
  std::size_t n_marginal = 1000;
  FitOptions fit;
  /// Draw a separate marginal pool for every node instead of sharing one.
  bool fresh_marginal = false;
  /// Failed nodes get mass 0 while they stay below this fraction of the
  /// in-support nodes; otherwise the build aborts.
  double max_failure_fraction = 0.01;
};

enum class NodeStatus { ok, outside_prior, failed };

/// One fitted ratio model per grid node. The fits do not depend on the
/// observed data, so one bank serves any number of observed datasets.
struct RatioBank {
  ModelId model = ModelId::arch;
  PriorSpec prior;
  GridSpec grid;
  SummaryKind summary = SummaryKind::manual;
  std::size_t feature_dim = 0;
  std::vector<NodeStatus> status;
  std::vector<RatioModel> models;  // meaningful where status == ok

  std::size_t failures() const noexcept;

  /// Masses proportional to exp(h_i(psi_obs)) on ok nodes (uniform prior),
  /// 0 elsewhere.
  PosteriorGrid posterior(std::span<const double> psi_obs) const;
};

/// The shared marginal pool uses master seed derive_seed(seed, 0); node i
/// simulates its theta class from derive_seed(seed, i + 1).
RatioBank build_ratio_bank(const Simulator& simulator, const PriorSpec& prior,
                           std::span<const std::size_t> grid_shape, const FeatureMap& features,
                           const LfireSettings& settings, std::uint64_t seed, unsigned threads = 1);

PosteriorGrid lfire_posterior(const TimeSeries& x_obs, const PriorSpec& prior,
                              std::span<const std::size_t> grid_shape, const Simulator& simulator,
                              const FeatureMap& features, const LfireSettings& settings,
                              std::uint64_t seed, unsigned threads = 1);

/// JSON (grid, prior, per-node status and lambda) plus a float64-le blob of
/// original-scale coefficients, one row of feature_dim values per node.
void save_ratio_bank(const RatioBank& bank, const std::filesystem::path& json_path);
RatioBank load_ratio_bank(const std::filesystem::path& json_path);

}  // namespace lfi::lfire
