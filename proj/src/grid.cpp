#include "lfi/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lfi/error.hpp"
#include "lfi/io.hpp"

namespace lfi {

GridSpec GridSpec::spanning(const PriorSpec& prior, std::span<const std::size_t> shape) {
  if (shape.size() != prior.dim()) fail(ErrorKind::configuration, "grid shape does not match prior dimension");
  GridSpec g;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (shape[i] == 0) fail(ErrorKind::configuration, "grid axis with zero nodes");
    const auto [lo, hi] = prior.bounds[i];
    std::vector<double> axis(shape[i]);
    if (shape[i] == 1) {
      axis[0] = 0.5 * (lo + hi);
    } else {
      const double step = (hi - lo) / static_cast<double>(shape[i] - 1);
      for (std::size_t k = 0; k < shape[i]; ++k) axis[k] = lo + step * static_cast<double>(k);
      axis.back() = hi;
    }
    g.axes.push_back(std::move(axis));
  }
  return g;
}

std::size_t GridSpec::size() const noexcept {
  if (axes.empty()) return 0;
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.size();
  return n;
}

std::vector<std::size_t> GridSpec::shape() const {
  std::vector<std::size_t> s;
  for (const auto& a : axes) s.push_back(a.size());
  return s;
}

std::vector<double> GridSpec::node(std::size_t index) const {
  std::vector<double> theta(axes.size());
  for (std::size_t k = axes.size(); k-- > 0;) {
    theta[k] = axes[k][index % axes[k].size()];
    index /= axes[k].size();
  }
  return theta;
}

std::size_t PosteriorGrid::argmax() const {
  return static_cast<std::size_t>(std::max_element(masses.begin(), masses.end()) - masses.begin());
}

PosteriorGrid normalize_log_weights(ModelId model, const PriorSpec& prior, const GridSpec& grid,
                                    std::span<const double> log_weights) {
  const std::size_t n = grid.size();
  if (log_weights.size() != n) fail(ErrorKind::configuration, "log-weight count does not match the grid");
  std::vector<char> inside(n);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    inside[i] = prior.contains(grid.node(i));
    if (inside[i] && log_weights[i] > peak) peak = log_weights[i];
  }
  if (!(peak > -std::numeric_limits<double>::infinity()) || std::isnan(peak)) {
    fail(ErrorKind::numerical, "degenerate posterior: every grid node has zero weight");
  }
  std::vector<double> masses(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (inside[i]) {
      masses[i] = std::exp(log_weights[i] - peak);
      total += masses[i];
    }
  }
  for (auto& m : masses) m /= total;
  return PosteriorGrid{model, prior, grid, std::move(masses)};
}

void save_posterior_grid(const PosteriorGrid& posterior, const std::filesystem::path& json_path) {
  const auto blob = io::sibling(json_path, "masses.bin");
  io::write_f64_blob(blob, posterior.masses);
  io::json j;
  j["model"] = std::string(to_string(posterior.model));
  j["prior"] = io::to_json(posterior.prior);
  j["axes"] = posterior.grid.axes;
  j["dtype"] = io::kDtype;
  j["nodes"] = posterior.masses.size();
  j["masses_file"] = blob.filename().string();
  io::write_json(json_path, j);
}

PosteriorGrid load_posterior_grid(const std::filesystem::path& json_path) {
  const auto j = io::read_json(json_path);
  try {
    PosteriorGrid p;
    p.model = parse_model_id(j.at("model").get<std::string>());
    p.prior = io::prior_from_json(j.at("prior"));
    p.grid.axes = j.at("axes").get<std::vector<std::vector<double>>>();
    const auto n = j.at("nodes").get<std::size_t>();
    if (n != p.grid.size()) fail(ErrorKind::io, json_path.string() + ": node count mismatch");
    p.masses = io::read_f64_blob(json_path.parent_path() / j.at("masses_file").get<std::string>(), n);
    return p;
  } catch (const io::json::exception& e) {
    fail(ErrorKind::io, json_path.string() + ": " + e.what());
  }
}

}  // namespace lfi
