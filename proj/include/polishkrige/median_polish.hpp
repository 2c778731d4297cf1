#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "polishkrige/spatial.hpp"

namespace polishkrige {

/// Median of the values; an even count yields the mean of the two central
/// order statistics. Throws on an empty input.
double median(std::vector<double> values);

struct MedianPolishOptions {
  /// Convergence threshold on extracted medians; <= 0 selects
  /// 1e-9 * (data range), or 1e-9 * max(1, |value|) for a constant table.
  double tol = 0.0;
  int max_sweeps = 100;
};

/// Two-way decomposition value = overall + row_effects[k] + col_effects[l] + residual(k, l).
struct MedianPolishFit {
  double overall = 0.0;
  std::vector<double> row_effects;  // one per y coordinate
  std::vector<double> col_effects;  // one per x coordinate
  std::vector<std::optional<double>> residuals;  // row-major, present where data is
  int sweeps = 0;
  bool converged = false;
  double tol = 0.0;

  std::size_t rows() const noexcept { return row_effects.size(); }
  std::size_t columns() const noexcept { return col_effects.size(); }
  const std::optional<double>& residual(std::size_t row, std::size_t column) const {
    return residuals[row * columns() + column];
  }
};

/// Tukey median polish. Each sweep removes row medians, re-centres the
/// column effects into the overall term, removes column medians, then
/// re-centres the row effects. Stops once every residual row/column median
/// and both effect medians are within tol, or after max_sweeps (converged
/// is false then, but the decomposition identity still holds).
MedianPolishFit decompose(const GridTable& grid, const MedianPolishOptions& options = {});

/// overall + row_effects[row] + col_effects[column].
double node_mean(const MedianPolishFit& fit, std::size_t row, std::size_t column);

/// One observation per present residual, placed at its lattice node, row-major.
ScatterSet residuals_as_scatter(const MedianPolishFit& fit, const GridLattice& lattice);

}  // namespace polishkrige
