#include "polishkrige/median_polish.hpp"

#include <algorithm>
#include <cmath>

#include "polishkrige/error.hpp"

namespace polishkrige {

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCategory::invalid_argument, "median of an empty set");
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

namespace {

double row_median(const std::vector<std::optional<double>>& r, std::size_t k, std::size_t q) {
  std::vector<double> v;
  for (std::size_t l = 0; l < q; ++l) {
    if (const auto& c = r[k * q + l]) v.push_back(*c);
  }
  return median(std::move(v));
}

double col_median(const std::vector<std::optional<double>>& r, std::size_t l, std::size_t p,
                  std::size_t q) {
  std::vector<double> v;
  for (std::size_t k = 0; k < p; ++k) {
    if (const auto& c = r[k * q + l]) v.push_back(*c);
  }
  return median(std::move(v));
}

double default_tolerance(const GridTable& grid) {
  double lo = INFINITY;
  double hi = -INFINITY;
  for (const auto& c : grid.cells()) {
    if (!c) continue;
    lo = std::min(lo, *c);
    hi = std::max(hi, *c);
  }
  const double range = hi - lo;
  if (range > 0.0) return 1e-9 * range;
  return 1e-9 * std::max(1.0, std::abs(hi));
}

// Largest |median| the next sweep would extract.
double stationarity_gap(const MedianPolishFit& fit) {
  const std::size_t p = fit.rows();
  const std::size_t q = fit.columns();
  double gap = std::max(std::abs(median(fit.row_effects)), std::abs(median(fit.col_effects)));
  for (std::size_t k = 0; k < p; ++k) gap = std::max(gap, std::abs(row_median(fit.residuals, k, q)));
  for (std::size_t l = 0; l < q; ++l) {
    gap = std::max(gap, std::abs(col_median(fit.residuals, l, p, q)));
  }
  return gap;
}

}  // namespace

MedianPolishFit decompose(const GridTable& grid, const MedianPolishOptions& options) {
  if (options.max_sweeps < 1) {
    throw Error(ErrorCategory::invalid_argument, "max_sweeps must be at least 1");
  }
  if (std::isnan(options.tol)) throw Error(ErrorCategory::invalid_argument, "tol is NaN");

  const std::size_t p = grid.rows();
  const std::size_t q = grid.columns();
  MedianPolishFit fit;
  fit.row_effects.assign(p, 0.0);
  fit.col_effects.assign(q, 0.0);
  fit.residuals = grid.cells();
  fit.tol = options.tol > 0.0 ? options.tol : default_tolerance(grid);

  auto& r = fit.residuals;
  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    for (std::size_t k = 0; k < p; ++k) {
      const double m = row_median(r, k, q);
      for (std::size_t l = 0; l < q; ++l) {
        if (auto& c = r[k * q + l]) *c -= m;
      }
      fit.row_effects[k] += m;
    }
    {
      const double m = median(fit.col_effects);
      for (auto& c : fit.col_effects) c -= m;
      fit.overall += m;
    }
    for (std::size_t l = 0; l < q; ++l) {
      const double m = col_median(r, l, p, q);
      for (std::size_t k = 0; k < p; ++k) {
        if (auto& c = r[k * q + l]) *c -= m;
      }
      fit.col_effects[l] += m;
    }
    {
      const double m = median(fit.row_effects);
      for (auto& e : fit.row_effects) e -= m;
      fit.overall += m;
    }
    fit.sweeps = sweep;
    if (stationarity_gap(fit) <= fit.tol) {
      fit.converged = true;
      break;
    }
  }

  // Re-derive residuals from the effects so the additive identity holds to
  // a single rounding per cell, independent of how many sweeps accumulated.
  for (std::size_t k = 0; k < p; ++k) {
    for (std::size_t l = 0; l < q; ++l) {
      if (const auto& v = grid.at(k, l)) {
        r[k * q + l] = *v - (fit.overall + fit.row_effects[k] + fit.col_effects[l]);
      }
    }
  }
  return fit;
}

double node_mean(const MedianPolishFit& fit, std::size_t row, std::size_t column) {
  if (row >= fit.rows() || column >= fit.columns()) {
    throw Error(ErrorCategory::out_of_range, "node index outside the fitted table");
  }
  return fit.overall + fit.row_effects[row] + fit.col_effects[column];
}

ScatterSet residuals_as_scatter(const MedianPolishFit& fit, const GridLattice& lattice) {
  if (fit.rows() != lattice.rows() || fit.columns() != lattice.columns() ||
      fit.residuals.size() != fit.rows() * fit.columns()) {
    throw Error(ErrorCategory::invalid_argument, "median polish fit does not match the lattice");
  }
  std::vector<Observation> obs;
  for (std::size_t k = 0; k < fit.rows(); ++k) {
    for (std::size_t l = 0; l < fit.columns(); ++l) {
      if (const auto& c = fit.residual(k, l)) obs.push_back({lattice.node(k, l), *c});
    }
  }
  return ScatterSet(std::move(obs));
}

}  // namespace polishkrige
