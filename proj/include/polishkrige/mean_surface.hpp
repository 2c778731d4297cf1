#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "polishkrige/median_polish.hpp"
#include "polishkrige/spatial.hpp"

namespace polishkrige {

/// Free-space Green function of the biharmonic operator in dimension m
/// (1..6) at distance r >= 0:
///   m=1 r^3, m=2 r^2 (ln r - 1), m=3 r, m=4 ln r, m=5 1/r, m=6 1/r^2.
/// Returns 0 at r = 0 for m <= 3 (continuous limit); m >= 4 is singular
/// there and throws.
double green_function(int m, double r);

/// Superposition w(s) = sum_j strength_j * green(m, |s - center_j|).
class BiharmonicModel {
 public:
  BiharmonicModel(int dimension, std::vector<double> centers, std::vector<double> strengths,
                  double regularization = 0.0);

  int dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return strengths_.size(); }
  /// Flat, point-major: center j occupies [j*m, (j+1)*m).
  const std::vector<double>& centers() const noexcept { return centers_; }
  const std::vector<double>& strengths() const noexcept { return strengths_; }
  double regularization() const noexcept { return regularization_; }
  std::span<const double> center(std::size_t j) const {
    return std::span<const double>(centers_).subspan(j * dimension_, dimension_);
  }

 private:
  int dimension_;
  std::vector<double> centers_;
  std::vector<double> strengths_;
  double regularization_;
};

/// Solves (G + eps I) alpha = values with G_ij = green(m, |s_i - s_j|).
/// Centers are flat point-major with `dimension` coordinates each. Throws
/// duplicate_location for coincident centers and SingularSystemError when
/// the factorization is numerically singular.
BiharmonicModel biharmonic_fit(int dimension, std::span<const double> centers,
                               std::span<const double> values, double regularization = 0.0);

BiharmonicModel biharmonic_fit(std::span<const Location2D> centers, std::span<const double> values,
                               double regularization = 0.0);

double biharmonic_eval(const BiharmonicModel& model, std::span<const double> point);
double biharmonic_eval(const BiharmonicModel& model, const Location2D& s);

/// Median-polish effects on their lattice, interpolated linearly between
/// adjacent nodes along each axis and extended linearly past the edges.
class LinearMeanModel {
 public:
  LinearMeanModel(MedianPolishFit fit, GridLattice lattice);

  const MedianPolishFit& fit() const noexcept { return fit_; }
  const GridLattice& lattice() const noexcept { return lattice_; }

 private:
  MedianPolishFit fit_;
  GridLattice lattice_;
};

double linear_mean_at(const LinearMeanModel& model, const Location2D& s);

}  // namespace polishkrige
