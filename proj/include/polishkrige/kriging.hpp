#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "polishkrige/spatial.hpp"

namespace polishkrige {

enum class VariogramFamily { spherical, exponential, gaussian };

std::string_view family_name(VariogramFamily family);
VariogramFamily parse_family(std::string_view name);

/// Isotropic semivariogram. For the exponential and gaussian families
/// `range` is the practical range (95% of the sill).
struct VariogramModel {
  VariogramFamily family = VariogramFamily::spherical;
  double nugget = 0.0;
  double partial_sill = 0.0;
  double range = 1.0;

  double sill() const noexcept { return nugget + partial_sill; }
  /// gamma(h); gamma(0) = 0 and the nugget applies for h > 0.
  double semivariance(double h) const;
  /// Throws invalid_argument unless nugget, partial_sill >= 0 and range > 0.
  void validate() const;
};

/// C(0) = sill, C(h) = sill - gamma(h) for h > 0.
double covariance(const VariogramModel& model, double h);

struct EmpiricalVariogram {
  std::vector<double> lag_centers;
  std::vector<double> gamma;
  std::vector<std::size_t> pair_counts;
  double max_lag = 0.0;
  double bin_width = 0.0;

  std::size_t size() const noexcept { return lag_centers.size(); }
};

/// Method-of-moments estimator over equal-width bins on (0, max_lag].
/// max_lag <= 0 selects half of the largest pairwise distance. Empty bins
/// are dropped.
EmpiricalVariogram empirical_semivariogram(const ScatterSet& scatter, int n_bins, double max_lag = 0.0);

struct VariogramFitOptions {
  /// Holds the nugget at this value instead of estimating it.
  std::optional<double> fixed_nugget;
};

struct VariogramFit {
  VariogramModel model;
  double weighted_sse = 0.0;
  /// Set when every gamma estimate is zero; the model is then all-zero.
  bool degenerate = false;
};

/// Pair-count weighted least squares: a coarse grid over nugget, partial
/// sill and range, then simplex refinement from the best grid points. A
/// pure-nugget model wins whenever it fits no worse. Needs at least three
/// bins unless the curve is identically zero.
VariogramFit fit_variogram(const EmpiricalVariogram& empirical, VariogramFamily family,
                           const VariogramFitOptions& options = {});

struct KrigingWeights {
  std::vector<double> weights;
  double lagrange = 0.0;
};

struct KrigingPrediction {
  double value = 0.0;
  double variance = 0.0;
};

/// Ordinary kriging over a fixed data set and covariance model. With a
/// global neighbourhood (neighbors == 0) the (n+1)x(n+1) system
///   [K 1; 1' 0] [lambda; mu] = [k; 1]
/// is factorized once at construction; otherwise each target solves its
/// own system over its `neighbors` nearest data. Immutable once built and
/// safe to query from several threads.
class OrdinaryKriging {
 public:
  OrdinaryKriging(ScatterSet data, VariogramModel model, std::size_t neighbors = 0);
  ~OrdinaryKriging();
  OrdinaryKriging(OrdinaryKriging&&) noexcept;
  OrdinaryKriging& operator=(OrdinaryKriging&&) noexcept;

  /// Weights over all data in data order; entries outside the
  /// neighbourhood are zero.
  KrigingWeights weights(const Location2D& target) const;
  /// value = sum lambda_i z_i, variance = C(0) - sum lambda_i k_i - mu.
  KrigingPrediction predict(const Location2D& target) const;

  const ScatterSet& data() const noexcept { return data_; }
  const VariogramModel& model() const noexcept { return model_; }
  std::size_t neighbors() const noexcept { return neighbors_; }

 private:
  struct Factorization;

  ScatterSet data_;
  VariogramModel model_;
  std::size_t neighbors_;
  std::unique_ptr<const Factorization> global_;
};

KrigingWeights ok_solve(const ScatterSet& scatter, const VariogramModel& model, const Location2D& target);
KrigingPrediction ok_predict(const ScatterSet& scatter, const VariogramModel& model,
                             const Location2D& target);

}  // namespace polishkrige
