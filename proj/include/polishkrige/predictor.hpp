#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "polishkrige/kriging.hpp"
#include "polishkrige/mean_surface.hpp"
#include "polishkrige/median_polish.hpp"
#include "polishkrige/spatial.hpp"

namespace polishkrige {

/// MPK interpolates the median-polish effects linearly; IMPK runs a 2-D
/// biharmonic spline through the node means.
enum class Method { mpk, impk };

std::string_view method_name(Method method);  // "MPK" / "IMPK"
Method parse_method(std::string_view name);    // case-insensitive

struct FitConfig {
  MedianPolishOptions polish;
  VariogramFamily family = VariogramFamily::spherical;
  int n_bins = 15;
  double max_lag = 0.0;  // <= 0: half the largest residual pair distance
  double epsilon = 0.0;  // ridge term for the biharmonic solve
  std::optional<double> fixed_nugget;
  std::size_t neighbors = 0;  // 0: every prediction uses all residuals
  bool freeze_variogram = false;  // loocv only: reuse the full-data variogram
};

/// A fitted surface: mean component plus ordinary kriging of the
/// median-polish residuals. Immutable; predict is safe from many threads.
class SurfaceModel {
 public:
  /// Assembles a model from already-fitted parts. `spline` is required for
  /// IMPK and ignored for MPK.
  SurfaceModel(Method method, GridTable source, MedianPolishFit polish,
               std::optional<BiharmonicModel> spline, VariogramFit variogram, FitConfig config);

  Method method() const noexcept { return method_; }
  const GridTable& source_grid() const noexcept { return source_; }
  const MedianPolishFit& polish() const noexcept { return linear_.fit(); }
  const LinearMeanModel& linear_mean() const noexcept { return linear_; }
  const std::optional<BiharmonicModel>& spline() const noexcept { return spline_; }
  const ScatterSet& residual_scatter() const noexcept { return residuals_; }
  const VariogramFit& variogram() const noexcept { return variogram_; }
  const FitConfig& config() const noexcept { return config_; }

  /// Mean component alone (linear scheme or spline).
  double mean_at(const Location2D& s) const;
  /// Residual kriging alone. A zero-sill variogram (all residual
  /// increments zero) yields the residual mean with zero variance.
  KrigingPrediction residual_at(const Location2D& s) const;

 private:
  Method method_;
  GridTable source_;
  LinearMeanModel linear_;
  std::optional<BiharmonicModel> spline_;
  ScatterSet residuals_;
  VariogramFit variogram_;
  FitConfig config_;
  std::optional<OrdinaryKriging> kriging_;
  double residual_mean_ = 0.0;
};

/// Full pipeline: median polish, mean component, residual variogram.
/// `frozen_variogram` skips the variogram estimation step.
SurfaceModel fit(const GridTable& grid, Method method, const FitConfig& config = {},
                 const std::optional<VariogramFit>& frozen_variogram = std::nullopt);

/// value = mean component + kriged residual; variance is the residual
/// kriging variance only.
KrigingPrediction predict(const SurfaceModel& model, const Location2D& s);

struct PredictionGrid {
  GridLattice lattice;
  std::vector<double> values;     // row-major, rows follow y
  std::vector<double> variances;  // same layout
};

/// Uniform rows x columns lattice spanning the source bounding box.
PredictionGrid predict_grid(const SurfaceModel& model, std::size_t rows, std::size_t columns);

struct CvPoint {
  Location2D location;
  double observed = 0.0;
  double predicted = 0.0;
  double error = 0.0;  // predicted - observed
  double variance = 0.0;
};

struct SkippedFold {
  Location2D location;
  double observed = 0.0;
  std::string reason;
};

struct CvReport {
  Method method = Method::impk;
  FitConfig config;
  std::vector<CvPoint> points;
  std::vector<SkippedFold> skipped;
  double rmse = 0.0;
};

/// sqrt(mean(e^2)); throws on an empty list.
double rmse(const std::vector<double>& errors);

/// Leave-one-out: each present cell is removed, the whole pipeline refitted
/// on the rest and the cell predicted. Folds that cannot be fitted are
/// listed in `skipped`. Folds run concurrently on up to `threads` workers
/// (0 = hardware concurrency); results are always in row-major cell order.
CvReport loocv(const GridTable& grid, Method method, const FitConfig& config = {}, unsigned threads = 0);

}  // namespace polishkrige
