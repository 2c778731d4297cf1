#include "polishkrige/predictor.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <numeric>
#include <thread>

#include "polishkrige/error.hpp"

namespace polishkrige {

std::string_view method_name(Method method) { return method == Method::mpk ? "MPK" : "IMPK"; }

Method parse_method(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "mpk") return Method::mpk;
  if (lower == "impk") return Method::impk;
  throw Error(ErrorCategory::invalid_argument, "unknown method '" + std::string(name) + "'");
}

SurfaceModel::SurfaceModel(Method method, GridTable source, MedianPolishFit polish,
                           std::optional<BiharmonicModel> spline, VariogramFit variogram, FitConfig config)
    : method_(method),
      source_(std::move(source)),
      linear_(std::move(polish), source_.lattice()),
      spline_(method == Method::impk ? std::move(spline) : std::nullopt),
      residuals_(residuals_as_scatter(linear_.fit(), source_.lattice())),
      variogram_(variogram),
      config_(std::move(config)) {
  if (method_ == Method::impk && !spline_) {
    throw Error(ErrorCategory::invalid_argument, "IMPK model requires a biharmonic mean spline");
  }
  variogram_.model.validate();
  if (variogram_.model.sill() > 0.0) {
    kriging_.emplace(residuals_, variogram_.model, config_.neighbors);
  } else {
    const auto v = residuals_.values();
    residual_mean_ = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  }
}

double SurfaceModel::mean_at(const Location2D& s) const {
  return spline_ ? biharmonic_eval(*spline_, s) : linear_mean_at(linear_, s);
}

KrigingPrediction SurfaceModel::residual_at(const Location2D& s) const {
  if (kriging_) return kriging_->predict(s);
  return {residual_mean_, 0.0};
}

namespace {

VariogramFit estimate_variogram(const ScatterSet& residuals, const FitConfig& config) {
  VariogramFitOptions options;
  options.fixed_nugget = config.fixed_nugget;
  const auto values = residuals.values();
  const bool all_equal =
      std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); });
  if (residuals.size() < 2 || all_equal) {
    // No spatial variation to estimate from.
    VariogramFit fit;
    fit.model.family = config.family;
    fit.model.nugget = config.fixed_nugget.value_or(0.0);
    fit.model.range = 1.0;
    fit.degenerate = true;
    return fit;
  }
  const auto empirical = empirical_semivariogram(residuals, config.n_bins, config.max_lag);
  return fit_variogram(empirical, config.family, options);
}

}  // namespace

SurfaceModel fit(const GridTable& grid, Method method, const FitConfig& config,
                 const std::optional<VariogramFit>& frozen_variogram) {
  MedianPolishFit polish = decompose(grid, config.polish);

  std::optional<BiharmonicModel> spline;
  if (method == Method::impk) {
    const auto& lat = grid.lattice();
    std::vector<Location2D> nodes;
    std::vector<double> means;
    for (std::size_t k = 0; k < lat.rows(); ++k) {
      for (std::size_t l = 0; l < lat.columns(); ++l) {
        nodes.push_back(lat.node(k, l));
        means.push_back(node_mean(polish, k, l));
      }
    }
    spline = biharmonic_fit(nodes, means, config.epsilon);
  }

  VariogramFit variogram = frozen_variogram ? *frozen_variogram
                                            : estimate_variogram(residuals_as_scatter(polish, grid.lattice()), config);
  return SurfaceModel(method, grid, std::move(polish), std::move(spline), variogram, config);
}

KrigingPrediction predict(const SurfaceModel& model, const Location2D& s) {
  const KrigingPrediction residual = model.residual_at(s);
  return {model.mean_at(s) + residual.value, residual.variance};
}

PredictionGrid predict_grid(const SurfaceModel& model, std::size_t rows, std::size_t columns) {
  if (rows < 2 || columns < 2) {
    throw Error(ErrorCategory::invalid_argument, "prediction grid needs at least 2x2 nodes");
  }
  const auto& src = model.source_grid().lattice();
  PredictionGrid out{GridLattice::uniform(src.x_coords().front(), src.x_coords().back(), columns,
                                          src.y_coords().front(), src.y_coords().back(), rows),
                     std::vector<double>(rows * columns), std::vector<double>(rows * columns)};
  for (std::size_t k = 0; k < rows; ++k) {
    for (std::size_t l = 0; l < columns; ++l) {
      const auto p = predict(model, out.lattice.node(k, l));
      out.values[k * columns + l] = p.value;
      out.variances[k * columns + l] = p.variance;
    }
  }
  return out;
}

double rmse(const std::vector<double>& errors) {
  if (errors.empty()) throw Error(ErrorCategory::invalid_argument, "RMSE of an empty error list");
  double sum = 0.0;
  for (double e : errors) sum += e * e;
  return std::sqrt(sum / static_cast<double>(errors.size()));
}

CvReport loocv(const GridTable& grid, Method method, const FitConfig& config, unsigned threads) {
  struct Fold {
    std::size_t row;
    std::size_t column;
    double observed;
  };
  std::vector<Fold> folds;
  for (std::size_t k = 0; k < grid.rows(); ++k) {
    for (std::size_t l = 0; l < grid.columns(); ++l) {
      if (const auto& c = grid.at(k, l)) folds.push_back({k, l, *c});
    }
  }

  std::optional<VariogramFit> frozen;
  if (config.freeze_variogram) frozen = fit(grid, method, config).variogram();

  struct Outcome {
    std::optional<CvPoint> point;
    std::string failure;
  };
  std::vector<Outcome> outcomes(folds.size());
  const auto run_fold = [&](std::size_t i) {
    const Fold& f = folds[i];
    const Location2D s = grid.lattice().node(f.row, f.column);
    try {
      const GridTable reduced = grid.without(f.row, f.column);
      const SurfaceModel model = fit(reduced, method, config, frozen);
      const KrigingPrediction p = predict(model, s);
      outcomes[i].point = CvPoint{s, f.observed, p.value, p.value - f.observed, p.variance};
    } catch (const Error& e) {
      outcomes[i].failure = std::string(category_name(e.category())) + ": " + e.what();
    }
  };

  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, folds.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < folds.size(); ++i) run_fold(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < folds.size(); i = next++) run_fold(i);
      });
    }
  }

  CvReport report;
  report.method = method;
  report.config = config;
  std::vector<double> errors;
  for (std::size_t i = 0; i < folds.size(); ++i) {
    if (outcomes[i].point) {
      report.points.push_back(*outcomes[i].point);
      errors.push_back(outcomes[i].point->error);
    } else {
      report.skipped.push_back(
          {grid.lattice().node(folds[i].row, folds[i].column), folds[i].observed, outcomes[i].failure});
    }
  }
  if (errors.empty()) {
    throw Error(ErrorCategory::invalid_grid, "cross-validation completed no folds");
  }
  report.rmse = rmse(errors);
  return report;
}

}  // namespace polishkrige
