#include "polishkrige/mean_surface.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "dense_solve.hpp"
#include "polishkrige/error.hpp"

namespace polishkrige {

double green_function(int m, double r) {
  if (m < 1 || m > 6) {
    throw Error(ErrorCategory::invalid_argument,
                "Green function dimension must be in 1..6, got " + std::to_string(m));
  }
  if (!(r >= 0.0)) throw Error(ErrorCategory::invalid_argument, "Green function distance must be >= 0");
  if (r == 0.0) {
    if (m <= 3) return 0.0;
    throw Error(ErrorCategory::singular_system,
                "Green function for m=" + std::to_string(m) + " is unbounded at r=0");
  }
  switch (m) {
    case 1: return r * r * r;
    case 2: return r * r * (std::log(r) - 1.0);
    case 3: return r;
    case 4: return std::log(r);
    case 5: return 1.0 / r;
    default: return 1.0 / (r * r);
  }
}

namespace {

double point_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

std::vector<double> flatten(std::span<const Location2D> points) {
  std::vector<double> flat;
  flat.reserve(points.size() * 2);
  for (const auto& p : points) {
    flat.push_back(p.x);
    flat.push_back(p.y);
  }
  return flat;
}

}  // namespace

BiharmonicModel::BiharmonicModel(int dimension, std::vector<double> centers,
                                 std::vector<double> strengths, double regularization)
    : dimension_(dimension),
      centers_(std::move(centers)),
      strengths_(std::move(strengths)),
      regularization_(regularization) {
  if (dimension_ < 1 || dimension_ > 6) {
    throw Error(ErrorCategory::invalid_argument, "biharmonic dimension must be in 1..6");
  }
  if (strengths_.empty() || centers_.size() != strengths_.size() * static_cast<std::size_t>(dimension_)) {
    throw Error(ErrorCategory::invalid_argument, "biharmonic model needs one strength per center");
  }
  for (double v : centers_) {
    if (!std::isfinite(v)) throw Error(ErrorCategory::invalid_argument, "non-finite center");
  }
  for (double v : strengths_) {
    if (!std::isfinite(v)) throw Error(ErrorCategory::invalid_argument, "non-finite strength");
  }
  if (!(regularization_ >= 0.0)) {
    throw Error(ErrorCategory::invalid_argument, "regularization must be >= 0");
  }
}

BiharmonicModel biharmonic_fit(int dimension, std::span<const double> centers,
                               std::span<const double> values, double regularization) {
  if (dimension < 1 || dimension > 6) {
    throw Error(ErrorCategory::invalid_argument, "biharmonic dimension must be in 1..6");
  }
  const auto m = static_cast<std::size_t>(dimension);
  const std::size_t n = values.size();
  if (n == 0 || centers.size() != n * m) {
    throw Error(ErrorCategory::invalid_argument, "biharmonic fit needs one value per center");
  }
  if (!(regularization >= 0.0)) {
    throw Error(ErrorCategory::invalid_argument, "regularization must be >= 0");
  }
  if (dimension > 3) {
    throw Error(ErrorCategory::singular_system,
                "Green function for m=" + std::to_string(dimension) +
                    " is unbounded at the centers; fitting is only defined for m <= 3");
  }
  const auto center = [&](std::size_t j) { return centers.subspan(j * m, m); };

  Eigen::MatrixXd g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    g(i, i) = regularization;
    for (std::size_t j = 0; j < i; ++j) {
      const double r = point_distance(center(i), center(j));
      if (r == 0.0) {
        throw Error(ErrorCategory::duplicate_location,
                    "biharmonic centers " + std::to_string(j) + " and " + std::to_string(i) + " coincide");
      }
      g(i, j) = g(j, i) = green_function(dimension, r);
    }
  }

  const detail::DenseSolver solver(std::move(g), "biharmonic spline");
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(n));
  const Eigen::VectorXd alpha = solver.solve(rhs);
  return BiharmonicModel(dimension, std::vector<double>(centers.begin(), centers.end()),
                         std::vector<double>(alpha.data(), alpha.data() + n), regularization);
}

BiharmonicModel biharmonic_fit(std::span<const Location2D> centers, std::span<const double> values,
                               double regularization) {
  const auto flat = flatten(centers);
  return biharmonic_fit(2, flat, values, regularization);
}

double biharmonic_eval(const BiharmonicModel& model, std::span<const double> point) {
  if (point.size() != static_cast<std::size_t>(model.dimension())) {
    throw Error(ErrorCategory::invalid_argument, "query point dimension does not match the model");
  }
  const auto& alpha = model.strengths();
  double sum = 0.0;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    sum += alpha[j] * green_function(model.dimension(), point_distance(point, model.center(j)));
  }
  return sum;
}

double biharmonic_eval(const BiharmonicModel& model, const Location2D& s) {
  const double p[2] = {s.x, s.y};
  return biharmonic_eval(model, std::span<const double>(p, 2));
}

LinearMeanModel::LinearMeanModel(MedianPolishFit fit, GridLattice lattice)
    : fit_(std::move(fit)), lattice_(std::move(lattice)) {
  if (fit_.rows() != lattice_.rows() || fit_.columns() != lattice_.columns()) {
    throw Error(ErrorCategory::invalid_argument, "median polish fit does not match the lattice");
  }
}

double linear_mean_at(const LinearMeanModel& model, const Location2D& s) {
  const auto& lat = model.lattice();
  const auto& fit = model.fit();
  const CellLocation cell = cell_containing(lat, s);
  const std::size_t l = cell.column;
  const std::size_t k = cell.row;
  const auto& xs = lat.x_coords();
  const auto& ys = lat.y_coords();
  const double tx = (s.x - xs[l]) / (xs[l + 1] - xs[l]);
  const double ty = (s.y - ys[k]) / (ys[k + 1] - ys[k]);
  // std::lerp is exact at t = 0 and t = 1, so nodes reproduce node_mean bit for bit.
  const double row_part = std::lerp(fit.row_effects[k], fit.row_effects[k + 1], ty);
  const double col_part = std::lerp(fit.col_effects[l], fit.col_effects[l + 1], tx);
  return fit.overall + row_part + col_part;
}

}  // namespace polishkrige
