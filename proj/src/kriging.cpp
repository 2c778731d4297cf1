#include "polishkrige/kriging.hpp"

#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "dense_solve.hpp"
#include "polishkrige/error.hpp"

namespace polishkrige {

std::string_view family_name(VariogramFamily family) {
  switch (family) {
    case VariogramFamily::spherical: return "spherical";
    case VariogramFamily::exponential: return "exponential";
    case VariogramFamily::gaussian: return "gaussian";
  }
  return "spherical";
}

VariogramFamily parse_family(std::string_view name) {
  if (name == "spherical") return VariogramFamily::spherical;
  if (name == "exponential") return VariogramFamily::exponential;
  if (name == "gaussian") return VariogramFamily::gaussian;
  throw Error(ErrorCategory::invalid_argument, "unknown variogram family '" + std::string(name) + "'");
}

namespace {

// Normalized structure function f(h/a) in [0, 1].
double structure(VariogramFamily family, double t) {
  switch (family) {
    case VariogramFamily::spherical: return t >= 1.0 ? 1.0 : 1.5 * t - 0.5 * t * t * t;
    case VariogramFamily::exponential: return 1.0 - std::exp(-3.0 * t);
    case VariogramFamily::gaussian: return 1.0 - std::exp(-3.0 * t * t);
  }
  return 1.0;
}

}  // namespace

double VariogramModel::semivariance(double h) const {
  if (!(h >= 0.0)) throw Error(ErrorCategory::invalid_argument, "lag distance must be >= 0");
  if (h == 0.0) return 0.0;
  return nugget + partial_sill * structure(family, h / range);
}

void VariogramModel::validate() const {
  if (!(nugget >= 0.0) || !(partial_sill >= 0.0) || !(range > 0.0) || !std::isfinite(nugget) ||
      !std::isfinite(partial_sill) || !std::isfinite(range)) {
    throw Error(ErrorCategory::invalid_argument,
                "variogram needs nugget >= 0, partial sill >= 0 and range > 0");
  }
}

double covariance(const VariogramModel& model, double h) {
  if (!(h >= 0.0)) throw Error(ErrorCategory::invalid_argument, "lag distance must be >= 0");
  if (h == 0.0) return model.sill();
  return model.partial_sill * (1.0 - structure(model.family, h / model.range));
}

EmpiricalVariogram empirical_semivariogram(const ScatterSet& scatter, int n_bins, double max_lag) {
  const std::size_t n = scatter.size();
  if (n < 2) throw Error(ErrorCategory::invalid_argument, "semivariogram needs at least two observations");
  if (n_bins < 1) throw Error(ErrorCategory::invalid_argument, "semivariogram needs at least one bin");
  const auto& obs = scatter.observations();
  if (!(max_lag > 0.0)) {
    double far = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) far = std::max(far, distance(obs[i].location, obs[j].location));
    }
    max_lag = 0.5 * far;
  }
  const auto bins = static_cast<std::size_t>(n_bins);
  const double width = max_lag / static_cast<double>(n_bins);
  std::vector<double> sums(bins, 0.0);
  std::vector<std::size_t> counts(bins, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double h = distance(obs[i].location, obs[j].location);
      if (h > max_lag) continue;
      const auto b = std::min(static_cast<std::size_t>(h / width), bins - 1);
      const double d = obs[i].value - obs[j].value;
      sums[b] += d * d;
      ++counts[b];
    }
  }
  EmpiricalVariogram out;
  out.max_lag = max_lag;
  out.bin_width = width;
  for (std::size_t b = 0; b < bins; ++b) {
    if (counts[b] == 0) continue;
    out.lag_centers.push_back((static_cast<double>(b) + 0.5) * width);
    out.gamma.push_back(sums[b] / (2.0 * static_cast<double>(counts[b])));
    out.pair_counts.push_back(counts[b]);
  }
  if (out.size() == 0) {
    throw Error(ErrorCategory::invalid_argument, "no observation pairs within the maximum lag");
  }
  return out;
}

namespace {

// Least-squares problem in normalized units: lags divided by the largest lag
// centre, semivariances by the largest estimate.
struct FitProblem {
  VariogramFamily family;
  std::vector<double> lags;
  std::vector<double> gamma;
  std::vector<double> weights;
  std::optional<double> fixed_nugget;
  double range_lo = 1e-6;
  double range_hi = 1.0;

  double sse(double nugget, double psill, double range) const {
    double total = 0.0;
    for (std::size_t i = 0; i < lags.size(); ++i) {
      const double model = nugget + psill * structure(family, lags[i] / range);
      const double r = gamma[i] - model;
      total += weights[i] * r * r;
    }
    return total;
  }

  // Unconstrained simplex coordinates -> (nugget, psill, range).
  std::array<double, 3> decode(const gsl_vector* x) const {
    std::size_t i = 0;
    const double nugget = fixed_nugget ? *fixed_nugget : std::pow(gsl_vector_get(x, i++), 2);
    const double psill = std::pow(gsl_vector_get(x, i++), 2);
    const double range = range_lo + (range_hi - range_lo) * 0.5 * (1.0 + std::sin(gsl_vector_get(x, i)));
    return {nugget, psill, range};
  }

  std::size_t dims() const { return fixed_nugget ? 2 : 3; }

  void encode(const std::array<double, 3>& p, gsl_vector* x) const {
    std::size_t i = 0;
    if (!fixed_nugget) gsl_vector_set(x, i++, std::sqrt(p[0]));
    gsl_vector_set(x, i++, std::sqrt(p[1]));
    const double u = std::clamp(2.0 * (p[2] - range_lo) / (range_hi - range_lo) - 1.0, -1.0, 1.0);
    gsl_vector_set(x, i, std::asin(u));
  }
};

double simplex_objective(const gsl_vector* x, void* params) {
  const auto* problem = static_cast<const FitProblem*>(params);
  const auto p = problem->decode(x);
  return problem->sse(p[0], p[1], p[2]);
}

struct Candidate {
  std::array<double, 3> params;
  double sse;
};

Candidate refine(const FitProblem& problem, const Candidate& start) {
  const std::size_t dims = problem.dims();
  gsl_multimin_function fn{&simplex_objective, dims, const_cast<FitProblem*>(&problem)};
  gsl_vector* x = gsl_vector_alloc(dims);
  gsl_vector* step = gsl_vector_alloc(dims);
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dims);

  Candidate best = start;
  for (int restart = 0; restart < 8; ++restart) {
    problem.encode(best.params, x);
    gsl_vector_set_all(step, 0.2);
    gsl_multimin_fminimizer_set(s, &fn, x, step);
    for (int iter = 0; iter < 20000; ++iter) {
      if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
      if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-12) == GSL_SUCCESS) break;
    }
    const double f = gsl_multimin_fminimizer_minimum(s);
    const bool improved = f < best.sse * (1.0 - 1e-12) - 1e-300;
    if (f < best.sse) best = {problem.decode(gsl_multimin_fminimizer_x(s)), f};
    if (!improved) break;
  }

  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(step);
  gsl_vector_free(x);
  return best;
}

}  // namespace

VariogramFit fit_variogram(const EmpiricalVariogram& empirical, VariogramFamily family,
                           const VariogramFitOptions& options) {
  const std::size_t m = empirical.size();
  if (m == 0 || empirical.gamma.size() != m || empirical.pair_counts.size() != m) {
    throw Error(ErrorCategory::invalid_argument, "malformed empirical variogram");
  }
  if (options.fixed_nugget && !(*options.fixed_nugget >= 0.0)) {
    throw Error(ErrorCategory::invalid_argument, "fixed nugget must be >= 0");
  }
  const double gamma_max = *std::max_element(empirical.gamma.begin(), empirical.gamma.end());
  const double lag_max = *std::max_element(empirical.lag_centers.begin(), empirical.lag_centers.end());

  VariogramFit out;
  out.model.family = family;
  out.model.range = lag_max;
  if (gamma_max == 0.0) {
    out.model.nugget = options.fixed_nugget.value_or(0.0);
    out.degenerate = true;
    return out;
  }
  if (m < 3) {
    throw Error(ErrorCategory::invalid_argument,
                "variogram fitting needs at least 3 non-empty lag bins, got " + std::to_string(m));
  }

  FitProblem problem;
  problem.family = family;
  problem.fixed_nugget = options.fixed_nugget ? std::optional(*options.fixed_nugget / gamma_max) : std::nullopt;
  for (std::size_t i = 0; i < m; ++i) {
    problem.lags.push_back(empirical.lag_centers[i] / lag_max);
    problem.gamma.push_back(empirical.gamma[i] / gamma_max);
    problem.weights.push_back(static_cast<double>(empirical.pair_counts[i]));
  }

  std::vector<Candidate> grid;
  constexpr int kSillSteps = 6;
  constexpr int kRangeSteps = 10;
  for (int a = 0; a < kSillSteps; ++a) {
    const double nugget = problem.fixed_nugget ? *problem.fixed_nugget : a / double(kSillSteps - 1);
    if (problem.fixed_nugget && a > 0) break;
    for (int b = 0; b < kSillSteps; ++b) {
      const double psill = b / double(kSillSteps - 1);
      for (int c = 1; c <= kRangeSteps; ++c) {
        const double range = c / double(kRangeSteps);
        grid.push_back({{nugget, psill, range}, problem.sse(nugget, psill, range)});
      }
    }
  }
  std::stable_sort(grid.begin(), grid.end(), [](const auto& x, const auto& y) { return x.sse < y.sse; });

  Candidate best = grid.front();
  for (std::size_t i = 0; i < std::min<std::size_t>(3, grid.size()); ++i) {
    const Candidate c = refine(problem, grid[i]);
    if (c.sse < best.sse) best = c;
  }

  // A flat curve is matched equally well by any short-range structure;
  // report it as pure nugget.
  double weight_sum = 0.0;
  double weighted_gamma = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    weight_sum += problem.weights[i];
    weighted_gamma += problem.weights[i] * problem.gamma[i];
  }
  const double flat_nugget = problem.fixed_nugget ? *problem.fixed_nugget : weighted_gamma / weight_sum;
  const double flat_sse = problem.sse(flat_nugget, 0.0, 1.0);
  if (flat_sse <= best.sse * (1.0 + 1e-9) + 1e-14 * weight_sum) {
    best = {{flat_nugget, 0.0, 1.0}, flat_sse};
  }

  out.model.nugget = options.fixed_nugget ? *options.fixed_nugget : best.params[0] * gamma_max;
  out.model.partial_sill = best.params[1] * gamma_max;
  out.model.range = best.params[2] * lag_max;
  out.weighted_sse = best.sse * gamma_max * gamma_max;
  return out;
}

struct OrdinaryKriging::Factorization {
  detail::DenseSolver solver;
};

namespace {

Eigen::MatrixXd kriging_matrix(const ScatterSet& data, const VariogramModel& model,
                               const std::vector<std::size_t>& subset) {
  const auto n = static_cast<Eigen::Index>(subset.size());
  Eigen::MatrixXd a(n + 1, n + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = model.sill();
    for (Eigen::Index j = 0; j < i; ++j) {
      const double c = covariance(model, distance(data[subset[i]].location, data[subset[j]].location));
      a(i, j) = a(j, i) = c;
    }
    a(i, n) = a(n, i) = 1.0;
  }
  a(n, n) = 0.0;
  return a;
}

Eigen::VectorXd kriging_rhs(const ScatterSet& data, const VariogramModel& model,
                            const std::vector<std::size_t>& subset, const Location2D& target) {
  const auto n = static_cast<Eigen::Index>(subset.size());
  Eigen::VectorXd b(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) b[i] = covariance(model, distance(data[subset[i]].location, target));
  b[n] = 1.0;
  return b;
}

}  // namespace

OrdinaryKriging::OrdinaryKriging(ScatterSet data, VariogramModel model, std::size_t neighbors)
    : data_(std::move(data)), model_(model), neighbors_(neighbors) {
  model_.validate();
  if (neighbors_ == 0 || neighbors_ >= data_.size()) {
    neighbors_ = 0;
    std::vector<std::size_t> all(data_.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    global_ = std::make_unique<const Factorization>(
        Factorization{detail::DenseSolver(kriging_matrix(data_, model_, all), "ordinary kriging")});
  }
}

OrdinaryKriging::~OrdinaryKriging() = default;
OrdinaryKriging::OrdinaryKriging(OrdinaryKriging&&) noexcept = default;
OrdinaryKriging& OrdinaryKriging::operator=(OrdinaryKriging&&) noexcept = default;

KrigingWeights OrdinaryKriging::weights(const Location2D& target) const {
  if (!std::isfinite(target.x) || !std::isfinite(target.y)) {
    throw Error(ErrorCategory::invalid_argument, "kriging target must be finite");
  }
  const std::size_t n = data_.size();
  std::vector<std::size_t> subset(n);
  std::iota(subset.begin(), subset.end(), std::size_t{0});

  Eigen::VectorXd solution;
  if (global_) {
    solution = global_->solver.solve(kriging_rhs(data_, model_, subset, target));
  } else {
    std::stable_sort(subset.begin(), subset.end(), [&](std::size_t a, std::size_t b) {
      return distance(data_[a].location, target) < distance(data_[b].location, target);
    });
    subset.resize(neighbors_);
    std::sort(subset.begin(), subset.end());
    const detail::DenseSolver local(kriging_matrix(data_, model_, subset), "ordinary kriging");
    solution = local.solve(kriging_rhs(data_, model_, subset, target));
  }

  KrigingWeights out;
  out.weights.assign(n, 0.0);
  for (std::size_t i = 0; i < subset.size(); ++i) out.weights[subset[i]] = solution[static_cast<Eigen::Index>(i)];
  out.lagrange = solution[static_cast<Eigen::Index>(subset.size())];
  return out;
}

KrigingPrediction OrdinaryKriging::predict(const Location2D& target) const {
  const KrigingWeights w = weights(target);
  KrigingPrediction out;
  double explained = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (w.weights[i] == 0.0) continue;
    out.value += w.weights[i] * data_[i].value;
    explained += w.weights[i] * covariance(model_, distance(data_[i].location, target));
  }
  const double c0 = model_.sill();
  double variance = c0 - explained - w.lagrange;
  if (variance < 0.0) {
    if (variance < -1e-9 * std::max(1.0, c0)) {
      throw Error(ErrorCategory::singular_system, "kriging variance is negative beyond round-off");
    }
    variance = 0.0;
  }
  out.variance = variance;
  return out;
}

KrigingWeights ok_solve(const ScatterSet& scatter, const VariogramModel& model, const Location2D& target) {
  return OrdinaryKriging(scatter, model).weights(target);
}

KrigingPrediction ok_predict(const ScatterSet& scatter, const VariogramModel& model,
                             const Location2D& target) {
  return OrdinaryKriging(scatter, model).predict(target);
}

}  // namespace polishkrige
