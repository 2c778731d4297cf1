#pragma once

// Test-only reference routines. None of these call into the library's
// solver or covariance code so they can serve as independent checks.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "polishkrige/spatial.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<long double>>;

/// Gaussian elimination without pivoting, in extended precision.
inline std::vector<long double> solve_unpivoted(Matrix a, std::vector<long double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    for (std::size_t row = col + 1; row < n; ++row) {
      const long double f = a[row][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[row][k] -= f * a[col][k];
      b[row] -= f * b[col];
    }
  }
  std::vector<long double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    long double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Spherical covariance written out directly: sill - gamma(h).
inline long double spherical_cov(long double nugget, long double psill, long double range, long double h) {
  if (h == 0) return nugget + psill;
  const long double t = h / range;
  const long double g = t >= 1 ? psill : psill * (1.5L * t - 0.5L * t * t * t);
  return psill - g;
}

struct KrigingAnswer {
  std::vector<long double> weights;
  long double lagrange = 0;
  long double value = 0;
  long double variance = 0;
};

/// Ordinary kriging through the augmented system [K 1; 1' 0]. K is positive
/// definite, so every leading pivot is positive and the last one equals
/// -1'K^{-1}1 < 0; elimination without pivoting is therefore well defined.
inline KrigingAnswer ordinary_kriging(const std::vector<polishkrige::Observation>& data, long double nugget,
                                      long double psill, long double range, polishkrige::Location2D target) {
  const std::size_t n = data.size();
  const auto dist = [](polishkrige::Location2D a, polishkrige::Location2D b) {
    const long double dx = static_cast<long double>(a.x) - b.x;
    const long double dy = static_cast<long double>(a.y) - b.y;
    return std::sqrt(dx * dx + dy * dy);
  };
  Matrix a(n + 1, std::vector<long double>(n + 1, 0));
  std::vector<long double> b(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a[i][j] = spherical_cov(nugget, psill, range, i == j ? 0 : dist(data[i].location, data[j].location));
    }
    a[i][n] = 1;
    a[n][i] = 1;
    b[i] = spherical_cov(nugget, psill, range, dist(data[i].location, target));
  }
  b[n] = 1;
  const auto x = solve_unpivoted(a, b);
  KrigingAnswer out;
  out.weights.assign(x.begin(), x.begin() + static_cast<long>(n));
  out.lagrange = x[n];
  long double explained = 0;
  for (std::size_t i = 0; i < n; ++i) {
    out.value += x[i] * data[i].value;
    explained += x[i] * b[i];
  }
  out.variance = nugget + psill - explained - out.lagrange;
  return out;
}

/// Portable uniform doubles from raw 64-bit engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

 private:
  std::mt19937_64 engine_;
};

/// Smooth trend plus a short-scale wave on an integer lattice, with a
/// fraction of cells knocked out (never emptying a row or column).
inline polishkrige::GridTable synthetic_field(std::size_t rows, std::size_t columns, double missing_fraction,
                                              std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> xs(columns);
  std::vector<double> ys(rows);
  for (std::size_t l = 0; l < columns; ++l) xs[l] = 1.0 + static_cast<double>(l);
  for (std::size_t k = 0; k < rows; ++k) ys[k] = 1.0 + static_cast<double>(k);
  std::vector<std::optional<double>> cells(rows * columns);
  for (std::size_t k = 0; k < rows; ++k) {
    for (std::size_t l = 0; l < columns; ++l) {
      const double x = xs[l];
      const double y = ys[k];
      cells[k * columns + l] = 9.0 + 0.15 * x - 0.08 * y + 0.9 * std::sin(0.7 * x) * std::cos(0.45 * y) +
                               0.02 * (x - 8.0) * (y - 11.0) + rng.uniform(-0.6, 0.6);
    }
  }
  const auto target = static_cast<std::size_t>(missing_fraction * static_cast<double>(rows * columns));
  std::size_t removed = 0;
  for (std::size_t attempt = 0; removed < target && attempt < 50 * rows * columns; ++attempt) {
    const std::size_t i = rng.index(rows * columns);
    if (!cells[i]) continue;
    const std::size_t k = i / columns;
    const std::size_t l = i % columns;
    std::size_t row_left = 0;
    std::size_t col_left = 0;
    for (std::size_t j = 0; j < columns; ++j) row_left += cells[k * columns + j].has_value();
    for (std::size_t j = 0; j < rows; ++j) col_left += cells[j * columns + l].has_value();
    if (row_left <= 2 || col_left <= 2) continue;
    cells[i].reset();
    ++removed;
  }
  return polishkrige::GridTable(polishkrige::GridLattice(xs, ys), std::move(cells));
}

inline std::filesystem::path write_temp(const std::string& name, const std::string& contents) {
  const auto dir = std::filesystem::temp_directory_path() / "polishkrige_tests";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path, std::ios::binary) << contents;
  return path;
}

inline void write_grid_csv(const std::filesystem::path& path, const polishkrige::GridTable& grid) {
  std::ofstream out(path, std::ios::binary);
  out.precision(17);
  out << "x,y,z\n";
  for (std::size_t k = 0; k < grid.rows(); ++k) {
    for (std::size_t l = 0; l < grid.columns(); ++l) {
      if (const auto& c = grid.at(k, l)) {
        out << grid.lattice().x_coords()[l] << ',' << grid.lattice().y_coords()[k] << ',' << *c << '\n';
      }
    }
  }
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace oracle
