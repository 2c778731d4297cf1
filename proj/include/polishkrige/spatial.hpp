#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace polishkrige {

struct Location2D {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Location2D&, const Location2D&) = default;
};

double distance(const Location2D& a, const Location2D& b);

struct Observation {
  Location2D location;
  double value = 0.0;
};

/// Ordered set of observations at pairwise-distinct, finite locations.
class ScatterSet {
 public:
  /// Validates finiteness and that no two locations lie within
  /// `duplicate_tolerance` of each other (distance <= tolerance is a
  /// duplicate, so the default rejects only identical coordinates).
  explicit ScatterSet(std::vector<Observation> observations, double duplicate_tolerance = 0.0);

  std::size_t size() const noexcept { return observations_.size(); }
  const std::vector<Observation>& observations() const noexcept { return observations_; }
  const Observation& operator[](std::size_t i) const { return observations_[i]; }

  std::vector<Location2D> locations() const;
  std::vector<double> values() const;

  /// First pair of indices (i < j) closer than `tolerance`, if any.
  static std::optional<std::pair<std::size_t, std::size_t>> find_duplicate(
      std::span<const Observation> observations, double tolerance);

 private:
  std::vector<Observation> observations_;
};

/// Strictly increasing column (x) and row (y) coordinates, at least two each.
class GridLattice {
 public:
  GridLattice(std::vector<double> x_coords, std::vector<double> y_coords);

  const std::vector<double>& x_coords() const noexcept { return x_; }
  const std::vector<double>& y_coords() const noexcept { return y_; }
  std::size_t columns() const noexcept { return x_.size(); }  // q
  std::size_t rows() const noexcept { return y_.size(); }     // p

  Location2D node(std::size_t row, std::size_t column) const { return {x_[column], y_[row]}; }

  /// Uniform lattice with the given node counts spanning [x0, x1] x [y0, y1].
  static GridLattice uniform(double x0, double x1, std::size_t columns, double y0, double y1,
                             std::size_t rows);

 private:
  std::vector<double> x_;
  std::vector<double> y_;
};

/// A p x q table of optional values on a lattice; rows follow y, columns
/// follow x. Every row and column must hold at least one value.
class GridTable {
 public:
  GridTable(GridLattice lattice, std::vector<std::optional<double>> cells);

  const GridLattice& lattice() const noexcept { return lattice_; }
  std::size_t rows() const noexcept { return lattice_.rows(); }
  std::size_t columns() const noexcept { return lattice_.columns(); }

  const std::optional<double>& at(std::size_t row, std::size_t column) const {
    return cells_[row * columns() + column];
  }
  const std::vector<std::optional<double>>& cells() const noexcept { return cells_; }
  std::size_t present_count() const;

  /// Present cells as observations at their lattice nodes, row-major.
  ScatterSet to_scatter() const;

  /// Copy with one cell marked missing. Throws invalid_grid if that empties
  /// a row or column.
  GridTable without(std::size_t row, std::size_t column) const;

  /// Copy with every present value mapped through `scale * v + shift`.
  GridTable affine(double scale, double shift) const;

 private:
  GridLattice lattice_;
  std::vector<std::optional<double>> cells_;
};

struct CsvOptions {
  std::string x_column = "x";
  std::string y_column = "y";
  std::string value_column = "z";
  char delimiter = ',';
  double duplicate_tolerance = 0.0;
};

/// Reads one observation per non-blank data row, in file order.
ScatterSet load_observations_csv(const std::filesystem::path& path, const CsvOptions& options = {});

/// Recovers the lattice from scattered coordinates. Coordinates closer than
/// `snap_tolerance` collapse onto one lattice line; a negative tolerance
/// selects 1e-9 times the coordinate span.
GridTable to_grid(const ScatterSet& scatter, double snap_tolerance = -1.0);

enum class Side { below, inside, above };

/// Zero-based cell (column index l in [0, q-2], row index k in [0, p-2])
/// plus, per axis, whether the query lies before, within or past the lattice.
struct CellLocation {
  std::size_t column = 0;
  std::size_t row = 0;
  Side x_side = Side::inside;
  Side y_side = Side::inside;

  bool inside() const noexcept { return x_side == Side::inside && y_side == Side::inside; }
};

CellLocation cell_containing(const GridLattice& lattice, const Location2D& s);

}  // namespace polishkrige
