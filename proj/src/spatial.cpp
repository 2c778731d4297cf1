#include "polishkrige/spatial.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "polishkrige/error.hpp"

namespace polishkrige {

namespace {

std::string format_location(const Location2D& s) {
  std::ostringstream os;
  os.precision(17);
  os << '(' << s.x << ", " << s.y << ')';
  return os.str();
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    fields.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::optional<double> parse_double(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return value;
}

bool is_blank(std::string_view line) { return trim(line).empty(); }

// Groups sorted coordinates whose distance from the first member of the
// group stays within `tol`; each group is represented by its mean.
std::vector<double> cluster_axis(std::vector<double> values, double tol) {
  std::sort(values.begin(), values.end());
  std::vector<double> centers;
  std::size_t i = 0;
  while (i < values.size()) {
    std::size_t j = i + 1;
    while (j < values.size() && values[j] - values[i] <= tol) ++j;
    if (j - i == 1 || tol == 0.0) {
      centers.push_back(values[i]);
    } else {
      const double sum = std::accumulate(values.begin() + i, values.begin() + j, 0.0);
      centers.push_back(sum / static_cast<double>(j - i));
    }
    i = j;
  }
  return centers;
}

std::size_t nearest_index(const std::vector<double>& centers, double v) {
  const auto it = std::lower_bound(centers.begin(), centers.end(), v);
  if (it == centers.begin()) return 0;
  if (it == centers.end()) return centers.size() - 1;
  const auto hi = static_cast<std::size_t>(it - centers.begin());
  return (v - centers[hi - 1] <= centers[hi] - v) ? hi - 1 : hi;
}

}  // namespace

double distance(const Location2D& a, const Location2D& b) { return std::hypot(a.x - b.x, a.y - b.y); }

ScatterSet::ScatterSet(std::vector<Observation> observations, double duplicate_tolerance)
    : observations_(std::move(observations)) {
  if (observations_.empty()) {
    throw Error(ErrorCategory::invalid_argument, "scatter set needs at least one observation");
  }
  if (!(duplicate_tolerance >= 0.0)) {
    throw Error(ErrorCategory::invalid_argument, "duplicate tolerance must be non-negative");
  }
  for (std::size_t i = 0; i < observations_.size(); ++i) {
    const auto& o = observations_[i];
    if (!std::isfinite(o.location.x) || !std::isfinite(o.location.y) || !std::isfinite(o.value)) {
      throw Error(ErrorCategory::invalid_argument,
                  "observation " + std::to_string(i) + " has a non-finite coordinate or value");
    }
  }
  if (const auto dup = find_duplicate(observations_, duplicate_tolerance)) {
    throw Error(ErrorCategory::duplicate_location,
                "observations " + std::to_string(dup->first) + " and " + std::to_string(dup->second) +
                    " share location " + format_location(observations_[dup->first].location));
  }
}

std::optional<std::pair<std::size_t, std::size_t>> ScatterSet::find_duplicate(
    std::span<const Observation> observations, double tolerance) {
  std::vector<std::size_t> order(observations.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& la = observations[a].location;
    const auto& lb = observations[b].location;
    return la.x < lb.x || (la.x == lb.x && la.y < lb.y);
  });
  std::optional<std::pair<std::size_t, std::size_t>> best;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& a = observations[order[i]].location;
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const auto& b = observations[order[j]].location;
      if (b.x - a.x > tolerance) break;
      if (distance(a, b) <= tolerance) {
        const std::pair<std::size_t, std::size_t> pair = std::minmax(order[i], order[j]);
        if (!best || pair < *best) best = pair;
      }
    }
  }
  return best;
}

std::vector<Location2D> ScatterSet::locations() const {
  std::vector<Location2D> out;
  out.reserve(observations_.size());
  for (const auto& o : observations_) out.push_back(o.location);
  return out;
}

std::vector<double> ScatterSet::values() const {
  std::vector<double> out;
  out.reserve(observations_.size());
  for (const auto& o : observations_) out.push_back(o.value);
  return out;
}

GridLattice::GridLattice(std::vector<double> x_coords, std::vector<double> y_coords)
    : x_(std::move(x_coords)), y_(std::move(y_coords)) {
  const auto check = [](const std::vector<double>& c, const char* axis) {
    if (c.size() < 2) {
      throw Error(ErrorCategory::invalid_grid,
                  std::string("lattice needs at least two distinct ") + axis + " coordinates");
    }
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (!std::isfinite(c[i])) {
        throw Error(ErrorCategory::invalid_grid, std::string("non-finite ") + axis + " coordinate");
      }
      if (i > 0 && !(c[i] > c[i - 1])) {
        throw Error(ErrorCategory::invalid_grid,
                    std::string(axis) + " coordinates must be strictly increasing");
      }
    }
  };
  check(x_, "x");
  check(y_, "y");
}

GridLattice GridLattice::uniform(double x0, double x1, std::size_t columns, double y0, double y1,
                                 std::size_t rows) {
  const auto axis = [](double a, double b, std::size_t n) {
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) {
      c[i] = (i + 1 == n) ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return c;
  };
  if (columns < 2 || rows < 2) {
    throw Error(ErrorCategory::invalid_argument, "uniform lattice needs at least 2x2 nodes");
  }
  return GridLattice(axis(x0, x1, columns), axis(y0, y1, rows));
}

GridTable::GridTable(GridLattice lattice, std::vector<std::optional<double>> cells)
    : lattice_(std::move(lattice)), cells_(std::move(cells)) {
  const std::size_t p = rows();
  const std::size_t q = columns();
  if (cells_.size() != p * q) {
    throw Error(ErrorCategory::invalid_grid, "cell count does not match lattice dimensions");
  }
  std::vector<bool> row_seen(p, false);
  std::vector<bool> col_seen(q, false);
  for (std::size_t k = 0; k < p; ++k) {
    for (std::size_t l = 0; l < q; ++l) {
      const auto& c = cells_[k * q + l];
      if (!c) continue;
      if (!std::isfinite(*c)) throw Error(ErrorCategory::invalid_grid, "non-finite cell value");
      row_seen[k] = true;
      col_seen[l] = true;
    }
  }
  for (std::size_t k = 0; k < p; ++k) {
    if (!row_seen[k]) {
      throw Error(ErrorCategory::invalid_grid, "row " + std::to_string(k) + " has no observed cell");
    }
  }
  for (std::size_t l = 0; l < q; ++l) {
    if (!col_seen[l]) {
      throw Error(ErrorCategory::invalid_grid,
                  "column " + std::to_string(l) + " has no observed cell");
    }
  }
}

std::size_t GridTable::present_count() const {
  return static_cast<std::size_t>(
      std::count_if(cells_.begin(), cells_.end(), [](const auto& c) { return c.has_value(); }));
}

ScatterSet GridTable::to_scatter() const {
  std::vector<Observation> obs;
  obs.reserve(present_count());
  for (std::size_t k = 0; k < rows(); ++k) {
    for (std::size_t l = 0; l < columns(); ++l) {
      if (const auto& c = at(k, l)) obs.push_back({lattice_.node(k, l), *c});
    }
  }
  return ScatterSet(std::move(obs));
}

GridTable GridTable::without(std::size_t row, std::size_t column) const {
  if (row >= rows() || column >= columns()) {
    throw Error(ErrorCategory::out_of_range, "cell index outside the lattice");
  }
  auto cells = cells_;
  cells[row * columns() + column].reset();
  return GridTable(lattice_, std::move(cells));
}

GridTable GridTable::affine(double scale, double shift) const {
  auto cells = cells_;
  for (auto& c : cells) {
    if (c) c = scale * *c + shift;
  }
  return GridTable(lattice_, std::move(cells));
}

ScatterSet load_observations_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::io, "cannot open " + path.string());

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string_view> header;
  std::string header_line;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    header_line = line;
    header = split(header_line, options.delimiter);
    break;
  }
  if (header.empty()) throw Error(ErrorCategory::parse, path.string() + ": missing header row");

  const auto column_of = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw Error(ErrorCategory::parse, path.string() + ": header has no column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ix = column_of(options.x_column);
  const std::size_t iy = column_of(options.y_column);
  const std::size_t iv = column_of(options.value_column);

  std::vector<Observation> obs;
  std::vector<std::size_t> line_of;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto fields = split(line, options.delimiter);
    const auto field = [&](std::size_t i, const std::string& name) {
      if (i >= fields.size()) {
        throw Error(ErrorCategory::parse, path.string() + ": line " + std::to_string(line_no) +
                                              ": missing field '" + name + "'");
      }
      const auto v = parse_double(fields[i]);
      if (!v || !std::isfinite(*v)) {
        throw Error(ErrorCategory::parse, path.string() + ": line " + std::to_string(line_no) +
                                              ": non-numeric " + name + " '" +
                                              std::string(fields[i]) + "'");
      }
      return *v;
    };
    Observation o;
    o.location.x = field(ix, options.x_column);
    o.location.y = field(iy, options.y_column);
    o.value = field(iv, options.value_column);
    obs.push_back(o);
    line_of.push_back(line_no);
  }
  if (obs.empty()) throw Error(ErrorCategory::parse, path.string() + ": no data rows");

  if (const auto dup = ScatterSet::find_duplicate(obs, options.duplicate_tolerance)) {
    throw Error(ErrorCategory::duplicate_location,
                path.string() + ": lines " + std::to_string(line_of[dup->first]) + " and " +
                    std::to_string(line_of[dup->second]) + " share location " +
                    format_location(obs[dup->first].location));
  }
  return ScatterSet(std::move(obs), options.duplicate_tolerance);
}

GridTable to_grid(const ScatterSet& scatter, double snap_tolerance) {
  const auto& obs = scatter.observations();
  std::vector<double> xs;
  std::vector<double> ys;
  xs.reserve(obs.size());
  ys.reserve(obs.size());
  for (const auto& o : obs) {
    xs.push_back(o.location.x);
    ys.push_back(o.location.y);
  }
  const auto [xmin, xmax] = std::minmax_element(xs.begin(), xs.end());
  const auto [ymin, ymax] = std::minmax_element(ys.begin(), ys.end());
  const double span = std::max(*xmax - *xmin, *ymax - *ymin);
  const double tol = snap_tolerance < 0.0 ? 1e-9 * span : snap_tolerance;

  auto x_nodes = cluster_axis(xs, tol);
  auto y_nodes = cluster_axis(ys, tol);
  if (x_nodes.size() < 2 || y_nodes.size() < 2) {
    throw Error(ErrorCategory::invalid_grid, "fewer than two distinct x or y coordinates");
  }
  GridLattice lattice(std::move(x_nodes), std::move(y_nodes));
  const std::size_t q = lattice.columns();
  std::vector<std::optional<double>> cells(lattice.rows() * q);
  std::vector<std::size_t> owner(cells.size(), 0);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const std::size_t l = nearest_index(lattice.x_coords(), obs[i].location.x);
    const std::size_t k = nearest_index(lattice.y_coords(), obs[i].location.y);
    auto& cell = cells[k * q + l];
    if (cell) {
      throw Error(ErrorCategory::duplicate_location,
                  "observations " + std::to_string(owner[k * q + l]) + " and " + std::to_string(i) +
                      " snap to the same grid cell");
    }
    cell = obs[i].value;
    owner[k * q + l] = i;
  }
  return GridTable(std::move(lattice), std::move(cells));
}

CellLocation cell_containing(const GridLattice& lattice, const Location2D& s) {
  const auto locate = [](const std::vector<double>& c, double v, std::size_t& index, Side& side) {
    const std::size_t last_cell = c.size() - 2;
    if (v < c.front()) {
      index = 0;
      side = Side::below;
    } else if (v > c.back()) {
      index = last_cell;
      side = Side::above;
    } else {
      // first upper node >= v, so a point on an interior node goes to the lower cell
      const auto it = std::lower_bound(c.begin() + 1, c.end(), v);
      index = static_cast<std::size_t>(it - c.begin()) - 1;
      side = Side::inside;
    }
  };
  CellLocation out;
  locate(lattice.x_coords(), s.x, out.column, out.x_side);
  locate(lattice.y_coords(), s.y, out.row, out.y_side);
  return out;
}

}  // namespace polishkrige
