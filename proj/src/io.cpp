#include "polishkrige/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "polishkrige/error.hpp"

namespace polishkrige {

namespace {

std::string exact(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string exact_or_na(const std::optional<double>& v) { return v ? exact(*v) : "NA"; }

void write_list(std::ostream& out, const std::string& key, const std::vector<double>& values) {
  out << key << ' ' << values.size();
  for (double v : values) out << ' ' << exact(v);
  out << '\n';
}

[[noreturn]] void bad(const std::string& message) { throw Error(ErrorCategory::bad_model, message); }

using Section = std::map<std::string, std::vector<std::string>>;

class ModelReader {
 public:
  explicit ModelReader(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) bad("empty model file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kModelFormatVersion) bad("unsupported model format header '" + line + "'");
    std::string section;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      if (line.front() == '[') {
        if (line.back() != ']') bad("malformed section header '" + line + "'");
        section = line.substr(1, line.size() - 2);
        sections_[section];
        continue;
      }
      std::istringstream ls(line);
      std::string key;
      ls >> key;
      std::vector<std::string> tokens;
      for (std::string t; ls >> t;) tokens.push_back(t);
      if (section.empty()) bad("entry outside a section: '" + line + "'");
      sections_[section][key] = std::move(tokens);
    }
  }

  bool has_section(const std::string& s) const { return sections_.count(s) > 0; }

  const std::vector<std::string>& tokens(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) bad("missing section [" + section + "]");
    const auto k = s->second.find(key);
    if (k == s->second.end()) bad("missing key '" + key + "' in [" + section + "]");
    return k->second;
  }

  std::string word(const std::string& section, const std::string& key) const {
    const auto& t = tokens(section, key);
    if (t.size() != 1) bad("expected one value for '" + key + "' in [" + section + "]");
    return t.front();
  }

  double number(const std::string& section, const std::string& key) const {
    return parse(word(section, key), key);
  }

  std::optional<double> optional_number(const std::string& section, const std::string& key) const {
    const std::string w = word(section, key);
    if (w == "NA") return std::nullopt;
    return parse(w, key);
  }

  long integer(const std::string& section, const std::string& key) const {
    const std::string w = word(section, key);
    long v = 0;
    const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc{} || ptr != w.data() + w.size()) bad("'" + key + "' is not an integer");
    return v;
  }

  std::vector<std::optional<double>> list(const std::string& section, const std::string& key) const {
    const auto& t = tokens(section, key);
    if (t.empty()) bad("empty list '" + key + "'");
    const long count = std::strtol(t.front().c_str(), nullptr, 10);
    if (count < 0 || static_cast<std::size_t>(count) + 1 != t.size()) {
      bad("list '" + key + "' length does not match its declared count");
    }
    std::vector<std::optional<double>> out;
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (t[i] == "NA") out.emplace_back();
      else out.emplace_back(parse(t[i], key));
    }
    return out;
  }

  std::vector<double> dense_list(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    for (const auto& v : list(section, key)) {
      if (!v) bad("unexpected NA in '" + key + "'");
      out.push_back(*v);
    }
    return out;
  }

 private:
  static double parse(const std::string& w, const std::string& key) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc{} || ptr != w.data() + w.size()) bad("'" + key + "' has non-numeric value '" + w + "'");
    return v;
  }

  std::map<std::string, Section> sections_;
};

}  // namespace

void write_model(std::ostream& out, const SurfaceModel& model) {
  const auto& cfg = model.config();
  const auto& grid = model.source_grid();
  const auto& lat = grid.lattice();
  const auto& polish = model.polish();
  const auto& vg = model.variogram();

  out << kModelFormatVersion << '\n';
  out << "[model]\nmethod " << method_name(model.method()) << '\n';

  out << "[config]\n";
  out << "family " << family_name(cfg.family) << '\n';
  out << "n_bins " << cfg.n_bins << '\n';
  out << "max_lag " << exact(cfg.max_lag) << '\n';
  out << "epsilon " << exact(cfg.epsilon) << '\n';
  out << "fixed_nugget " << exact_or_na(cfg.fixed_nugget) << '\n';
  out << "neighbors " << cfg.neighbors << '\n';
  out << "polish_tol " << exact(cfg.polish.tol) << '\n';
  out << "max_sweeps " << cfg.polish.max_sweeps << '\n';

  out << "[lattice]\n";
  write_list(out, "x", lat.x_coords());
  write_list(out, "y", lat.y_coords());

  out << "[grid]\n";
  for (std::size_t k = 0; k < grid.rows(); ++k) {
    out << "row" << k << ' ' << grid.columns();
    for (std::size_t l = 0; l < grid.columns(); ++l) out << ' ' << exact_or_na(grid.at(k, l));
    out << '\n';
  }

  out << "[polish]\n";
  out << "overall " << exact(polish.overall) << '\n';
  out << "sweeps " << polish.sweeps << '\n';
  out << "converged " << (polish.converged ? 1 : 0) << '\n';
  out << "tol " << exact(polish.tol) << '\n';
  write_list(out, "row_effects", polish.row_effects);
  write_list(out, "col_effects", polish.col_effects);
  for (std::size_t k = 0; k < polish.rows(); ++k) {
    out << "residual" << k << ' ' << polish.columns();
    for (std::size_t l = 0; l < polish.columns(); ++l) out << ' ' << exact_or_na(polish.residual(k, l));
    out << '\n';
  }

  out << "[variogram]\n";
  out << "family " << family_name(vg.model.family) << '\n';
  out << "nugget " << exact(vg.model.nugget) << '\n';
  out << "partial_sill " << exact(vg.model.partial_sill) << '\n';
  out << "range " << exact(vg.model.range) << '\n';
  out << "weighted_sse " << exact(vg.weighted_sse) << '\n';
  out << "degenerate " << (vg.degenerate ? 1 : 0) << '\n';

  if (const auto& spline = model.spline()) {
    out << "[spline]\n";
    out << "dimension " << spline->dimension() << '\n';
    out << "regularization " << exact(spline->regularization()) << '\n';
    write_list(out, "centers", spline->centers());
    write_list(out, "strengths", spline->strengths());
  }
}

SurfaceModel read_model(std::istream& in) {
  const ModelReader r(in);
  try {
    const Method method = parse_method(r.word("model", "method"));

    FitConfig cfg;
    cfg.family = parse_family(r.word("config", "family"));
    cfg.n_bins = static_cast<int>(r.integer("config", "n_bins"));
    cfg.max_lag = r.number("config", "max_lag");
    cfg.epsilon = r.number("config", "epsilon");
    cfg.fixed_nugget = r.optional_number("config", "fixed_nugget");
    cfg.neighbors = static_cast<std::size_t>(r.integer("config", "neighbors"));
    cfg.polish.tol = r.number("config", "polish_tol");
    cfg.polish.max_sweeps = static_cast<int>(r.integer("config", "max_sweeps"));

    GridLattice lattice(r.dense_list("lattice", "x"), r.dense_list("lattice", "y"));
    const std::size_t p = lattice.rows();
    const std::size_t q = lattice.columns();

    std::vector<std::optional<double>> cells;
    MedianPolishFit polish;
    for (std::size_t k = 0; k < p; ++k) {
      auto row = r.list("grid", "row" + std::to_string(k));
      auto res = r.list("polish", "residual" + std::to_string(k));
      if (row.size() != q || res.size() != q) bad("grid row " + std::to_string(k) + " has the wrong width");
      cells.insert(cells.end(), row.begin(), row.end());
      polish.residuals.insert(polish.residuals.end(), res.begin(), res.end());
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i].has_value() != polish.residuals[i].has_value()) {
        bad("residual table does not match the observed cells");
      }
    }
    GridTable grid(std::move(lattice), std::move(cells));

    polish.overall = r.number("polish", "overall");
    polish.sweeps = static_cast<int>(r.integer("polish", "sweeps"));
    polish.converged = r.integer("polish", "converged") != 0;
    polish.tol = r.number("polish", "tol");
    polish.row_effects = r.dense_list("polish", "row_effects");
    polish.col_effects = r.dense_list("polish", "col_effects");
    if (polish.row_effects.size() != p || polish.col_effects.size() != q) {
      bad("effect vectors do not match the lattice");
    }

    VariogramFit vg;
    vg.model.family = parse_family(r.word("variogram", "family"));
    vg.model.nugget = r.number("variogram", "nugget");
    vg.model.partial_sill = r.number("variogram", "partial_sill");
    vg.model.range = r.number("variogram", "range");
    vg.weighted_sse = r.number("variogram", "weighted_sse");
    vg.degenerate = r.integer("variogram", "degenerate") != 0;

    std::optional<BiharmonicModel> spline;
    if (method == Method::impk) {
      spline.emplace(static_cast<int>(r.integer("spline", "dimension")), r.dense_list("spline", "centers"),
                     r.dense_list("spline", "strengths"), r.number("spline", "regularization"));
    }
    return SurfaceModel(method, std::move(grid), std::move(polish), std::move(spline), vg, cfg);
  } catch (const Error& e) {
    if (e.category() == ErrorCategory::bad_model) throw;
    bad(std::string("inconsistent model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const SurfaceModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCategory::io, "cannot write " + path.string());
  write_model(out, model);
  if (!out) throw Error(ErrorCategory::io, "failed writing " + path.string());
}

SurfaceModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::bad_model, "cannot open model file " + path.string());
  return read_model(in);
}

std::string format_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_grid_csv(std::ostream& out, const GridLattice& lattice, const std::vector<double>& values) {
  if (values.size() != lattice.rows() * lattice.columns()) {
    throw Error(ErrorCategory::invalid_argument, "grid values do not match the lattice");
  }
  out << "x,y,value\n";
  for (std::size_t k = 0; k < lattice.rows(); ++k) {
    for (std::size_t l = 0; l < lattice.columns(); ++l) {
      const auto s = lattice.node(k, l);
      out << format_fixed(s.x) << ',' << format_fixed(s.y) << ',' << format_fixed(values[k * lattice.columns() + l])
          << '\n';
    }
  }
}

void write_pgm(std::ostream& out, const GridLattice& lattice, const std::vector<double>& values) {
  if (values.size() != lattice.rows() * lattice.columns()) {
    throw Error(ErrorCategory::invalid_argument, "grid values do not match the lattice");
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double span = *hi - *lo;
  out << "P2\n" << lattice.columns() << ' ' << lattice.rows() << "\n255\n";
  for (std::size_t k = lattice.rows(); k-- > 0;) {
    for (std::size_t l = 0; l < lattice.columns(); ++l) {
      const double v = values[k * lattice.columns() + l];
      const long level = span > 0.0 ? std::lround(255.0 * (v - *lo) / span) : 0;
      out << (l ? " " : "") << level;
    }
    out << '\n';
  }
}

void write_cv_csv(std::ostream& out, const CvReport& report) {
  out << "x,y,observed,predicted,error\n";
  for (const auto& p : report.points) {
    out << format_fixed(p.location.x) << ',' << format_fixed(p.location.y) << ',' << format_fixed(p.observed)
        << ',' << format_fixed(p.predicted) << ',' << format_fixed(p.error) << '\n';
  }
  out << "RMSE," << method_name(report.method) << ',' << format_fixed(report.rmse) << '\n';
}

void write_cv_comparison(std::ostream& out, const std::vector<CvReport>& reports) {
  out << "method,rmse,folds,skipped\n";
  for (const auto& r : reports) {
    out << method_name(r.method) << ',' << format_fixed(r.rmse) << ',' << r.points.size() << ','
        << r.skipped.size() << '\n';
  }
}

std::filesystem::path resolve_data_path(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (fs::exists(path) || path.is_absolute()) return path;
  if (const char* dir = std::getenv("POLISHKRIGE_DATA"); dir && *dir) {
    if (const fs::path candidate = fs::path(dir) / path; fs::exists(candidate)) return candidate;
  }
  if (const fs::path candidate = fs::path("data") / path; fs::exists(candidate)) return candidate;
  return path;
}

}  // namespace polishkrige
