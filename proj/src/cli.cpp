#include "polishkrige/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "polishkrige/error.hpp"
#include "polishkrige/io.hpp"
#include "polishkrige/predictor.hpp"

namespace polishkrige {

namespace {

struct RunConfig {
  std::string method = "impk";
  std::string family = "spherical";
  int n_bins = 15;
  double max_lag = 0.0;
  double epsilon = 0.0;
  std::optional<double> nugget;
  double tol = 0.0;
  int max_sweeps = 100;
  std::size_t neighbors = 0;
  bool freeze_variogram = false;
  unsigned threads = 0;
  std::uint64_t seed = 0;  // reserved; no code path draws random numbers yet
  std::string x_column = "x";
  std::string y_column = "y";
  std::string value_column = "z";

  FitConfig fit_config() const {
    FitConfig c;
    c.polish.tol = tol;
    c.polish.max_sweeps = max_sweeps;
    c.family = parse_family(family);
    c.n_bins = n_bins;
    c.max_lag = max_lag;
    c.epsilon = epsilon;
    c.fixed_nugget = nugget;
    c.neighbors = neighbors;
    c.freeze_variogram = freeze_variogram;
    return c;
  }

  CsvOptions csv() const {
    CsvOptions o;
    o.x_column = x_column;
    o.y_column = y_column;
    o.value_column = value_column;
    return o;
  }
};

struct Resolution {
  std::size_t rows = 50;
  std::size_t columns = 50;
};

Resolution parse_resolution(const std::string& text) {
  const auto pos = text.find_first_of("xX");
  Resolution r;
  try {
    if (pos == std::string::npos) throw std::invalid_argument(text);
    std::size_t used = 0;
    const long p = std::stol(text.substr(0, pos), &used);
    if (used != pos) throw std::invalid_argument(text);
    const std::string tail = text.substr(pos + 1);
    const long q = std::stol(tail, &used);
    if (used != tail.size()) throw std::invalid_argument(text);
    if (p < 2 || q < 2) throw std::invalid_argument(text);
    r.rows = static_cast<std::size_t>(p);
    r.columns = static_cast<std::size_t>(q);
  } catch (const std::exception&) {
    throw CLI::ValidationError("--resolution", "expected PxQ with P, Q >= 2, got '" + text + "'");
  }
  return r;
}

GridTable load_grid(const std::string& input, const RunConfig& rc) {
  const auto scatter = load_observations_csv(resolve_data_path(input), rc.csv());
  return to_grid(scatter);
}

void open_or_throw(std::ofstream& f, const std::filesystem::path& path) {
  f.open(path, std::ios::binary);
  if (!f) throw Error(ErrorCategory::io, "cannot write " + path.string());
}

void print_fit_summary(std::ostream& out, const SurfaceModel& model) {
  const auto& grid = model.source_grid();
  const auto& polish = model.polish();
  const auto& vg = model.variogram();
  out << "method: " << method_name(model.method()) << '\n';
  out << "grid: " << grid.rows() << " rows x " << grid.columns() << " columns, " << grid.present_count()
      << " observed cells\n";
  out << "median polish: sweeps=" << polish.sweeps << " converged=" << (polish.converged ? "yes" : "no")
      << " tol=" << polish.tol << '\n';
  out << "variogram: family=" << family_name(vg.model.family) << " nugget=" << format_fixed(vg.model.nugget)
      << " partial_sill=" << format_fixed(vg.model.partial_sill) << " sill=" << format_fixed(vg.model.sill())
      << " range=" << format_fixed(vg.model.range) << '\n';
  if (vg.degenerate) {
    out << "warning: degenerate-variogram: residual semivariances are all zero; "
           "residual kriging reduces to the residual mean\n";
  }
}

int cmd_fit(const std::string& input, const std::string& model_out, const RunConfig& rc, std::ostream& out) {
  const GridTable grid = load_grid(input, rc);
  const SurfaceModel model = fit(grid, parse_method(rc.method), rc.fit_config());
  save_model(model_out, model);
  print_fit_summary(out, model);
  out << "model: " << model_out << '\n';
  return 0;
}

int cmd_surface(const std::string& model_path, const Resolution& res, const std::string& value_out,
                const std::string& variance_out, bool pgm, std::ostream& out) {
  const SurfaceModel model = load_model(model_path);
  const PredictionGrid grid = predict_grid(model, res.rows, res.columns);
  const auto emit = [&](const std::string& path, const std::vector<double>& values) {
    std::ofstream f;
    open_or_throw(f, path);
    write_grid_csv(f, grid.lattice, values);
    out << "wrote " << path << '\n';
    if (pgm) {
      const auto pgm_path = std::filesystem::path(path).replace_extension(".pgm");
      std::ofstream g;
      open_or_throw(g, pgm_path);
      write_pgm(g, grid.lattice, values);
      out << "wrote " << pgm_path.string() << '\n';
    }
  };
  emit(value_out, grid.values);
  if (!variance_out.empty()) emit(variance_out, grid.variances);
  return 0;
}

int cmd_cv(const std::string& input, bool both, const std::string& out_path, const RunConfig& rc,
           std::ostream& out, std::ostream& err) {
  const GridTable grid = load_grid(input, rc);
  const FitConfig cfg = rc.fit_config();
  std::vector<Method> methods;
  if (both) methods = {Method::mpk, Method::impk};
  else methods = {parse_method(rc.method)};

  std::vector<CvReport> reports;
  for (Method m : methods) {
    reports.push_back(loocv(grid, m, cfg, rc.threads));
    const auto& r = reports.back();
    if (!r.skipped.empty()) {
      err << "skipped folds: " << method_name(m) << ' ' << r.skipped.size() << '\n';
    }
  }

  if (both) {
    write_cv_comparison(out, reports);
    if (!out_path.empty()) {
      for (const auto& r : reports) {
        std::string lower(method_name(r.method));
        std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
        std::ofstream f;
        open_or_throw(f, out_path + "_" + lower + ".csv");
        write_cv_csv(f, r);
      }
    }
  } else if (!out_path.empty()) {
    std::ofstream f;
    open_or_throw(f, out_path);
    write_cv_csv(f, reports.front());
    out << "RMSE," << method_name(reports.front().method) << ',' << format_fixed(reports.front().rmse) << '\n';
  } else {
    write_cv_csv(out, reports.front());
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Median polish kriging (MPK) and its biharmonic variant (IMPK) for gridded surfaces",
               "polishkrige"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file with defaults for the shared options; flags override it");

  RunConfig rc;
  app.add_option("--method", rc.method, "mean surface: mpk (linear) or impk (biharmonic)")
      ->check(CLI::IsMember({"mpk", "impk"}, CLI::ignore_case))
      ->capture_default_str();
  app.add_option("--variogram", rc.family, "residual variogram family")
      ->check(CLI::IsMember({"spherical", "exponential", "gaussian"}))
      ->capture_default_str();
  app.add_option("--bins", rc.n_bins, "empirical variogram bins")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--max-lag", rc.max_lag, "largest lag used for the variogram (0: half the largest distance)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--epsilon", rc.epsilon, "ridge term for the biharmonic spline solve")->check(CLI::NonNegativeNumber);
  app.add_option("--nugget", rc.nugget, "hold the variogram nugget at this value")->check(CLI::NonNegativeNumber);
  app.add_option("--tol", rc.tol, "median polish tolerance (0: 1e-9 x data range)")->check(CLI::NonNegativeNumber);
  app.add_option("--max-sweeps", rc.max_sweeps, "median polish sweep limit")->check(CLI::PositiveNumber);
  app.add_option("--neighbors", rc.neighbors, "kriging neighbourhood size (0: all residuals)");
  app.add_flag("--freeze-variogram", rc.freeze_variogram, "cross-validation reuses the full-data variogram");
  app.add_option("--threads", rc.threads, "worker threads for cross-validation (0: all cores)");
  app.add_option("--seed", rc.seed, "random seed (reserved)");
  app.add_option("--x-col", rc.x_column, "CSV column holding x")->capture_default_str();
  app.add_option("--y-col", rc.y_column, "CSV column holding y")->capture_default_str();
  app.add_option("--z-col", rc.value_column, "CSV column holding the response")->capture_default_str();

  std::string input;
  std::string model_path;
  std::string value_out;
  std::string variance_out;
  std::string cv_out;
  std::string resolution_text = "50x50";
  bool pgm = false;
  bool both = false;

  auto* fit_cmd = app.add_subcommand("fit", "fit a surface model and write it to a model file");
  fit_cmd->add_option("input", input, "observation CSV")->required();
  fit_cmd->add_option("-o,--model-out", model_path, "model file to write")->required();

  auto* surface_cmd = app.add_subcommand("surface", "evaluate a model file on a uniform grid");
  surface_cmd->add_option("model", model_path, "model file from `fit`")->required();
  surface_cmd->add_option("--resolution", resolution_text, "output grid as rows x columns, e.g. 64x48")
      ->capture_default_str();
  surface_cmd->add_option("-o,--out", value_out, "prediction grid CSV")->required();
  surface_cmd->add_option("--variance-out", variance_out, "kriging variance grid CSV");
  surface_cmd->add_flag("--pgm", pgm, "also write ASCII PGM heatmaps next to each CSV");

  auto* cv_cmd = app.add_subcommand("cv", "leave-one-out cross-validation");
  cv_cmd->add_option("input", input, "observation CSV")->required();
  cv_cmd->add_flag("--both", both, "run MPK and IMPK and print a comparison table");
  cv_cmd->add_option("-o,--out", cv_out, "per-point CSV (with --both: prefix for <out>_mpk.csv/<out>_impk.csv)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage: " << e.what() << '\n';
    return 2;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(input, model_path, rc, out);
    if (surface_cmd->parsed()) {
      Resolution res;
      try {
        res = parse_resolution(resolution_text);
      } catch (const CLI::ValidationError& e) {
        err << "usage: " << e.what() << '\n';
        return 2;
      }
      return cmd_surface(model_path, res, value_out, variance_out, pgm, out);
    }
    if (cv_cmd->parsed()) return cmd_cv(input, both, cv_out, rc, out, err);
  } catch (const Error& e) {
    err << "error: " << category_name(e.category()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace polishkrige
