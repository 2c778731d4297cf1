#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "polishkrige/predictor.hpp"

namespace polishkrige {

/// First line of every model file.
inline constexpr std::string_view kModelFormatVersion = "polishkrige-model 1";

/// Plain-text model file: a version line followed by `[section]` blocks of
/// `key value...` lines. Numbers are written in shortest round-trip form,
/// so a saved model predicts bit-identically after loading.
void write_model(std::ostream& out, const SurfaceModel& model);
SurfaceModel read_model(std::istream& in);  // throws bad_model
void save_model(const std::filesystem::path& path, const SurfaceModel& model);
SurfaceModel load_model(const std::filesystem::path& path);

/// Fixed six-decimal formatting used by every CSV writer.
std::string format_fixed(double v);

/// Long-format grid CSV with header `x,y,value`, row-major.
void write_grid_csv(std::ostream& out, const GridLattice& lattice, const std::vector<double>& values);

/// ASCII (P2) greymap, values min-max scaled to 0..255, northernmost row first.
void write_pgm(std::ostream& out, const GridLattice& lattice, const std::vector<double>& values);

/// Per-fold CSV `x,y,observed,predicted,error` followed by `RMSE,<method>,<value>`.
void write_cv_csv(std::ostream& out, const CvReport& report);

/// `method,rmse,folds,skipped` table, one row per report.
void write_cv_comparison(std::ostream& out, const std::vector<CvReport>& reports);

/// Returns `path` when it exists; otherwise tries it relative to
/// $POLISHKRIGE_DATA and then ./data. Falls back to `path` unchanged.
std::filesystem::path resolve_data_path(const std::filesystem::path& path);

}  // namespace polishkrige
