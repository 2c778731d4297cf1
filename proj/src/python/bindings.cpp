#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>

#include "polishkrige/error.hpp"
#include "polishkrige/io.hpp"
#include "polishkrige/kriging.hpp"
#include "polishkrige/mean_surface.hpp"
#include "polishkrige/median_polish.hpp"
#include "polishkrige/predictor.hpp"
#include "polishkrige/spatial.hpp"

namespace py = pybind11;
using namespace polishkrige;

namespace {

py::array_t<double> to_array(const std::vector<double>& values, std::size_t rows, std::size_t columns) {
  py::array_t<double> out({rows, columns});
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

py::array_t<double> optional_table(const std::vector<std::optional<double>>& cells, std::size_t rows,
                                   std::size_t columns) {
  py::array_t<double> out({rows, columns});
  double* d = out.mutable_data();
  for (std::size_t i = 0; i < cells.size(); ++i) d[i] = cells[i] ? *cells[i] : std::nan("");
  return out;
}

ScatterSet scatter_from(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& z) {
  if (x.size() != y.size() || x.size() != z.size()) {
    throw Error(ErrorCategory::invalid_argument, "x, y and z must have equal length");
  }
  std::vector<Observation> obs;
  for (std::size_t i = 0; i < x.size(); ++i) obs.push_back({{x[i], y[i]}, z[i]});
  return ScatterSet(std::move(obs));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Median polish kriging (MPK / IMPK) core bindings";

  static py::exception<Error> py_error(m, "PolishKrigeError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(py_error, (std::string(category_name(e.category())) + ": " + e.what()).c_str());
    }
  });

  py::class_<Location2D>(m, "Location2D")
      .def(py::init<double, double>(), py::arg("x"), py::arg("y"))
      .def_readonly("x", &Location2D::x)
      .def_readonly("y", &Location2D::y)
      .def("__repr__", [](const Location2D& s) {
        return "Location2D(" + std::to_string(s.x) + ", " + std::to_string(s.y) + ")";
      });

  py::class_<ScatterSet>(m, "ScatterSet")
      .def(py::init(&scatter_from), py::arg("x"), py::arg("y"), py::arg("z"))
      .def("__len__", &ScatterSet::size)
      .def_property_readonly("x", [](const ScatterSet& s) {
        std::vector<double> v;
        for (const auto& o : s.observations()) v.push_back(o.location.x);
        return v;
      })
      .def_property_readonly("y", [](const ScatterSet& s) {
        std::vector<double> v;
        for (const auto& o : s.observations()) v.push_back(o.location.y);
        return v;
      })
      .def_property_readonly("z", &ScatterSet::values);

  m.def(
      "load_observations_csv",
      [](const std::filesystem::path& path, const std::string& x, const std::string& y, const std::string& z) {
        CsvOptions o;
        o.x_column = x;
        o.y_column = y;
        o.value_column = z;
        return load_observations_csv(path, o);
      },
      py::arg("path"), py::arg("x_column") = "x", py::arg("y_column") = "y", py::arg("value_column") = "z");

  py::class_<GridTable>(m, "GridTable")
      .def_property_readonly("x_coords", [](const GridTable& g) { return g.lattice().x_coords(); })
      .def_property_readonly("y_coords", [](const GridTable& g) { return g.lattice().y_coords(); })
      .def_property_readonly("shape", [](const GridTable& g) { return py::make_tuple(g.rows(), g.columns()); })
      .def_property_readonly("present_count", &GridTable::present_count)
      .def("to_array", [](const GridTable& g) { return optional_table(g.cells(), g.rows(), g.columns()); },
           "Cells as a float array with NaN for missing values");

  m.def("to_grid", &to_grid, py::arg("scatter"), py::arg("snap_tolerance") = -1.0);

  py::class_<MedianPolishOptions>(m, "MedianPolishOptions")
      .def(py::init<>())
      .def_readwrite("tol", &MedianPolishOptions::tol)
      .def_readwrite("max_sweeps", &MedianPolishOptions::max_sweeps);

  py::class_<MedianPolishFit>(m, "MedianPolishFit")
      .def_readonly("overall", &MedianPolishFit::overall)
      .def_readonly("row_effects", &MedianPolishFit::row_effects)
      .def_readonly("col_effects", &MedianPolishFit::col_effects)
      .def_readonly("sweeps", &MedianPolishFit::sweeps)
      .def_readonly("converged", &MedianPolishFit::converged)
      .def_property_readonly("residuals", [](const MedianPolishFit& f) {
        return optional_table(f.residuals, f.rows(), f.columns());
      });

  m.def("decompose", &decompose, py::arg("grid"), py::arg("options") = MedianPolishOptions{});
  m.def("node_mean", &node_mean, py::arg("fit"), py::arg("row"), py::arg("column"));

  m.def("green_function", &green_function, py::arg("m"), py::arg("r"));

  py::class_<BiharmonicModel>(m, "BiharmonicModel")
      .def_property_readonly("dimension", &BiharmonicModel::dimension)
      .def_property_readonly("strengths", &BiharmonicModel::strengths)
      .def_property_readonly("centers", &BiharmonicModel::centers)
      .def("__call__", [](const BiharmonicModel& b, const std::vector<double>& p) { return biharmonic_eval(b, p); });

  m.def(
      "biharmonic_fit",
      [](int dimension, const std::vector<double>& centers, const std::vector<double>& values, double eps) {
        return biharmonic_fit(dimension, centers, values, eps);
      },
      py::arg("dimension"), py::arg("centers"), py::arg("values"), py::arg("regularization") = 0.0,
      "Centers are flattened point-major: dimension coordinates per center.");
  m.def(
      "biharmonic_eval",
      [](const BiharmonicModel& b, const std::vector<double>& p) { return biharmonic_eval(b, p); },
      py::arg("model"), py::arg("point"));

  py::enum_<VariogramFamily>(m, "VariogramFamily")
      .value("spherical", VariogramFamily::spherical)
      .value("exponential", VariogramFamily::exponential)
      .value("gaussian", VariogramFamily::gaussian);

  py::class_<VariogramModel>(m, "VariogramModel")
      .def(py::init([](VariogramFamily f, double nugget, double psill, double range) {
             VariogramModel v{f, nugget, psill, range};
             v.validate();
             return v;
           }),
           py::arg("family"), py::arg("nugget"), py::arg("partial_sill"), py::arg("range"))
      .def_readonly("family", &VariogramModel::family)
      .def_readonly("nugget", &VariogramModel::nugget)
      .def_readonly("partial_sill", &VariogramModel::partial_sill)
      .def_readonly("range", &VariogramModel::range)
      .def("semivariance", &VariogramModel::semivariance);

  m.def("covariance", &covariance, py::arg("model"), py::arg("h"));

  py::class_<KrigingPrediction>(m, "KrigingPrediction")
      .def_readonly("value", &KrigingPrediction::value)
      .def_readonly("variance", &KrigingPrediction::variance);

  py::class_<KrigingWeights>(m, "KrigingWeights")
      .def_readonly("weights", &KrigingWeights::weights)
      .def_readonly("lagrange", &KrigingWeights::lagrange);

  m.def("ok_solve", &ok_solve, py::arg("scatter"), py::arg("model"), py::arg("target"));
  m.def("ok_predict", &ok_predict, py::arg("scatter"), py::arg("model"), py::arg("target"));

  py::enum_<Method>(m, "Method").value("MPK", Method::mpk).value("IMPK", Method::impk);

  py::class_<FitConfig>(m, "FitConfig")
      .def(py::init<>())
      .def_readwrite("polish", &FitConfig::polish)
      .def_readwrite("family", &FitConfig::family)
      .def_readwrite("n_bins", &FitConfig::n_bins)
      .def_readwrite("max_lag", &FitConfig::max_lag)
      .def_readwrite("epsilon", &FitConfig::epsilon)
      .def_readwrite("fixed_nugget", &FitConfig::fixed_nugget)
      .def_readwrite("neighbors", &FitConfig::neighbors)
      .def_readwrite("freeze_variogram", &FitConfig::freeze_variogram);

  py::class_<VariogramFit>(m, "VariogramFit")
      .def_readonly("model", &VariogramFit::model)
      .def_readonly("weighted_sse", &VariogramFit::weighted_sse)
      .def_readonly("degenerate", &VariogramFit::degenerate);

  py::class_<SurfaceModel>(m, "SurfaceModel")
      .def_property_readonly("method", &SurfaceModel::method)
      .def_property_readonly("variogram", &SurfaceModel::variogram)
      .def_property_readonly("polish", &SurfaceModel::polish)
      .def("mean_at", &SurfaceModel::mean_at)
      .def("residual_at", &SurfaceModel::residual_at)
      .def("save", [](const SurfaceModel& s, const std::filesystem::path& p) { save_model(p, s); });

  m.def("load_model", &load_model, py::arg("path"));

  m.def(
      "fit", [](const GridTable& g, Method method, const FitConfig& c) { return fit(g, method, c); },
      py::arg("grid"), py::arg("method"), py::arg("config") = FitConfig{});
  m.def("predict", &predict, py::arg("model"), py::arg("location"));
  m.def(
      "predict_grid",
      [](const SurfaceModel& model, std::size_t rows, std::size_t columns) {
        const PredictionGrid g = [&] {
          py::gil_scoped_release release;
          return predict_grid(model, rows, columns);
        }();
        return py::make_tuple(g.lattice.x_coords(), g.lattice.y_coords(), to_array(g.values, rows, columns),
                              to_array(g.variances, rows, columns));
      },
      py::arg("model"), py::arg("rows"), py::arg("columns"),
      "Returns (x_coords, y_coords, values, variances); arrays are rows x columns.");

  py::class_<CvPoint>(m, "CvPoint")
      .def_readonly("location", &CvPoint::location)
      .def_readonly("observed", &CvPoint::observed)
      .def_readonly("predicted", &CvPoint::predicted)
      .def_readonly("error", &CvPoint::error)
      .def_readonly("variance", &CvPoint::variance);

  py::class_<CvReport>(m, "CvReport")
      .def_readonly("method", &CvReport::method)
      .def_readonly("points", &CvReport::points)
      .def_readonly("rmse", &CvReport::rmse)
      .def_property_readonly("skipped", [](const CvReport& r) { return r.skipped.size(); });

  m.def(
      "loocv",
      [](const GridTable& g, Method method, const FitConfig& c, unsigned threads) {
        py::gil_scoped_release release;
        return loocv(g, method, c, threads);
      },
      py::arg("grid"), py::arg("method"), py::arg("config") = FitConfig{}, py::arg("threads") = 0);
  m.def("rmse", &rmse, py::arg("errors"));
}
