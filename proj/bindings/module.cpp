// python surface: JSON-in / JSON-out wrappers around the harness plus a
// few numeric primitives that are handy for checks from python.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>
#include <string>
#include <vector>

#include "zzct/harness.hpp"
#include "zzct/poisson.hpp"

namespace py = pybind11;
using zzct::json;

namespace {

std::string run_json(const std::string& cfg, const std::string& out_dir,
                     int threads) {
  return zzct::cmd_run(zzct::parse_config(json::parse(cfg)), out_dir, threads)
      .dump();
}

std::string replicates_json(const std::string& cfg, int threads) {
  return zzct::run_replicates(zzct::parse_config(json::parse(cfg)), threads)
      .dump();
}

std::string calibrate_json(const std::string& cfg, const std::string& out_dir) {
  return zzct::cmd_calibrate(zzct::parse_config(json::parse(cfg)), out_dir)
      .dump();
}

std::string experiment_json(const std::string& name,
                            const std::string& overrides,
                            const std::string& out_dir, int threads) {
  const json ov = overrides.empty() ? json() : json::parse(overrides);
  return zzct::cmd_experiment(name, ov, out_dir, threads).dump();
}

std::string experiment_defaults_json(const std::string& name) {
  return zzct::experiment_defaults(name).dump();
}

py::object first_event_poly_py(const std::vector<double>& coeffs, double u,
                               double horizon, double tol) {
  zzct::RateBound b;
  b.coeffs = Eigen::Map<const zzct::Vec>(coeffs.data(),
                                         static_cast<Eigen::Index>(coeffs.size()));
  b.horizon = horizon;
  const auto r = zzct::first_event_poly(b, u, tol);
  if (!r) return py::none();
  return py::float_(*r);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "zig-zag sampler with continuous tempering";
  m.attr("__version__") = "0.1.0";

  m.def("run_json", &run_json, py::arg("config"), py::arg("out_dir"),
        py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>(),
        "run replicates, write skeleton CSVs and summary.json");
  m.def("replicates_json", &replicates_json, py::arg("config"),
        py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>(),
        "run replicates without writing files");
  m.def("calibrate_json", &calibrate_json, py::arg("config"),
        py::arg("out_dir"), py::call_guard<py::gil_scoped_release>(),
        "calibrate kappa, write kappa.json");
  m.def("experiment_json", &experiment_json, py::arg("name"),
        py::arg("overrides") = std::string(), py::arg("out_dir") = "out",
        py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>(),
        "run a built-in study");
  m.def("experiment_defaults_json", &experiment_defaults_json, py::arg("name"),
        "default settings of a built-in study");

  m.def("first_event_constant", &zzct::first_event_constant, py::arg("rate"),
        py::arg("u"), "first event of a constant-rate Poisson clock");
  m.def("first_event_poly", &first_event_poly_py, py::arg("coeffs"),
        py::arg("u"),
        py::arg("horizon") = std::numeric_limits<double>::infinity(),
        py::arg("tol") = 1e-10,
        "first event of a clipped-polynomial-rate Poisson clock");
  m.def("is_weight", &zzct::is_weight, py::arg("delta"),
        "importance weight delta / expm1(delta)");
  m.def("derive_seed", &zzct::derive_seed, py::arg("base"), py::arg("index"),
        "per-replicate seed derivation");
}
