#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fvdd/error.hpp"
#include "fvdd/simulation.hpp"

namespace py = pybind11;
using namespace fvdd;

namespace {

RunConfig config_from(const py::kwargs& settings) {
  RunConfig config;
  for (const auto& [key, value] : settings) {
    std::string name = py::str(key);
    if (!name.empty() && name.back() == '_') name.pop_back();  // lambda_
    apply_setting(config, name, py::str(value));
  }
  config.check();
  return config;
}

PrimalMesh mesh_for(const RunConfig& config, const std::optional<PrimalMesh>& mesh) {
  return mesh ? *mesh : make_mesh(config.mesh);
}

py::array_t<double> column(const std::vector<TimeSeriesRecord>& records, double TimeSeriesRecord::*field) {
  py::array_t<double> out(static_cast<py::ssize_t>(records.size()));
  auto v = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < records.size(); ++i) v(i) = records[i].*field;
  return out;
}

py::dict run_dict(const RunResult& r) {
  py::array_t<int> iters(static_cast<py::ssize_t>(r.records.size()));
  auto it = iters.mutable_unchecked<1>();
  for (std::size_t i = 0; i < r.records.size(); ++i) it(i) = r.records[i].newton_iters;
  py::dict d;
  d["scheme"] = to_string(r.scheme);
  d["time"] = column(r.records, &TimeSeriesRecord::time);
  d["dt"] = column(r.records, &TimeSeriesRecord::dt);
  d["newton_iters"] = iters;
  d["min_N"] = column(r.records, &TimeSeriesRecord::min_n);
  d["min_P"] = column(r.records, &TimeSeriesRecord::min_p);
  d["entropy"] = column(r.records, &TimeSeriesRecord::entropy);
  d["total_newton_iterations"] = r.total_newton_iterations;
  d["rejections"] = r.rejections;
  d["final_entropy"] = r.final_entropy;
  return d;
}

py::dict fit_dict(const DecayFit& f) {
  py::dict d;
  d["sufficient"] = f.sufficient;
  d["points"] = f.points;
  d["slope"] = f.slope;
  d["intercept"] = f.intercept;
  d["r_squared"] = f.r_squared;
  return d;
}

py::array_t<double> points_array(const std::vector<Point>& pts) {
  py::array_t<double> out({static_cast<py::ssize_t>(pts.size()), py::ssize_t{2}});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    v(i, 0) = pts[i].x();
    v(i, 1) = pts[i].y();
  }
  return out;
}

py::array_t<double> to_numpy(const Eigen::VectorXd& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

PrimalMesh generated(const std::string& kind, int n, double amp, std::uint64_t seed) {
  MeshSource s;
  s.kind = kind;
  s.n = n;
  s.amp = amp;
  s.seed = seed;
  return make_mesh(s);
}

}  // namespace

PYBIND11_MODULE(_fvdd, m) {
  m.doc() = "DDFV and HFV finite volume schemes for the drift-diffusion system.";
  py::register_exception<Error>(m, "FvddError", PyExc_RuntimeError);

  py::class_<PrimalMesh>(m, "Mesh")
      .def_property_readonly("num_vertices", &PrimalMesh::num_vertices)
      .def_property_readonly("num_cells", &PrimalMesh::num_cells)
      .def_property_readonly("num_edges", &PrimalMesh::num_edges)
      .def_property_readonly("num_boundary_edges", &PrimalMesh::num_boundary_edges)
      .def_property_readonly("vertices", [](const PrimalMesh& mesh) { return points_array(mesh.vertices()); })
      .def_property_readonly("centers", [](const PrimalMesh& mesh) { return points_array(mesh.centers()); })
      .def_property_readonly("cells", &PrimalMesh::cells)
      .def("measure", &PrimalMesh::total_measure)
      .def("validate",
           [](const PrimalMesh& mesh) {
             std::vector<std::string> messages;
             for (const auto& v : validate(mesh).violations) messages.push_back(v.message);
             return messages;
           },
           "Violation messages; empty for a valid mesh.")
      .def("save", [](const PrimalMesh& mesh, const std::filesystem::path& path) { save_mesh(mesh, path); })
      .def("__eq__", [](const PrimalMesh& a, const PrimalMesh& b) { return a == b; })
      .def("__repr__", [](const PrimalMesh& mesh) {
        return "<fvdd.Mesh " + std::to_string(mesh.num_cells()) + " cells>";
      });

  m.def("cartesian_mesh", [](int n) { return generated("cartesian", n, 0.0, 0); }, py::arg("n"),
        "n x n squares with PN-junction boundary tags.");
  m.def("triangular_mesh", [](int n) { return generated("tri", n, 0.0, 0); }, py::arg("n"));
  m.def("distorted_mesh", [](int n, double amp, std::uint64_t seed) { return generated("quad-distort", n, amp, seed); },
        py::arg("n"), py::arg("amp") = 0.3, py::arg("seed") = 42);
  m.def("load_mesh", [](const std::filesystem::path& path) {
    MeshSource s;
    s.kind = "file";
    s.file = path;
    return make_mesh(s);
  });

  m.def(
      "simulate",
      [](std::optional<PrimalMesh> mesh, const py::kwargs& settings) {
        const RunConfig config = config_from(settings);
        const PrimalMesh grid = mesh_for(config, mesh);
        RunResult r;
        {
          py::gil_scoped_release release;
          r = simulate(config, grid);
        }
        return run_dict(r);
      },
      py::arg("grid") = py::none(),
      "Transient run. Keyword settings use the CLI names with underscores (t_end=0.5, scheme='hfv', lambda_=0.05).");

  m.def(
      "equilibrium",
      [](std::optional<PrimalMesh> mesh, const py::kwargs& settings) {
        const RunConfig config = config_from(settings);
        const EquilibriumReport r = compute_equilibrium(config, mesh_for(config, mesh));
        py::dict d;
        d["points"] = points_array(r.space.points());
        d["phi"] = to_numpy(r.equilibrium.phi);
        d["N"] = to_numpy(r.equilibrium.n);
        d["P"] = to_numpy(r.equilibrium.p);
        d["newton_iterations"] = r.equilibrium.newton_iterations;
        d["initial_entropy"] = r.initial_entropy;
        return d;
      },
      py::arg("grid") = py::none());

  m.def(
      "compare",
      [](std::optional<PrimalMesh> mesh, const py::kwargs& settings) {
        const RunConfig config = config_from(settings);
        const PrimalMesh grid = mesh_for(config, mesh);
        CompareResult r;
        {
          py::gil_scoped_release release;
          r = compare(config, grid);
        }
        py::dict d;
        d["ddfv"] = run_dict(r.ddfv);
        d["hfv"] = run_dict(r.hfv);
        d["ddfv_fit"] = fit_dict(r.ddfv_fit);
        d["hfv_fit"] = fit_dict(r.hfv_fit);
        return d;
      },
      py::arg("grid") = py::none());

  m.def(
      "fit_entropy_decay",
      [](const std::vector<double>& time, const std::vector<double>& dt, const std::vector<double>& entropy,
         double plateau_factor) {
        if (time.size() != dt.size() || time.size() != entropy.size())
          throw Error(ErrorCode::InvalidArgument, "time, dt and entropy must have the same length");
        std::vector<TimeSeriesRecord> records(time.size());
        for (std::size_t i = 0; i < time.size(); ++i) {
          records[i].time = time[i];
          records[i].dt = dt[i];
          records[i].entropy = entropy[i];
        }
        return fit_dict(fit_entropy_decay(records, plateau_factor));
      },
      py::arg("time"), py::arg("dt"), py::arg("entropy"), py::arg("plateau_factor") = 100.0);

  m.attr("CSV_HEADER") = kCsvHeader;
}
