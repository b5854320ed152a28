#include <filesystem>
#include <string>
#include <tuple>
#include <vector>

#include <fmt/format.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dsflow/errors.hpp"
#include "dsflow/experiment.hpp"
#include "dsflow/geometry.hpp"
#include "dsflow/grid.hpp"
#include "dsflow/initial_data.hpp"
#include "dsflow/parallel.hpp"
#include "dsflow/quermass.hpp"
#include "dsflow/symfun.hpp"

namespace py = pybind11;
using namespace dsflow;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::array_t<double> to_array(const std::vector<double>& v, std::size_t cols) {
  const auto rows = static_cast<py::ssize_t>(v.size() / cols);
  return py::array_t<double>({rows, static_cast<py::ssize_t>(cols)}, v.data());
}

GridKind parse_kind(const std::string& kind) {
  if (kind == "axisymmetric") return GridKind::axisymmetric;
  if (kind == "latlong") return GridKind::latlong;
  throw Error(ErrorKind::invalid_argument, "grid kind must be 'axisymmetric' or 'latlong'");
}

ScalarField field_on(const GridPtr& grid, const std::vector<double>& r) {
  if (r.size() != grid->size()) throw Error(ErrorKind::invalid_argument, "field size does not match the grid");
  return ScalarField(grid, r);
}

// Grids are immutable and shared; python holds them through this handle.
struct GridHandle {
  GridPtr grid;
};

py::dict quermass_dict(const QuermassVector& q) {
  py::dict d;
  for (int l = -1; l <= q.k_max; ++l) d[py::int_(l)] = q(l);
  return d;
}

}  // namespace

PYBIND11_MODULE(_dsflow, m) {
  m.doc() = "Flows of spacelike graphs in de Sitter space";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, fmt::format("{}: {}", to_string(e.kind()), e.what()).c_str());
    }
  });

  m.def(
      "elementary",
      [](const std::vector<double>& kappa) {
        const auto s = elementary_all(CurvatureVector(kappa));
        return std::vector<double>(s.E.data(), s.E.data() + s.E.size());
      },
      py::arg("kappa"), "Normalized E_0..E_n of the curvature vector.");
  m.def(
      "quotient_F", [](const std::vector<double>& kappa, int k) { return quotient_F(CurvatureVector(kappa), k); },
      py::arg("kappa"), py::arg("k"));

  py::class_<GridHandle>(m, "Grid")
      .def(py::init([](const std::string& kind, int n, int n_theta, int n_phi) {
             return GridHandle{Grid::build(parse_kind(kind), n, {n_theta, n_phi})};
           }),
           py::arg("kind"), py::arg("n"), py::arg("n_theta"), py::arg("n_phi") = 1)
      .def_property_readonly("n", [](const GridHandle& h) { return h.grid->dim(); })
      .def_property_readonly("size", [](const GridHandle& h) { return h.grid->size(); })
      .def_property_readonly("kind", [](const GridHandle& h) { return std::string(to_string(h.grid->kind())); })
      .def_property_readonly("theta",
                             [](const GridHandle& h) {
                               std::vector<double> t(h.grid->size());
                               for (std::size_t i = 0; i < t.size(); ++i) t[i] = h.grid->theta(i);
                               return to_array(t);
                             })
      .def_property_readonly("phi",
                             [](const GridHandle& h) {
                               std::vector<double> p(h.grid->size());
                               for (std::size_t i = 0; i < p.size(); ++i) p[i] = h.grid->phi(i);
                               return to_array(p);
                             })
      .def_property_readonly("weights", [](const GridHandle& h) {
        const auto w = h.grid->weights();
        return to_array(std::vector<double>(w.begin(), w.end()));
      });

  m.def(
      "perturbed_field",
      [](const GridHandle& h, double rho0, const std::vector<std::tuple<int, int, double>>& modes) {
        std::vector<HarmonicMode> hm;
        for (const auto& [l, order, amp] : modes) hm.push_back({l, order, amp});
        return to_array(perturbed_field(h.grid, rho0, hm).values);
      },
      py::arg("grid"), py::arg("rho0"), py::arg("modes") = std::vector<std::tuple<int, int, double>>{},
      "rho0 plus a sum of (degree, order, amplitude) harmonics.");

  m.def(
      "geometry",
      [](const GridHandle& h, const std::vector<double>& r, int k, double upsilon_min) {
        const auto f = assemble(field_on(h.grid, r), k, GeometryOptions{upsilon_min});
        py::dict d;
        d["upsilon"] = to_array(f.upsilon);
        d["u"] = to_array(f.u);
        d["lambda_prime"] = to_array(f.lambda_prime);
        d["F"] = to_array(f.F);
        d["speed"] = to_array(f.speed);
        d["area_density"] = to_array(f.area_density);
        d["kappa"] = to_array(f.kappa, static_cast<std::size_t>(f.n));
        d["E"] = to_array(f.E, static_cast<std::size_t>(f.n + 1));
        return d;
      },
      py::arg("grid"), py::arg("r"), py::arg("k") = 2, py::arg("upsilon_min") = 1e-3);

  m.def(
      "quermassintegrals",
      [](const GridHandle& h, const std::vector<double>& r, int k) {
        return quermass_dict(quermassintegrals(assemble(field_on(h.grid, r), k), k));
      },
      py::arg("grid"), py::arg("r"), py::arg("k") = 2, "Dict l -> A_l for l = -1..k.");
  m.def(
      "af_check",
      [](const GridHandle& h, const std::vector<double>& r) {
        const auto a = af_check(quermassintegrals(assemble(field_on(h.grid, r), 2), 2));
        py::dict d;
        d["A1"] = a.A1;
        d["A2"] = a.A2;
        d["rho_star"] = a.rho_star;
        d["bound"] = a.bound;
        d["slack"] = a.slack;
        return d;
      },
      py::arg("grid"), py::arg("r"));
  m.def("slice_phi", &slice_phi, py::arg("rho"), py::arg("l"), py::arg("n"));
  m.def("invert_phi1", &invert_phi1, py::arg("target"), py::arg("n"));

  m.def(
      "run_experiment",
      [](const std::string& spec_text, const std::string& out) {
        const auto spec = parse_spec(spec_text);
        ExperimentResult result;
        {
          py::gil_scoped_release release;
          result = run_experiment(spec, std::filesystem::path(out));
        }
        py::dict d;
        d["exit_status"] = result.exit_status;
        d["status"] = result.status;
        d["message"] = result.message;
        d["summary"] = result.summary;
        return d;
      },
      py::arg("spec"), py::arg("out"), "Runs a YAML spec given as text; writes run.csv and summary.txt to out.");

  m.def("worker_count", &worker_count);
  m.def("set_worker_count", &set_worker_count, py::arg("workers"));
}
