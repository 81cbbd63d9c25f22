// Copyright eddylab contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "eddylab/document.hpp"
#include "eddylab/errors.hpp"
#include "eddylab/harness.hpp"

namespace py = pybind11;
using namespace eddylab;

namespace {

py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

BoundarySplit split_from(const std::vector<std::string>& sides) {
  auto label = [](const std::string& s) {
    if (s == "electric") return BoundaryLabel::electric;
    if (s == "magnetic") return BoundaryLabel::magnetic;
    throw std::invalid_argument("boundary label must be 'electric' or 'magnetic', got '" + s + "'");
  };
  BoundarySplit split;
  if (sides.size() == 1) {
    split = BoundarySplit::all(label(sides[0]));
  } else if (sides.size() == 6) {
    for (int i = 0; i < 6; ++i) split.box_sides[static_cast<std::size_t>(i)] = label(sides[static_cast<std::size_t>(i)]);
  } else {
    throw std::invalid_argument("give one boundary label or six (-x, +x, -y, +y, -z, +z)");
  }
  return split;
}

// Scenario document together with its instantiated grid, materials and source.
class Scenario {
 public:
  explicit Scenario(ScenarioDocument doc) : doc_(std::move(doc)), instance_(instantiate(doc_)) {}

  static Scenario load(const std::string& path) { return Scenario(load_document(path)); }
  static Scenario from_json(const std::string& text) { return Scenario(parse_document(parse_json_text(text))); }

  const Grid& grid() const { return instance_.grid; }
  const StudyConfig& study() const { return doc_.study; }
  const std::string& study_kind() const { return doc_.study_kind; }
  std::string digest() const { return scenario_digest(instance_); }

  double wellposedness(double s, std::optional<double> rho) const {
    return wellposedness_constant(make_family(instance_.materials, s), rho.value_or(doc_.study.rho), grid());
  }

  py::object run(const std::string& name, std::optional<std::uint64_t> seed, bool timing) const {
    StudyConfig cfg = doc_.study;
    if (seed) cfg.seed = *seed;
    StudyReport report;
    {
      py::gil_scoped_release release;
      report = run_study(name, instance_, cfg);
    }
    return to_python(report.to_json(timing));
  }

  // Rows of (time, |E|, |H|) for the family member s on the document's time grid.
  Eigen::MatrixXd solve(double s) const {
    const auto& cfg = doc_.study;
    Trajectory u;
    {
      py::gil_scoped_release release;
      const auto forcing = sample_forcing(instance_, cfg.tau, cfg.T, cfg.rho);
      EvolutionProblem p;
      p.M = assemble_M(make_family(instance_.materials, s), grid());
      p.N = assemble_N(instance_.materials, grid());
      p.A = assemble_A(grid());
      p.forcing = forcing;
      p.tau = cfg.tau;
      p.T = cfg.T;
      p.rho = cfg.rho;
      p.options = cfg.solver;
      u = solve_evolution(p).solution;
    }
    const double vol = grid().cell_volume();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(u.size()), 3);
    for (std::size_t n = 0; n < u.size(); ++n) {
      const auto i = static_cast<Eigen::Index>(n);
      out(i, 0) = u.time(n);
      out(i, 1) = std::sqrt(vol * u.states[n].e().squaredNorm());
      out(i, 2) = std::sqrt(vol * u.states[n].h().squaredNorm());
    }
    return out;
  }

 private:
  ScenarioDocument doc_;
  ScenarioInstance instance_;
};

}  // namespace

PYBIND11_MODULE(_eddylab, m) {
  m.doc() = "Staggered-grid eddy-current limit studies";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<DocumentError>(m, "DocumentError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ModelInvalidError>(m, "ModelInvalidError", PyExc_RuntimeError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::class_<Grid>(m, "Grid")
      .def_property_readonly("cells", &Grid::cells)
      .def_property_readonly("spacing", &Grid::spacing)
      .def_property_readonly("e_count", &Grid::e_count)
      .def_property_readonly("h_count", &Grid::h_count)
      .def_property_readonly("size", &Grid::size)
      .def(
          "curl0",
          [](const Grid& g) { return SparseMatrix(assemble_curl0(g).matrix()); },
          "Edge-to-face curl as a scipy.sparse matrix (rows: H faces, columns: E edges).")
      .def(
          "block_operator",
          [](const Grid& g) { return SparseMatrix(assemble_A(g).assemble().matrix()); },
          "The skew block operator [[0, -C^T], [C, 0]] on the combined space.")
      .def(
          "gradient",
          [](const Grid& g) { return SparseMatrix(assemble_gradient(g).matrix()); },
          "Node-to-edge difference on the free nodes.")
      .def(
          "structure_checks",
          [](const Grid& g, std::uint64_t seed, std::size_t samples) {
            return to_python(study_structure_checks(g, seed, samples).to_json(false));
          },
          py::arg("seed") = 42, py::arg("samples") = 10);

  m.def(
      "build_grid",
      [](std::array<int, 3> cells, double spacing, std::vector<std::string> sides) {
        return build_grid(cells, spacing, split_from(sides));
      },
      py::arg("cells"), py::arg("spacing"), py::arg("sides") = std::vector<std::string>{"electric"},
      "Full-box grid; sides is one label or six labels ordered -x, +x, -y, +y, -z, +z.");

  py::class_<Scenario>(m, "Scenario")
      .def_static("load", &Scenario::load, py::arg("path"))
      .def_static("from_json", &Scenario::from_json, py::arg("text"))
      .def_property_readonly("grid", &Scenario::grid, py::return_value_policy::reference_internal)
      .def_property_readonly("study_kind", &Scenario::study_kind)
      .def_property_readonly("rho", [](const Scenario& s) { return s.study().rho; })
      .def_property_readonly("tau", [](const Scenario& s) { return s.study().tau; })
      .def_property_readonly("T", [](const Scenario& s) { return s.study().T; })
      .def_property_readonly("digest", &Scenario::digest)
      .def("wellposedness_constant", &Scenario::wellposedness, py::arg("s"), py::arg("rho") = py::none())
      .def("run_study", &Scenario::run, py::arg("name"), py::arg("seed") = py::none(),
           py::arg("timing") = false, "Runs a study and returns the report as a dict.")
      .def("solve", &Scenario::solve, py::arg("s"),
           "Solves for family member s; returns an (steps, 3) array of time, |E| and |H|.");

  m.def("study_names", &study_names);
  m.def("discrete_rho", &discrete_rho, py::arg("rho"), py::arg("tau"));
  m.def(
      "fit_line",
      [](const std::vector<double>& x, const std::vector<double>& y, double confidence) {
        const auto f = fit_line(x, y, confidence);
        py::dict d;
        d["slope"] = f.slope;
        d["intercept"] = f.intercept;
        d["slope_stderr"] = f.slope_stderr;
        d["ci_low"] = f.ci_low;
        d["ci_high"] = f.ci_high;
        return d;
      },
      py::arg("x"), py::arg("y"), py::arg("confidence") = 0.95);
}
