#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "bbsoc/driver.hpp"
#include "bbsoc/error.hpp"
#include "bbsoc/lgr.hpp"
#include "bbsoc/problem_file.hpp"
#include "bbsoc/problems.hpp"
#include "bbsoc/report.hpp"
#include "bbsoc/structure.hpp"
#include "bbsoc/verify.hpp"

namespace py = pybind11;
using namespace bbsoc;

namespace {

SolverOptions make_options(const py::dict& kw) {
  SolverOptions o;
  for (const auto& item : kw) {
    const std::string key = py::cast<std::string>(item.first);
    const py::handle v = item.second;
    if (key == "nlp_tol") {
      o.nlp_tolerance = py::cast<double>(v);
    } else if (key == "nlp_max_iterations") {
      o.nlp_max_iterations = py::cast<int>(v);
    } else if (key == "mesh_tol") {
      o.mesh_tolerance = py::cast<double>(v);
    } else if (key == "eta") {
      o.jump.eta = py::cast<double>(v);
    } else if (key == "mu") {
      o.jump.mu = py::cast<double>(v);
    } else if (key == "epsilon") {
      o.epsilon = py::cast<double>(v);
    } else if (key == "sigma") {
      o.sigma = py::cast<double>(v);
    } else if (key == "max_iterations") {
      o.max_iterations = py::cast<int>(v);
    } else if (key == "initial_intervals") {
      o.initial_intervals = py::cast<int>(v);
    } else if (key == "initial_order") {
      o.initial_order = py::cast<int>(v);
    } else if (key == "detect_structure") {
      o.detect_structure = py::cast<bool>(v);
    } else {
      throw py::type_error("unknown solver option '" + key + "'");
    }
  }
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bang-bang and singular optimal control by multiple-domain LGR collocation";

  py::register_exception<Error>(m, "BbsocError", PyExc_RuntimeError);

  m.def("builtin_problems", &builtin_problem_names, "Names of the built-in problems.");

  m.def(
      "solve_json",
      [](const std::string& problem, const py::kwargs& kw) {
        const SolverOptions opts = make_options(kw);
        const OcpDefinition ocp = resolve_problem(problem);
        SolveReport r;
        {
          py::gil_scoped_release release;
          r = solve_bbsoc(ocp, opts);
        }
        return report_json(r, opts, -1);
      },
      py::arg("problem"), "Solve a built-in problem or problem file; returns the JSON report.");

  m.def(
      "solve_problem_text_json",
      [](const std::string& text, const py::kwargs& kw) {
        const SolverOptions opts = make_options(kw);
        const OcpDefinition ocp = parse_problem(text);
        SolveReport r;
        {
          py::gil_scoped_release release;
          r = solve_bbsoc(ocp, opts);
        }
        return report_json(r, opts, -1);
      },
      py::arg("text"), "Solve a problem given as JSON text; returns the JSON report.");

  m.def(
      "trajectory_csv",
      [](const std::string& problem, const py::kwargs& kw) {
        const SolverOptions opts = make_options(kw);
        const SolveReport r = solve_bbsoc(resolve_problem(problem), opts);
        std::ostringstream out;
        write_trajectory_csv(out, r.solution);
        return out.str();
      },
      py::arg("problem"), "Solve and return the trajectory as CSV text.");

  m.def(
      "verify",
      [](const std::string& problem) {
        AcceptanceResult r;
        {
          py::gil_scoped_release release;
          r = run_acceptance(problem);
        }
        py::list out;
        for (const AcceptanceCheck& c : r.checks) out.append(py::make_tuple(c.name, c.passed, c.detail));
        return out;
      },
      py::arg("problem"), "Acceptance checks of a built-in benchmark as (name, passed, detail) tuples.");

  m.def(
      "lgr_rule",
      [](int n) {
        const QuadratureRule r = lgr_rule(n);
        return py::make_tuple(r.points, r.weights);
      },
      py::arg("n"), "LGR points and weights on [-1, 1).");

  m.def(
      "differentiation_matrix",
      [](int n) {
        const DifferentiationMatrix d = differentiation_matrix(lgr_rule(n));
        std::vector<std::vector<double>> rows(static_cast<std::size_t>(d.rows));
        for (int i = 0; i < d.rows; ++i) {
          for (int j = 0; j < d.cols; ++j) rows[i].push_back(d(i, j));
        }
        return rows;
      },
      py::arg("n"), "N x (N+1) LGR differentiation matrix as nested lists.");

  m.def(
      "jump_coefficients",
      [](const std::vector<double>& stencil, int order) { return jump_coefficients(stencil, order); },
      py::arg("stencil"), py::arg("order"));
  m.def(
      "minmod", [](const std::vector<double>& values) { return minmod(values); }, py::arg("values"));
}
