#include "bbsoc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "bbsoc/error.hpp"
#include "bbsoc/problems.hpp"

namespace bbsoc {

namespace {

std::string format(const char* fmt, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

AcceptanceCheck near(const std::string& name, double value, double reference, double tolerance) {
  const double gap = std::abs(value - reference);
  return {name, gap <= tolerance, format("%.10g vs reference %.10g", value, reference) + format(" (|diff| %.3g, limit %.3g)", gap, tolerance)};
}

AcceptanceCheck at_most(const std::string& name, double value, double limit) {
  return {name, value <= limit, format("%.4g, limit %.4g", value, limit)};
}

AcceptanceCheck converged(const SolveReport& r) {
  return {"terminated converged", r.termination == Termination::kConverged, to_string(r.termination)};
}

AcceptanceCheck budget(const SolveReport& r) {
  const double limit = acceptance_budget(r.problem);
  return {"runtime budget", r.wall_seconds <= limit, format("%.3g s, limit %.3g s", r.wall_seconds, limit)};
}

void interface_checks(std::vector<AcceptanceCheck>& out, const SolveReport& r, const std::vector<double>& reference,
                      double tolerance) {
  const std::vector<double> ts = r.interface_times();
  if (ts.size() != reference.size()) {
    out.push_back({"interface count", false,
                   std::to_string(ts.size()) + " interfaces, expected " + std::to_string(reference.size())});
    return;
  }
  for (std::size_t k = 0; k < ts.size(); ++k) {
    out.push_back(near("interface t_s" + std::to_string(k + 1), ts[k], reference[k], tolerance));
  }
}

// Calls `visit(domain, row)` for collocation points strictly inside singular domains.
void for_interior_singular_points(const SolveReport& r, const std::function<void(const DomainTrajectory&, int)>& visit) {
  const int nd = std::min(r.partition.num_domains(), static_cast<int>(r.solution.domains.size()));
  for (int d = 0; d < nd; ++d) {
    if (r.partition.domains[d].kind() != DomainKind::kSingular) continue;
    const DomainTrajectory& dom = r.solution.domains[d];
    for (int l = 0; l < dom.num_collocation(); ++l) {
      if (dom.time[l] > dom.t_start && dom.time[l] < dom.t_end) visit(dom, l);
    }
  }
}

std::string count_detail(std::size_t value, std::size_t expected) {
  return std::to_string(value) + " (expected " + std::to_string(expected) + ")";
}

}  // namespace

bool AcceptanceResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const AcceptanceCheck& c) { return c.passed; });
}

bool has_acceptance_checks(std::string_view problem) {
  const std::vector<std::string> names = builtin_problem_names();
  return std::find(names.begin(), names.end(), problem) != names.end();
}

double acceptance_budget(std::string_view problem) {
  if (problem == "robot_arm" || problem == "jacobson") return 60.0;
  if (problem == "goddard_rocket" || problem == "entry_vehicle") return 120.0;
  throw Error(ErrorCode::kNotFound, "no reference data for problem '" + std::string(problem) + "'");
}

double goddard_surface_residual(const SolveReport& r) {
  const GoddardParameters p;
  double worst = -1.0;
  for_interior_singular_points(r, [&](const DomainTrajectory& dom, int l) {
    worst = std::max(worst, goddard_singular_surface_residual(p, dom.states(l, 0), dom.states(l, 1), dom.states(l, 2)));
  });
  return worst;
}

double jacobson_singular_gap(const SolveReport& r) {
  double worst = -1.0;
  for_interior_singular_points(
      r, [&](const DomainTrajectory& dom, int l) { worst = std::max(worst, std::abs(dom.controls(l, 0) - dom.states(l, 0))); });
  return worst;
}

std::vector<AcceptanceCheck> acceptance_checks(const SolveReport& r) {
  std::vector<AcceptanceCheck> out;
  const std::string& name = r.problem;
  acceptance_budget(name);
  out.push_back(converged(r));
  if (name == "robot_arm") {
    out.push_back(near("objective", r.objective, 9.140912, 1e-4));
    interface_checks(out, r, {2.285228, 2.796043, 4.570456, 6.344869, 6.855684}, 5e-4);
    out.push_back({"first-mesh discontinuities", r.discontinuities.size() == 5, count_detail(r.discontinuities.size(), 5)});
  } else if (name == "goddard_rocket") {
    const std::vector<double> ts = r.interface_times();
    if (ts.size() == 2) {
      out.push_back(near("interface t_s1", ts[0], 13.751266, 5e-3));
      out.push_back(near("interface t_s2", ts[1], 21.987362, 5e-3));
    } else {
      out.push_back({"interface count", false, count_detail(ts.size(), 2)});
    }
    out.push_back(near("final time", r.solution.interfaces.empty() ? 0.0 : r.solution.tf(), 42.887912, 1e-3));
    out.push_back(near("objective", r.objective, -18550.87185, 0.01));
    out.push_back(at_most("regularization delta", r.delta, 1e-6));
    out.push_back({"regularization iterations", r.regularization_iterations >= 1 && r.regularization_iterations <= 6,
                   "p = " + std::to_string(r.regularization_iterations) + " (1..6)"});
    const double residual = goddard_surface_residual(r);
    out.push_back(residual < 0.0 ? AcceptanceCheck{"singular surface residual", false, "no singular domain"}
                                 : at_most("singular surface residual", residual, 1e-2));
  } else if (name == "jacobson") {
    const std::vector<double> ts = r.interface_times();
    if (ts.size() == 1) {
      out.push_back(near("interface t_s1", ts[0], 1.41376409, 1e-4));
    } else {
      out.push_back({"interface count", false, count_detail(ts.size(), 1)});
    }
    out.push_back(near("objective", r.objective, 0.37699193, 1e-5));
    const double gap = jacobson_singular_gap(r);
    out.push_back(gap < 0.0 ? AcceptanceCheck{"singular control u = x1", false, "no singular domain"}
                            : at_most("singular control u = x1", gap, 5e-3));
  } else if (name == "entry_vehicle") {
    out.push_back({"no discontinuities", r.discontinuities.empty(), count_detail(r.discontinuities.size(), 0)});
    out.push_back({"single domain", r.partition.num_domains() == 1,
                   std::to_string(r.partition.num_domains()) + " domain(s)"});
    out.push_back({"no regularization", !r.regularized(), "p = " + std::to_string(r.regularization_iterations)});
    out.push_back(near("objective", r.objective, -0.5963, 2e-3));
  }
  out.push_back(budget(r));
  return out;
}

AcceptanceResult run_acceptance(std::string_view problem, const SolverOptions& options) {
  if (!has_acceptance_checks(problem)) {
    throw Error(ErrorCode::kNotFound, "no reference data for problem '" + std::string(problem) + "'");
  }
  AcceptanceResult res;
  res.report = solve_bbsoc(builtin_problem(problem), options);
  res.checks = acceptance_checks(res.report);
  return res;
}

}  // namespace bbsoc
