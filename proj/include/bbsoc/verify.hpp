#pragma once

// Reference checks for the built-in benchmarks: published optimal costs and
// switch times, structural expectations and analytic singular-arc relations.

#include <string>
#include <string_view>
#include <vector>

#include "bbsoc/driver.hpp"

namespace bbsoc {

struct AcceptanceCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct AcceptanceResult {
  SolveReport report;
  std::vector<AcceptanceCheck> checks;

  bool passed() const;
};

bool has_acceptance_checks(std::string_view problem);

/// Wall-clock budget of a benchmark in seconds.
double acceptance_budget(std::string_view problem);

/// Checks `report` against the benchmark named in `report.problem`.
/// Throws ErrorCode::kNotFound for problems without reference data.
std::vector<AcceptanceCheck> acceptance_checks(const SolveReport& report);

/// Solves the built-in problem with `options` and checks the result.
AcceptanceResult run_acceptance(std::string_view problem, const SolverOptions& options = {});

/// Largest relative Goddard singular-surface residual over collocation points
/// strictly inside singular domains; negative when there is no such point.
double goddard_surface_residual(const SolveReport& report);

/// Largest |u - x1| over collocation points strictly inside singular domains;
/// negative when there is no such point.
double jacobson_singular_gap(const SolveReport& report);

}  // namespace bbsoc
