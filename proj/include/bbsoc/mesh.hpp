#pragma once

// Relative error estimate per mesh interval and hp refinement of the domain meshes.

#include <vector>

#include "bbsoc/ocp.hpp"
#include "bbsoc/trajectory.hpp"
#include "bbsoc/transcription.hpp"

namespace bbsoc {

struct MeshLimits {
  int min_order = 3;
  int max_order = kDefaultMaxOrder;
};

struct ErrorEstimate {
  std::vector<std::vector<double>> interval_errors;  ///< per domain, per mesh interval

  double max_error() const;
};

/// For every interval: resample on the next-higher LGR rule, integrate the
/// dynamics from the interval's left end with interpolated controls, and
/// compare with the state interpolant. Errors are scaled by 1 + max|x_i| over
/// the whole solution.
ErrorEstimate estimate_error(const TrajectorySolution& sol, const OcpDefinition& ocp);

/// Raises the order of intervals above `tolerance`, or splits them into
/// equal pieces of `limits.min_order` when the order would exceed the cap.
/// Interface variables are untouched.
DomainPartition refine(const DomainPartition& partition, const ErrorEstimate& estimate, double tolerance,
                       const MeshLimits& limits = {});

/// Order increment ceil(log(e / tol) / log(N)), at least 1.
int order_increment(double error, double tolerance, int order);

}  // namespace bbsoc
