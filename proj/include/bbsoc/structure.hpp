#pragma once

// Control-structure detection on a single-domain solution: jump-function
// edge detection on the controls, switching-function classification of the
// intervals between jumps, and decomposition into a multiple-domain partition.

#include <iosfwd>
#include <span>
#include <vector>

#include "bbsoc/ocp.hpp"
#include "bbsoc/trajectory.hpp"
#include "bbsoc/transcription.hpp"

namespace bbsoc {

struct JumpConfig {
  double eta = 0.1;  ///< detection threshold on the normalized jump
  double mu = 1.5;   ///< bracket safety factor
  std::vector<int> orders{1, 2, 3};

  /// Throws ErrorCode::kInvalidArgument unless eta in [0, 1), mu >= 1 and orders are positive.
  void validate() const;
};

struct ClassificationConfig {
  double zero_fraction = 0.05;      ///< |phi| <= zero_fraction * max|phi| counts as zero
  double singular_share = 0.9;      ///< share of zero samples that makes an interval singular
  double linearity_tolerance = 1e-8;
};

struct Discontinuity {
  double location = 0.0;  ///< domain coordinate tau
  double lower = 0.0;
  double upper = 0.0;
  double magnitude = 0.0;  ///< largest |minmod| among the merged flags
  int component = 0;       ///< control component with the largest flag
};

/// (U - u_min) / (1 + u_max - u_min). Infinite bounds fall back to the sample range.
std::vector<double> normalize_control(std::span<const double> u, double u_min, double u_max);

/// c_j = m! / prod_{i != j} (t_j - t_i) over an (m+1)-point stencil.
/// Throws ErrorCode::kDegenerateStencil on repeated times.
std::vector<double> jump_coefficients(std::span<const double> stencil, int m);

/// Order-m jump estimate at t from the m+1 samples nearest t that keep t interior.
/// Requires t strictly between two samples; throws kDegenerateStencil if q_m vanishes.
double jump_approximation(std::span<const double> times, std::span<const double> values, double t, int m);

/// Smallest value if all positive, largest if all negative, else zero.
double minmod(std::span<const double> values);

/// Minmod jump estimates at the midpoints between consecutive samples.
/// Midpoints where no order has a stencil give zero.
std::vector<double> midpoint_jumps(std::span<const double> times, std::span<const double> values,
                                   const std::vector<int>& orders);

/// Jumps in the controls of a single-domain solution, in that domain's tau
/// coordinate, merged across components and sorted. `scan` selects the
/// components to inspect (empty = all).
std::vector<Discontinuity> detect_discontinuities(const TrajectorySolution& sol, const OcpDefinition& ocp,
                                                  const JumpConfig& config, const std::vector<bool>& scan = {});

/// Switching function and H_uu at every collocation point of a single-domain solution.
struct SwitchingData {
  std::vector<double> tau;
  Eigen::MatrixXd phi;   ///< points x n_u
  Eigen::MatrixXd h_uu;  ///< points x n_u
};

/// Requires costates in `sol`.
SwitchingData switching_data(const TrajectorySolution& sol, const OcpDefinition& ocp);

/// Per component: true when the Hamiltonian is linear in it on every sample.
std::vector<bool> linear_components(const SwitchingData& data, const ClassificationConfig& config = {});

struct ArcEvidence {
  double mean_abs_phi = 0.0;
  double max_abs_phi = 0.0;
  int positive = 0;
  int negative = 0;
  int near_zero = 0;
  double max_abs_huu = 0.0;
};

struct IntervalClassification {
  double tau_a = -1.0;
  double tau_b = 1.0;
  std::vector<ControlArc> arcs;
  std::vector<ArcEvidence> evidence;
};

/// Classifies [-1, b_1], ..., [b_n, +1] per control component.
std::vector<IntervalClassification> classify_intervals(const TrajectorySolution& sol, const OcpDefinition& ocp,
                                                       const std::vector<Discontinuity>& jumps,
                                                       const ClassificationConfig& config = {});

/// Multiple-domain partition from the jumps of a single-domain solution on `current`.
/// Interfaces sit at the jump locations with the brackets as bounds; each
/// domain inherits the part of the old mesh it covers.
DomainPartition decompose(const std::vector<Discontinuity>& jumps,
                          const std::vector<IntervalClassification>& classes, const DomainPartition& current,
                          const TrajectorySolution& sol);

/// Old mesh restricted to [tau_a, tau_b] and stretched to [-1, 1].
MeshLayout restrict_mesh(const MeshLayout& mesh, double tau_a, double tau_b);

/// Per-point structure diagnostics as CSV.
void write_structure_csv(std::ostream& out, const TrajectorySolution& sol, const OcpDefinition& ocp,
                         const JumpConfig& config);

}  // namespace bbsoc
