#pragma once

// Multiple-domain LGR transcription of an OcpDefinition into an NlpProblem.
//
// Decision vector layout:
//   states    X[p][i]  for the global state points p = 0..P (domains share endpoints)
//   controls  U[q][j]  for the global collocation points q = 0..P-1
//   times     t_s[0..D]
// Constraints: defects (P * n_x rows, point-major), then general boundary rows.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bbsoc/lgr.hpp"
#include "bbsoc/nlp.hpp"
#include "bbsoc/ocp.hpp"
#include "bbsoc/regularization.hpp"
#include "bbsoc/trajectory.hpp"

namespace bbsoc {

/// Behaviour of one control component on one domain.
enum class ControlArc { kRegular, kBangMin, kBangMax, kSingular };

const char* to_string(ControlArc arc);

enum class DomainKind { kRegular, kBang, kSingular };

const char* to_string(DomainKind kind);

struct DomainSpec {
  std::vector<ControlArc> arcs;  ///< one per control component
  MeshLayout mesh;

  /// Singular if any component is singular, Bang if any is pinned, else Regular.
  DomainKind kind() const;
};

struct DomainPartition {
  std::vector<double> interfaces;  ///< guesses for t_s^[0..D]
  std::vector<double> lower;       ///< bounds on t_s^[0..D]
  std::vector<double> upper;
  std::vector<DomainSpec> domains;

  int num_domains() const { return static_cast<int>(domains.size()); }

  /// One Regular domain spanning the problem's time horizon.
  static DomainPartition single(const OcpDefinition& ocp, const MeshLayout& mesh);

  /// Throws on inconsistent sizes, overlapping interface bounds or bad meshes.
  void validate(int n_u) const;
};

/// Initial values at time t for a point of `domain`.
using GuessFunction = std::function<void(double t, int domain, std::span<double> x, std::span<double> u)>;

/// Straight line between two-sided boundary values, constant from one-sided
/// ones; controls at the supplied guess, mid-bound, or zero.
GuessFunction default_guess(const OcpDefinition& ocp);

/// Interpolates a previous solution (states by Lagrange, controls piecewise linear).
GuessFunction interpolating_guess(const TrajectorySolution& previous);

class CollocationNlp final : public NlpProblem {
 public:
  /// `reg` penalizes the Singular components; null disables regularization.
  CollocationNlp(OcpDefinition ocp, DomainPartition partition,
                 std::optional<RegularizationTerms> reg = std::nullopt, GuessFunction guess = {});

  int num_variables() const override { return n_var_; }
  int num_constraints() const override { return n_con_; }
  void bounds(std::span<double> lo, std::span<double> hi) const override;
  std::vector<double> initial_point() const override { return x0_; }
  double objective(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> grad) const override;
  void constraints(std::span<const double> x, std::span<double> c) const override;
  SparsityPattern jacobian_pattern() const override { return jac_pattern_; }
  void jacobian_values(std::span<const double> x, std::span<double> values) const override;
  SparsityPattern hessian_pattern() const override { return hess_pattern_; }
  void hessian_values(std::span<const double> x, double obj_factor, std::span<const double> y,
                      std::span<double> values) const override;
  std::vector<double> variable_scaling() const override { return scaling_; }

  const OcpDefinition& ocp() const { return ocp_; }
  const DomainPartition& partition() const { return partition_; }
  const std::optional<RegularizationTerms>& regularization() const { return reg_; }
  int num_domains() const { return partition_.num_domains(); }
  const DomainGrid& grid(int d) const { return grids_[d]; }
  /// Global index of the first state point of domain d.
  int point_offset(int d) const { return point_offset_[d]; }
  int num_state_points() const { return num_points_ + 1; }
  int num_collocation_points() const { return num_points_; }
  int num_defects() const { return num_points_ * ocp_.n_x; }

  int state_index(int point, int i) const { return point * ocp_.n_x + i; }
  int control_index(int point, int j) const { return control_base_ + point * ocp_.n_u + j; }
  int time_index(int k) const { return time_base_ + k; }

  /// Bolza cost without the regularization terms.
  double cost(std::span<const double> x) const;
  /// Regularization penalty of each domain (zero outside Singular domains).
  std::vector<double> penalties(std::span<const double> x) const;

  /// Inverse of extract_solution.
  std::vector<double> pack(const TrajectorySolution& sol) const;

 private:
  template <class T>
  T point_lagrangian(int d, int l, std::span<const T> z, double obj_factor,
                     std::span<const double> y, bool with_dynamics) const;
  void point_variables(int d, int l, std::vector<int>& idx) const;
  void build_patterns();
  void build_bounds_and_guess(const GuessFunction& guess);

  OcpDefinition ocp_;
  DomainPartition partition_;
  std::optional<RegularizationTerms> reg_;
  std::vector<DomainGrid> grids_;
  std::vector<int> point_offset_;
  int num_points_ = 0;
  int control_base_ = 0;
  int time_base_ = 0;
  int n_var_ = 0;
  int n_con_ = 0;
  std::vector<double> lo_, hi_, x0_, scaling_;
  SparsityPattern jac_pattern_, hess_pattern_;
};

TrajectorySolution extract_solution(const CollocationNlp& nlp, std::span<const double> primal);

/// Defect multipliers per domain (N^[d] x n_x), in the sign convention that
/// makes lambda = W^{-1} Lambda the costate: Lambda = -y.
std::vector<Eigen::MatrixXd> defect_multipliers(const CollocationNlp& nlp, std::span<const double> y);

/// Costates at the N+1 support points: W^{-1} Lambda at collocation points,
/// (last column of D)^T Lambda at the endpoint.
Eigen::MatrixXd costates_from_multipliers(const DomainGrid& grid, const Eigen::MatrixXd& lambda);

/// Fills `sol.domains[d].costates` from the NLP equality multipliers.
void estimate_costates(const CollocationNlp& nlp, std::span<const double> y, TrajectorySolution& sol);

}  // namespace bbsoc
