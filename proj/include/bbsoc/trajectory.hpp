#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "bbsoc/lgr.hpp"

namespace bbsoc {

/// Solution samples on one domain [t_start, t_end].
struct DomainTrajectory {
  double t_start = 0.0;
  double t_end = 0.0;
  MeshLayout mesh;
  std::vector<double> tau;   ///< N+1 support points in [-1, 1]
  std::vector<double> time;  ///< N+1 times
  Eigen::MatrixXd states;    ///< (N+1) x n_x
  Eigen::MatrixXd controls;  ///< N x n_u, at the collocation points
  Eigen::MatrixXd costates;  ///< (N+1) x n_x; empty until estimated

  int num_collocation() const { return static_cast<int>(controls.rows()); }
};

struct TrajectorySolution {
  int n_x = 0;
  int n_u = 0;
  std::vector<DomainTrajectory> domains;
  std::vector<double> interfaces;  ///< t_s^[0..D]
  double objective = 0.0;          ///< Bolza cost without regularization terms

  double t0() const { return interfaces.front(); }
  double tf() const { return interfaces.back(); }

  /// Index of the domain containing t; ties at interfaces go to the later domain.
  int domain_of(double t) const;

  /// State interpolant (Lagrange within the mesh interval), clamped to [t0, tf].
  void state_at(double t, std::span<double> x) const;
  /// Piecewise-linear control through the collocation samples of `domain`
  /// (constant beyond the last sample).
  void control_at(double t, int domain, std::span<double> u) const;

  /// All collocation samples concatenated across domains.
  struct Samples {
    std::vector<double> time;
    std::vector<int> domain;
    Eigen::MatrixXd states;    ///< samples x n_x
    Eigen::MatrixXd controls;  ///< samples x n_u
    Eigen::MatrixXd costates;  ///< samples x n_x (empty if unavailable)
  };
  Samples collocation_samples() const;
};

}  // namespace bbsoc
