#pragma once

// The full solve: first-mesh NLP, one-time structure detection and
// decomposition, then alternating regularization updates and mesh refinement
// until the penalty and the mesh error are both small.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bbsoc/mesh.hpp"
#include "bbsoc/nlp.hpp"
#include "bbsoc/regularization.hpp"
#include "bbsoc/structure.hpp"
#include "bbsoc/trajectory.hpp"
#include "bbsoc/transcription.hpp"

namespace bbsoc {

struct SolverOptions {
  double nlp_tolerance = 1e-8;
  int nlp_max_iterations = 3000;
  double mesh_tolerance = 1e-6;
  JumpConfig jump;
  ClassificationConfig classification;
  std::optional<double> epsilon;  ///< unset: the problem's own weight
  double sigma = 1e-6;
  int max_iterations = 25;
  int initial_intervals = 10;
  int initial_order = 4;
  MeshLimits limits;
  bool detect_structure = true;
  /// Widen an interface bracket whose bound is active at the NLP solution.
  bool relax_active_brackets = true;
  /// Receives one line per mesh iteration when set.
  std::function<void(const std::string&)> log;

  /// Throws ErrorCode::kInvalidArgument on non-positive tolerances or limits.
  void validate() const;
};

enum class Termination { kConverged, kStalledRegularization, kMaxIterations, kNlpFailure };

const char* to_string(Termination t);

struct IterationRecord {
  int mesh_iteration = 0;  ///< M, starting at 1
  int p = 0;               ///< regularization iteration, 0 when inactive
  double delta = 0.0;      ///< total penalty at the solution
  double max_error = 0.0;
  int intervals = 0;
  int collocation_points = 0;
  int domains = 1;
  int relaxed_brackets = 0;  ///< interface bounds widened after this solve
  NlpStatus nlp_status = NlpStatus::kConverged;
  int nlp_iterations = 0;
  double objective = 0.0;
  double wall_seconds = 0.0;
};

struct SolveReport {
  std::string problem;
  TrajectorySolution solution;
  DomainPartition partition;
  double objective = 0.0;
  std::vector<IterationRecord> iterations;
  std::vector<Discontinuity> discontinuities;
  std::vector<IntervalClassification> classification;
  std::vector<bool> linear_components;
  Termination termination = Termination::kMaxIterations;
  double epsilon = 0.0;
  double delta = 0.0;
  double max_error = 0.0;
  int regularization_iterations = 0;
  double wall_seconds = 0.0;
  std::string message;
  /// Structure diagnostics CSV of the first mesh, kept for debugging.
  std::string structure_csv;

  std::vector<double> interface_times() const;
  bool regularized() const { return regularization_iterations > 0; }
};

SolveReport solve_bbsoc(const OcpDefinition& ocp, const SolverOptions& opts = {});

/// Widens, by the bracket width, every interior interface bound that the
/// solution touches, without crossing the neighbouring bounds. Returns the
/// number of bounds moved.
int relax_active_brackets(DomainPartition& partition, const TrajectorySolution& sol);

}  // namespace bbsoc
