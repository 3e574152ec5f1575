#pragma once

// Smooth equality-constrained NLPs with variable bounds:
//
//   minimize f(x)  subject to  c(x) = 0,  lo <= x <= hi.
//
// Multipliers follow the convention L = f + y^T c - z_lo^T (x - lo) + z_hi^T (x - hi).

#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace bbsoc {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Coordinate-format sparsity pattern.
struct SparsityPattern {
  std::vector<int> rows;
  std::vector<int> cols;

  std::size_t size() const { return rows.size(); }
};

class NlpProblem {
 public:
  virtual ~NlpProblem() = default;

  virtual int num_variables() const = 0;
  virtual int num_constraints() const = 0;
  virtual void bounds(std::span<double> lo, std::span<double> hi) const = 0;
  virtual std::vector<double> initial_point() const = 0;

  virtual double objective(std::span<const double> x) const = 0;
  virtual void gradient(std::span<const double> x, std::span<double> grad) const = 0;
  virtual void constraints(std::span<const double> x, std::span<double> c) const = 0;

  virtual SparsityPattern jacobian_pattern() const = 0;
  virtual void jacobian_values(std::span<const double> x, std::span<double> values) const = 0;

  /// Lower triangle (row >= col) of the Lagrangian Hessian.
  virtual SparsityPattern hessian_pattern() const = 0;
  virtual void hessian_values(std::span<const double> x, double obj_factor,
                              std::span<const double> y, std::span<double> values) const = 0;

  /// Typical magnitude of each variable; empty leaves variables unscaled.
  virtual std::vector<double> variable_scaling() const { return {}; }
};

enum class NlpStatus { kConverged, kMaxIterations, kInfeasible, kNumericalFailure };

const char* to_string(NlpStatus status);

struct NlpOptions {
  double tolerance = 1e-8;
  int max_iterations = 3000;
  /// Overrides the problem's initial point when non-empty.
  std::vector<double> initial_point;
  double mu_init = 0.1;
  double bound_push = 1e-2;
  bool automatic_scaling = true;
  int print_level = 0;  ///< 0 silent, 1 summary, 2 per iteration
};

struct NlpSolution {
  std::vector<double> primal;
  std::vector<double> multipliers;  ///< equality multipliers y, length m
  std::vector<double> bound_lower;  ///< z_lo >= 0, length n
  std::vector<double> bound_upper;  ///< z_hi >= 0, length n
  NlpStatus status = NlpStatus::kNumericalFailure;
  double objective = 0.0;
  double kkt_residual = kInfinity;
  double constraint_violation = kInfinity;
  int iterations = 0;
  std::string message;
};

/// First and second derivatives at one point.
struct DerivativeBundle {
  std::vector<double> gradient;
  SparsityPattern jacobian_pattern;
  std::vector<double> jacobian;
  SparsityPattern hessian_pattern;  ///< lower triangle
  std::vector<double> hessian;
};

/// Evaluates all derivatives at `x` with Lagrangian weights (obj_factor, y);
/// an empty `y` means zero multipliers. Throws ErrorCode::kNonDifferentiable
/// when any value is not finite.
DerivativeBundle differentiate(const NlpProblem& nlp, std::span<const double> x,
                               std::span<const double> y = {}, double obj_factor = 1.0);

/// Largest mismatch between analytic derivatives and central differences,
/// measured as |a - fd| / max(1, |fd|) over gradient, Jacobian and Hessian.
struct DerivativeCheck {
  double gradient_error = 0.0;
  double jacobian_error = 0.0;
  double hessian_error = 0.0;
};
DerivativeCheck check_derivatives(const NlpProblem& nlp, std::span<const double> x,
                                  std::span<const double> y, double step = 1e-6);

/// Replaceable solver backend.
class NlpSolver {
 public:
  virtual ~NlpSolver() = default;
  virtual NlpSolution solve(const NlpProblem& nlp, const NlpOptions& options) const = 0;
};

/// Primal-dual interior point method with a filter line search.
class InteriorPointSolver final : public NlpSolver {
 public:
  NlpSolution solve(const NlpProblem& nlp, const NlpOptions& options) const override;
};

/// Solves with the built-in interior point method.
NlpSolution solve_nlp(const NlpProblem& nlp, const NlpOptions& options = {});

}  // namespace bbsoc
