#include "bbsoc/nlp.hpp"

#include <algorithm>
#include <cmath>

#include "bbsoc/error.hpp"

namespace bbsoc {

const char* to_string(NlpStatus status) {
  switch (status) {
    case NlpStatus::kConverged:
      return "converged";
    case NlpStatus::kMaxIterations:
      return "max-iterations";
    case NlpStatus::kInfeasible:
      return "infeasible";
    case NlpStatus::kNumericalFailure:
      return "numerical-failure";
  }
  return "unknown";
}

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonDifferentiable, std::string("non-finite value in ") + what);
    }
  }
}

}  // namespace

DerivativeBundle differentiate(const NlpProblem& nlp, std::span<const double> x,
                               std::span<const double> y, double obj_factor) {
  const int n = nlp.num_variables();
  const int m = nlp.num_constraints();
  if (static_cast<int>(x.size()) != n) {
    throw Error(ErrorCode::kDimensionMismatch, "differentiate: point has wrong length");
  }
  if (!y.empty() && static_cast<int>(y.size()) != m) {
    throw Error(ErrorCode::kDimensionMismatch, "differentiate: multipliers have wrong length");
  }
  require_finite(x, "evaluation point");
  std::vector<double> y_used(y.begin(), y.end());
  if (y_used.empty()) y_used.assign(static_cast<std::size_t>(m), 0.0);

  DerivativeBundle d;
  d.gradient.resize(static_cast<std::size_t>(n));
  nlp.gradient(x, d.gradient);
  require_finite(d.gradient, "objective gradient");
  d.jacobian_pattern = nlp.jacobian_pattern();
  d.jacobian.resize(d.jacobian_pattern.size());
  nlp.jacobian_values(x, d.jacobian);
  require_finite(d.jacobian, "constraint Jacobian");
  d.hessian_pattern = nlp.hessian_pattern();
  d.hessian.resize(d.hessian_pattern.size());
  nlp.hessian_values(x, obj_factor, y_used, d.hessian);
  require_finite(d.hessian, "Lagrangian Hessian");
  return d;
}

DerivativeCheck check_derivatives(const NlpProblem& nlp, std::span<const double> x,
                                  std::span<const double> y, double step) {
  const int n = nlp.num_variables();
  const int m = nlp.num_constraints();
  const DerivativeBundle d = differentiate(nlp, x, y, 1.0);
  std::vector<double> y_used(y.begin(), y.end());
  if (y_used.empty()) y_used.assign(static_cast<std::size_t>(m), 0.0);

  // Dense reference derivatives by central differences.
  std::vector<double> fd_grad(static_cast<std::size_t>(n));
  std::vector<double> fd_jac(static_cast<std::size_t>(n) * m);
  std::vector<double> fd_hess(static_cast<std::size_t>(n) * n);
  std::vector<double> xp(x.begin(), x.end());
  std::vector<double> cp(static_cast<std::size_t>(m)), cm(static_cast<std::size_t>(m));
  std::vector<double> gp(static_cast<std::size_t>(n)), gm(static_cast<std::size_t>(n));
  std::vector<double> jp(d.jacobian.size()), jm(d.jacobian.size());
  for (int i = 0; i < n; ++i) {
    const double h = step * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + h;
    const double fp = nlp.objective(xp);
    nlp.constraints(xp, cp);
    nlp.gradient(xp, gp);
    nlp.jacobian_values(xp, jp);
    xp[i] = x[i] - h;
    const double fm = nlp.objective(xp);
    nlp.constraints(xp, cm);
    nlp.gradient(xp, gm);
    nlp.jacobian_values(xp, jm);
    xp[i] = x[i];
    fd_grad[i] = (fp - fm) / (2.0 * h);
    for (int j = 0; j < m; ++j) fd_jac[static_cast<std::size_t>(j) * n + i] = (cp[j] - cm[j]) / (2.0 * h);
    // Hessian column i: derivative of grad f + J^T y.
    std::vector<double> col(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) col[k] = (gp[k] - gm[k]) / (2.0 * h);
    for (std::size_t e = 0; e < d.jacobian.size(); ++e) {
      const int r = d.jacobian_pattern.rows[e];
      const int c = d.jacobian_pattern.cols[e];
      col[c] += y_used[r] * (jp[e] - jm[e]) / (2.0 * h);
    }
    for (int k = 0; k < n; ++k) fd_hess[static_cast<std::size_t>(k) * n + i] = col[k];
  }

  auto rel = [](double a, double ref) { return std::abs(a - ref) / std::max(1.0, std::abs(ref)); };
  DerivativeCheck out;
  for (int i = 0; i < n; ++i) out.gradient_error = std::max(out.gradient_error, rel(d.gradient[i], fd_grad[i]));

  std::vector<double> dense(static_cast<std::size_t>(n) * m, 0.0);
  for (std::size_t e = 0; e < d.jacobian.size(); ++e) {
    dense[static_cast<std::size_t>(d.jacobian_pattern.rows[e]) * n + d.jacobian_pattern.cols[e]] +=
        d.jacobian[e];
  }
  for (std::size_t k = 0; k < dense.size(); ++k) out.jacobian_error = std::max(out.jacobian_error, rel(dense[k], fd_jac[k]));

  std::vector<double> hdense(static_cast<std::size_t>(n) * n, 0.0);
  for (std::size_t e = 0; e < d.hessian.size(); ++e) {
    const int r = d.hessian_pattern.rows[e];
    const int c = d.hessian_pattern.cols[e];
    hdense[static_cast<std::size_t>(r) * n + c] += d.hessian[e];
    if (r != c) hdense[static_cast<std::size_t>(c) * n + r] += d.hessian[e];
  }
  for (std::size_t k = 0; k < hdense.size(); ++k) out.hessian_error = std::max(out.hessian_error, rel(hdense[k], fd_hess[k]));
  return out;
}

NlpSolution solve_nlp(const NlpProblem& nlp, const NlpOptions& options) {
  return InteriorPointSolver().solve(nlp, options);
}

}  // namespace bbsoc
