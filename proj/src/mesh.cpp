#include "bbsoc/mesh.hpp"

#include <algorithm>
#include <cmath>

#include "bbsoc/error.hpp"

namespace bbsoc {

double ErrorEstimate::max_error() const {
  double worst = 0.0;
  for (const auto& d : interval_errors) {
    for (double e : d) worst = std::max(worst, e);
  }
  return worst;
}

ErrorEstimate estimate_error(const TrajectorySolution& sol, const OcpDefinition& ocp) {
  const int nx = ocp.n_x;
  const int nu = ocp.n_u;
  std::vector<double> scale(static_cast<std::size_t>(nx), 0.0);
  for (const DomainTrajectory& dom : sol.domains) {
    for (int i = 0; i < nx; ++i) scale[i] = std::max(scale[i], dom.states.col(i).cwiseAbs().maxCoeff());
  }
  for (double& s : scale) s += 1.0;

  ErrorEstimate est;
  std::vector<double> xs(static_cast<std::size_t>(nx));
  std::vector<double> us(static_cast<std::size_t>(nu));
  std::vector<double> a(static_cast<std::size_t>(nx));
  for (const DomainTrajectory& dom : sol.domains) {
    const MeshLayout& mesh = dom.mesh;
    std::vector<double>& errors = est.interval_errors.emplace_back();
    int offset = 0;
    for (int k = 0; k < mesh.num_intervals(); ++k) {
      const int n = mesh.orders[k];
      const QuadratureRule& rule = cached_lgr_rule(n);
      const QuadratureRule& fine = cached_lgr_rule(n + 1);
      const double lo = mesh.breaks[k];
      const double hi = mesh.breaks[k + 1];
      // dt/ds for the local coordinate s in [-1, 1] of this interval.
      const double rate = 0.25 * (dom.t_end - dom.t_start) * (hi - lo);
      const std::vector<double> ctrl_bary = barycentric_weights(rule.points);

      // State interpolant and dynamics at the fine collocation points.
      Eigen::MatrixXd x_fine(n + 2, nx);
      Eigen::MatrixXd a_fine(n + 1, nx);
      std::vector<double> values(static_cast<std::size_t>(n + 1));
      std::vector<double> cvals(static_cast<std::size_t>(n));
      const std::vector<double> fine_support = fine.support();
      for (int l = 0; l < n + 2; ++l) {
        const double s = fine_support[l];
        for (int i = 0; i < nx; ++i) {
          for (int j = 0; j <= n; ++j) values[j] = dom.states(offset + j, i);
          xs[i] = interpolate_state(values, rule, s);
          x_fine(l, i) = xs[i];
        }
        if (l == n + 1) break;
        for (int j = 0; j < nu; ++j) {
          for (int q = 0; q < n; ++q) cvals[q] = dom.controls(offset + q, j);
          us[j] = n == 1 ? cvals[0] : barycentric_interpolate(rule.points, ctrl_bary, cvals, s);
        }
        const double tau = lo + 0.5 * (s + 1.0) * (hi - lo);
        const double t = affine_map(tau, dom.t_start, dom.t_end);
        ocp.functions->dynamics(std::span<const double>(xs), std::span<const double>(us), t, std::span<double>(a));
        for (int i = 0; i < nx; ++i) a_fine(l, i) = a[i];
      }

      // Integrate the degree-n interpolant of the dynamics from s = -1.
      const std::vector<double> fine_bary = barycentric_weights(fine.points);
      const QuadratureRule& quad = cached_lgr_rule(n + 1);
      double worst = 0.0;
      std::vector<double> avals(static_cast<std::size_t>(n + 1));
      for (int l = 1; l < n + 2; ++l) {
        const double end = fine_support[l];
        for (int i = 0; i < nx; ++i) {
          for (int q = 0; q <= n; ++q) avals[q] = a_fine(q, i);
          double integral = 0.0;
          for (int g = 0; g < quad.order; ++g) {
            const double s = affine_map(quad.points[g], -1.0, end);
            integral += quad.weights[g] * barycentric_interpolate(fine.points, fine_bary, avals, s);
          }
          integral *= 0.5 * (end + 1.0);
          const double propagated = x_fine(0, i) + rate * integral;
          worst = std::max(worst, std::abs(propagated - x_fine(l, i)) / scale[i]);
        }
      }
      errors.push_back(worst);
      offset += n;
    }
  }
  return est;
}

int order_increment(double error, double tolerance, int order) {
  if (!(error > tolerance)) return 0;
  const double base = std::log(static_cast<double>(std::max(order, 2)));
  return std::max(1, static_cast<int>(std::ceil(std::log(error / tolerance) / base)));
}

DomainPartition refine(const DomainPartition& partition, const ErrorEstimate& estimate, double tolerance,
                       const MeshLimits& limits) {
  if (!(tolerance > 0.0)) throw Error(ErrorCode::kInvalidArgument, "refine: tolerance must be positive");
  if (limits.min_order < 1 || limits.max_order < limits.min_order) {
    throw Error(ErrorCode::kInvalidArgument, "refine: inconsistent order limits");
  }
  if (estimate.interval_errors.size() != partition.domains.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "refine: estimate does not match the partition");
  }
  DomainPartition out = partition;
  for (std::size_t d = 0; d < partition.domains.size(); ++d) {
    const MeshLayout& mesh = partition.domains[d].mesh;
    const std::vector<double>& err = estimate.interval_errors[d];
    if (static_cast<int>(err.size()) != mesh.num_intervals()) {
      throw Error(ErrorCode::kDimensionMismatch, "refine: one error per interval required");
    }
    MeshLayout next;
    next.breaks.push_back(mesh.breaks.front());
    for (int k = 0; k < mesh.num_intervals(); ++k) {
      const int n = mesh.orders[k];
      const int inc = order_increment(err[k], tolerance, n);
      if (inc == 0 || n + inc <= limits.max_order) {
        next.orders.push_back(n + inc);
        next.breaks.push_back(mesh.breaks[k + 1]);
        continue;
      }
      int pieces = std::max(2, inc);
      // A split must add collocation points.
      pieces = std::max(pieces, n / limits.min_order + 1);
      const double lo = mesh.breaks[k];
      const double width = (mesh.breaks[k + 1] - lo) / pieces;
      for (int p = 1; p <= pieces; ++p) {
        next.orders.push_back(limits.min_order);
        next.breaks.push_back(p == pieces ? mesh.breaks[k + 1] : lo + p * width);
      }
    }
    out.domains[d].mesh = std::move(next);
  }
  return out;
}

}  // namespace bbsoc
