#include "bbsoc/trajectory.hpp"

#include <algorithm>

#include "bbsoc/error.hpp"

namespace bbsoc {

int TrajectorySolution::domain_of(double t) const {
  if (domains.empty()) throw Error(ErrorCode::kInvalidArgument, "empty trajectory");
  for (int d = static_cast<int>(domains.size()) - 1; d > 0; --d) {
    if (t >= domains[d].t_start) return d;
  }
  return 0;
}

void TrajectorySolution::state_at(double t, std::span<double> x) const {
  const int d = domain_of(t);
  const DomainTrajectory& dom = domains[d];
  const double tau = std::clamp(affine_unmap(std::clamp(t, dom.t_start, dom.t_end), dom.t_start, dom.t_end),
                                -1.0, 1.0);
  const MeshLayout& mesh = dom.mesh;
  int k = static_cast<int>(std::upper_bound(mesh.breaks.begin(), mesh.breaks.end(), tau) -
                           mesh.breaks.begin()) - 1;
  k = std::clamp(k, 0, mesh.num_intervals() - 1);
  int offset = 0;
  for (int j = 0; j < k; ++j) offset += mesh.orders[j];
  const QuadratureRule& rule = cached_lgr_rule(mesh.orders[k]);
  const double lo = mesh.breaks[k];
  const double hi = mesh.breaks[k + 1];
  const double local = std::clamp(affine_unmap(tau, lo, hi), -1.0, 1.0);
  std::vector<double> values(static_cast<std::size_t>(rule.order) + 1);
  for (int i = 0; i < n_x; ++i) {
    for (int j = 0; j <= rule.order; ++j) values[j] = dom.states(offset + j, i);
    x[i] = interpolate_state(values, rule, local);
  }
}

void TrajectorySolution::control_at(double t, int domain, std::span<double> u) const {
  const DomainTrajectory& dom = domains.at(static_cast<std::size_t>(domain));
  const int n = dom.num_collocation();
  if (n == 0) {
    std::fill(u.begin(), u.end(), 0.0);
    return;
  }
  const auto first = dom.time.begin();
  const auto last = dom.time.begin() + n;
  const auto it = std::upper_bound(first, last, t);
  const int hi = static_cast<int>(it - first);
  for (int j = 0; j < n_u; ++j) {
    if (hi == 0) {
      u[j] = dom.controls(0, j);
    } else if (hi >= n) {
      u[j] = dom.controls(n - 1, j);
    } else {
      const double ta = dom.time[hi - 1];
      const double tb = dom.time[hi];
      const double w = (t - ta) / (tb - ta);
      u[j] = (1.0 - w) * dom.controls(hi - 1, j) + w * dom.controls(hi, j);
    }
  }
}

TrajectorySolution::Samples TrajectorySolution::collocation_samples() const {
  Samples s;
  int total = 0;
  bool have_costates = true;
  for (const DomainTrajectory& d : domains) {
    total += d.num_collocation();
    have_costates = have_costates && d.costates.rows() > 0;
  }
  s.states.resize(total, n_x);
  s.controls.resize(total, n_u);
  if (have_costates) s.costates.resize(total, n_x);
  int row = 0;
  for (int d = 0; d < static_cast<int>(domains.size()); ++d) {
    const DomainTrajectory& dom = domains[d];
    for (int q = 0; q < dom.num_collocation(); ++q, ++row) {
      s.time.push_back(dom.time[q]);
      s.domain.push_back(d);
      s.states.row(row) = dom.states.row(q);
      s.controls.row(row) = dom.controls.row(q);
      if (have_costates) s.costates.row(row) = dom.costates.row(q);
    }
  }
  return s;
}

}  // namespace bbsoc
