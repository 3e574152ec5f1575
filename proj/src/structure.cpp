#include "bbsoc/structure.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "bbsoc/error.hpp"

namespace bbsoc {

namespace {

const DomainTrajectory& only_domain(const TrajectorySolution& sol) {
  if (sol.domains.size() != 1) {
    throw Error(ErrorCode::kInvalidArgument, "structure detection needs a single-domain solution");
  }
  return sol.domains.front();
}

std::vector<double> collocation_tau(const DomainTrajectory& dom) {
  return std::vector<double>(dom.tau.begin(), dom.tau.begin() + dom.num_collocation());
}

std::vector<double> column(const Eigen::MatrixXd& m, int j) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (int i = 0; i < m.rows(); ++i) out[i] = m(i, j);
  return out;
}

struct Flag {
  double location;
  double lower;
  double upper;
  double magnitude;
  int component;
};

// Flags must be sorted by lower bracket end.
std::vector<Discontinuity> merge_overlapping(const std::vector<Flag>& flags) {
  std::vector<Discontinuity> out;
  double weighted = 0.0;
  double weight = 0.0;
  for (const Flag& f : flags) {
    if (!out.empty() && f.lower < out.back().upper) {
      Discontinuity& d = out.back();
      d.upper = std::max(d.upper, f.upper);
      weighted += f.magnitude * f.location;
      weight += f.magnitude;
      d.location = weighted / weight;
      if (f.magnitude > d.magnitude) d.magnitude = f.magnitude;
      continue;
    }
    out.push_back({f.location, f.lower, f.upper, f.magnitude, f.component});
    weighted = f.magnitude * f.location;
    weight = f.magnitude;
  }
  return out;
}

}  // namespace

void JumpConfig::validate() const {
  if (!(eta >= 0.0 && eta < 1.0)) throw Error(ErrorCode::kInvalidArgument, "eta must lie in [0, 1)");
  if (!(mu >= 1.0)) throw Error(ErrorCode::kInvalidArgument, "mu must be at least 1");
  if (orders.empty()) throw Error(ErrorCode::kInvalidArgument, "no jump orders given");
  for (int m : orders) {
    if (m < 1) throw Error(ErrorCode::kInvalidArgument, "jump orders must be positive");
  }
}

std::vector<double> normalize_control(std::span<const double> u, double u_min, double u_max) {
  if (u_min > u_max) throw Error(ErrorCode::kInvalidArgument, "normalize_control: u_min > u_max");
  if (u.empty()) return {};
  if (!std::isfinite(u_min) || !std::isfinite(u_max)) {
    const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
    u_min = *lo;
    u_max = *hi;
  }
  std::vector<double> out(u.size());
  const double denom = 1.0 + u_max - u_min;
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = (u[i] - u_min) / denom;
  return out;
}

std::vector<double> jump_coefficients(std::span<const double> stencil, int m) {
  if (m < 1 || static_cast<int>(stencil.size()) != m + 1) {
    throw Error(ErrorCode::kInvalidArgument, "jump_coefficients: stencil needs m + 1 times");
  }
  double factorial = 1.0;
  for (int k = 2; k <= m; ++k) factorial *= k;
  std::vector<double> c(stencil.size());
  for (std::size_t j = 0; j < stencil.size(); ++j) {
    double prod = 1.0;
    for (std::size_t i = 0; i < stencil.size(); ++i) {
      if (i == j) continue;
      const double diff = stencil[j] - stencil[i];
      if (diff == 0.0) throw Error(ErrorCode::kDegenerateStencil, "jump_coefficients: repeated stencil time");
      prod *= diff;
    }
    c[j] = factorial / prod;
  }
  return c;
}

double jump_approximation(std::span<const double> times, std::span<const double> values, double t, int m) {
  const int n = static_cast<int>(times.size());
  if (static_cast<int>(values.size()) != n) {
    throw Error(ErrorCode::kDimensionMismatch, "jump_approximation: times and values differ in length");
  }
  if (m < 1 || n < m + 1) throw Error(ErrorCode::kInvalidArgument, "jump_approximation: too few samples");
  const int right = static_cast<int>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
  if (right <= 0 || right >= n || !(times[right - 1] < t)) {
    throw Error(ErrorCode::kInvalidArgument, "jump_approximation: t must lie strictly between samples");
  }
  int lo = right - 1;
  int hi = right;
  while (hi - lo < m) {
    if (lo == 0) {
      ++hi;
    } else if (hi == n - 1) {
      --lo;
    } else if (t - times[lo - 1] <= times[hi + 1] - t) {
      --lo;
    } else {
      ++hi;
    }
  }
  const std::vector<double> c = jump_coefficients(times.subspan(static_cast<std::size_t>(lo), m + 1), m);
  double sum = 0.0;
  double q = 0.0;
  for (int j = 0; j <= m; ++j) {
    sum += c[j] * values[lo + j];
    if (times[lo + j] > t) q += c[j];
  }
  if (q == 0.0 || !std::isfinite(q)) throw Error(ErrorCode::kDegenerateStencil, "jump_approximation: q_m vanishes");
  return sum / q;
}

double minmod(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const bool positive = std::all_of(values.begin(), values.end(), [](double v) { return v > 0.0; });
  if (positive) return *std::min_element(values.begin(), values.end());
  const bool negative = std::all_of(values.begin(), values.end(), [](double v) { return v < 0.0; });
  if (negative) return *std::max_element(values.begin(), values.end());
  return 0.0;
}

std::vector<double> midpoint_jumps(std::span<const double> times, std::span<const double> values,
                                   const std::vector<int>& orders) {
  const int n = static_cast<int>(times.size());
  std::vector<double> out(n > 1 ? static_cast<std::size_t>(n - 1) : 0, 0.0);
  std::vector<double> estimates;
  for (int j = 0; j + 1 < n; ++j) {
    const double mid = 0.5 * (times[j] + times[j + 1]);
    estimates.clear();
    for (int m : orders) {
      if (n < m + 1) continue;
      try {
        estimates.push_back(jump_approximation(times, values, mid, m));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateStencil) throw;
      }
    }
    out[j] = minmod(estimates);
  }
  return out;
}

std::vector<Discontinuity> detect_discontinuities(const TrajectorySolution& sol, const OcpDefinition& ocp,
                                                  const JumpConfig& config, const std::vector<bool>& scan) {
  config.validate();
  const DomainTrajectory& dom = only_domain(sol);
  const std::vector<double> tau = collocation_tau(dom);
  std::vector<Flag> flags;
  for (int j = 0; j < ocp.n_u; ++j) {
    if (!scan.empty() && !scan[j]) continue;
    const std::vector<double> u = normalize_control(column(dom.controls, j), ocp.u_min[j], ocp.u_max[j]);
    const std::vector<double> mm = midpoint_jumps(tau, u, config.orders);
    for (std::size_t k = 0; k < mm.size(); ++k) {
      if (std::abs(mm[k]) < config.eta || mm[k] == 0.0) continue;
      const double mid = 0.5 * (tau[k] + tau[k + 1]);
      flags.push_back({mid, std::max(-1.0, mid - config.mu * (mid - tau[k])),
                       std::min(1.0, mid + config.mu * (tau[k + 1] - mid)), std::abs(mm[k]), j});
    }
  }
  std::sort(flags.begin(), flags.end(), [](const Flag& a, const Flag& b) { return a.lower < b.lower; });
  // Same component: overlapping brackets describe one jump.
  std::vector<std::vector<Flag>> groups(static_cast<std::size_t>(ocp.n_u));
  for (const Flag& f : flags) groups[f.component].push_back(f);
  std::vector<Discontinuity> merged;
  for (const std::vector<Flag>& g : groups) {
    const std::vector<Discontinuity> own = merge_overlapping(g);
    merged.insert(merged.end(), own.begin(), own.end());
  }
  std::sort(merged.begin(), merged.end(),
            [](const Discontinuity& a, const Discontinuity& b) { return a.location < b.location; });
  // Across components only coincident switches share an interface; other
  // overlaps are split halfway between the two locations.
  std::vector<Discontinuity> out;
  std::vector<double> weights;
  for (const Discontinuity& d : merged) {
    if (!out.empty() && d.lower < out.back().upper) {
      Discontinuity& prev = out.back();
      if (d.location <= prev.upper || prev.location >= d.lower) {
        const double w = weights.back() + d.magnitude;
        prev.location = (weights.back() * prev.location + d.magnitude * d.location) / w;
        weights.back() = w;
        prev.lower = std::min(prev.lower, d.lower);
        prev.upper = std::max(prev.upper, d.upper);
        if (d.magnitude > prev.magnitude) {
          prev.magnitude = d.magnitude;
          prev.component = d.component;
        }
        continue;
      }
      const double cut = 0.5 * (prev.location + d.location);
      prev.upper = cut;
      Discontinuity next = d;
      next.lower = cut;
      out.push_back(next);
      weights.push_back(d.magnitude);
      continue;
    }
    out.push_back(d);
    weights.push_back(d.magnitude);
  }
  return out;
}

SwitchingData switching_data(const TrajectorySolution& sol, const OcpDefinition& ocp) {
  const DomainTrajectory& dom = only_domain(sol);
  const int n = dom.num_collocation();
  if (dom.costates.rows() != n + 1 || dom.costates.cols() != ocp.n_x) {
    throw Error(ErrorCode::kDimensionMismatch, "switching_data: costates missing or misshaped");
  }
  SwitchingData data;
  data.tau = collocation_tau(dom);
  data.phi.resize(n, ocp.n_u);
  data.h_uu.resize(n, ocp.n_u);
  std::vector<double> x(static_cast<std::size_t>(ocp.n_x));
  std::vector<double> u(static_cast<std::size_t>(ocp.n_u));
  std::vector<double> lam(static_cast<std::size_t>(ocp.n_x));
  for (int l = 0; l < n; ++l) {
    for (int i = 0; i < ocp.n_x; ++i) {
      x[i] = dom.states(l, i);
      lam[i] = dom.costates(l, i);
    }
    for (int j = 0; j < ocp.n_u; ++j) u[j] = dom.controls(l, j);
    const ControlSensitivity s = hamiltonian_control_derivatives(ocp, x, u, lam, dom.time[l]);
    for (int j = 0; j < ocp.n_u; ++j) {
      data.phi(l, j) = s.h_u[j];
      data.h_uu(l, j) = s.h_uu[j];
    }
  }
  return data;
}

std::vector<bool> linear_components(const SwitchingData& data, const ClassificationConfig& config) {
  std::vector<bool> out(static_cast<std::size_t>(data.phi.cols()), true);
  for (int j = 0; j < data.phi.cols(); ++j) {
    if (data.phi.rows() == 0) continue;
    const double max_phi = data.phi.col(j).cwiseAbs().maxCoeff();
    const double max_huu = data.h_uu.col(j).cwiseAbs().maxCoeff();
    out[j] = max_huu <= config.linearity_tolerance * (1.0 + max_phi);
  }
  return out;
}

std::vector<IntervalClassification> classify_intervals(const TrajectorySolution& sol, const OcpDefinition& ocp,
                                                       const std::vector<Discontinuity>& jumps,
                                                       const ClassificationConfig& config) {
  const SwitchingData data = switching_data(sol, ocp);
  const std::vector<bool> linear = linear_components(data, config);
  const int n = static_cast<int>(data.tau.size());
  const int n_int = static_cast<int>(jumps.size()) + 1;
  std::vector<IntervalClassification> out(static_cast<std::size_t>(n_int));
  for (int i = 0; i < n_int; ++i) {
    IntervalClassification& c = out[i];
    c.tau_a = i == 0 ? -1.0 : jumps[i - 1].location;
    c.tau_b = i + 1 == n_int ? 1.0 : jumps[i].location;
    // Samples inside the brackets are unreliable near a switch.
    const double inner_a = i == 0 ? -std::numeric_limits<double>::infinity() : jumps[i - 1].upper;
    const double inner_b = i + 1 == n_int ? std::numeric_limits<double>::infinity() : jumps[i].lower;
    std::vector<int> samples;
    for (int l = 0; l < n; ++l) {
      if (data.tau[l] >= inner_a && data.tau[l] < inner_b) samples.push_back(l);
    }
    if (samples.empty()) {
      for (int l = 0; l < n; ++l) {
        if (data.tau[l] >= c.tau_a && data.tau[l] < c.tau_b) samples.push_back(l);
      }
    }
    if (samples.empty() && n > 0) {
      const double mid = 0.5 * (c.tau_a + c.tau_b);
      int best = 0;
      for (int l = 1; l < n; ++l) {
        if (std::abs(data.tau[l] - mid) < std::abs(data.tau[best] - mid)) best = l;
      }
      samples.push_back(best);
    }
    for (int j = 0; j < ocp.n_u; ++j) {
      ArcEvidence ev;
      const double scale = n > 0 ? data.phi.col(j).cwiseAbs().maxCoeff() : 0.0;
      const double zero = config.zero_fraction * scale;
      for (int l : samples) {
        const double phi = data.phi(l, j);
        ev.mean_abs_phi += std::abs(phi);
        ev.max_abs_phi = std::max(ev.max_abs_phi, std::abs(phi));
        ev.max_abs_huu = std::max(ev.max_abs_huu, std::abs(data.h_uu(l, j)));
        if (std::abs(phi) <= zero) {
          ++ev.near_zero;
        } else if (phi > 0.0) {
          ++ev.positive;
        } else {
          ++ev.negative;
        }
      }
      if (!samples.empty()) ev.mean_abs_phi /= static_cast<double>(samples.size());
      ControlArc arc = ControlArc::kRegular;
      const double share = samples.empty() ? 0.0 : static_cast<double>(ev.near_zero) / samples.size();
      if (!linear[j]) {
        arc = ControlArc::kRegular;
      } else if (share >= config.singular_share) {
        arc = ControlArc::kSingular;
      } else if (ev.negative == 0) {
        arc = ControlArc::kBangMin;
      } else if (ev.positive == 0) {
        arc = ControlArc::kBangMax;
      }
      c.arcs.push_back(arc);
      c.evidence.push_back(ev);
    }
  }
  return out;
}

MeshLayout restrict_mesh(const MeshLayout& mesh, double tau_a, double tau_b) {
  mesh.validate();
  if (!(tau_b > tau_a) || tau_a < -1.0 || tau_b > 1.0) {
    throw Error(ErrorCode::kDegenerateDomain, "restrict_mesh: empty or out-of-range span");
  }
  const double width = tau_b - tau_a;
  std::vector<int> inside;
  for (int i = 1; i < mesh.num_intervals(); ++i) {
    if (mesh.breaks[i] > tau_a && mesh.breaks[i] < tau_b) inside.push_back(i);
  }
  // End pieces thinner than a tenth of the interval they were cut from are
  // folded into their neighbour.
  if (!inside.empty()) {
    const int i = inside.front();
    if (mesh.breaks[i] - tau_a < 0.1 * (mesh.breaks[i] - mesh.breaks[i - 1])) inside.erase(inside.begin());
  }
  if (!inside.empty()) {
    const int i = inside.back();
    if (tau_b - mesh.breaks[i] < 0.1 * (mesh.breaks[i + 1] - mesh.breaks[i])) inside.pop_back();
  }
  std::vector<double> breaks{tau_a};
  for (int i : inside) breaks.push_back(mesh.breaks[i]);
  breaks.push_back(tau_b);
  MeshLayout out;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    int order = 1;
    for (int i = 0; i < mesh.num_intervals(); ++i) {
      const double lo = std::max(breaks[k], mesh.breaks[i]);
      const double hi = std::min(breaks[k + 1], mesh.breaks[i + 1]);
      if (hi > lo) order = std::max(order, mesh.orders[i]);
    }
    out.orders.push_back(order);
  }
  for (double b : breaks) out.breaks.push_back(-1.0 + 2.0 * (b - tau_a) / width);
  out.breaks.front() = -1.0;
  out.breaks.back() = 1.0;
  return out;
}

DomainPartition decompose(const std::vector<Discontinuity>& jumps,
                          const std::vector<IntervalClassification>& classes, const DomainPartition& current,
                          const TrajectorySolution& sol) {
  if (current.num_domains() != 1) throw Error(ErrorCode::kInvalidArgument, "decompose: expected one domain");
  if (classes.size() != jumps.size() + 1) {
    throw Error(ErrorCode::kDimensionMismatch, "decompose: need one classification per interval");
  }
  const double t0 = sol.t0();
  const double tf = sol.tf();
  const double min_width = 1e-6 * (tf - t0);
  const int nd = static_cast<int>(jumps.size()) + 1;
  DomainPartition p;
  p.interfaces.push_back(t0);
  p.lower.push_back(current.lower.front());
  p.upper.push_back(current.upper.front());
  for (const Discontinuity& d : jumps) {
    p.interfaces.push_back(affine_map(d.location, t0, tf));
    p.lower.push_back(affine_map(d.lower, t0, tf));
    p.upper.push_back(affine_map(d.upper, t0, tf));
  }
  p.interfaces.push_back(tf);
  p.lower.push_back(current.lower.back());
  p.upper.push_back(current.upper.back());

  for (int k = 1; k + 1 < nd; ++k) {
    if (p.upper[k] + min_width > p.lower[k + 1]) {
      const double mid = 0.5 * (p.upper[k] + p.lower[k + 1]);
      p.upper[k] = mid - 0.5 * min_width;
      p.lower[k + 1] = mid + 0.5 * min_width;
    }
  }
  if (nd > 1) {
    if (p.lower[0] == p.upper[0]) {
      p.lower[1] = std::max(p.lower[1], p.upper[0] + min_width);
    } else {
      p.upper[0] = std::min(p.upper[0], p.lower[1] - min_width);
    }
    if (p.lower[nd] == p.upper[nd]) {
      p.upper[nd - 1] = std::min(p.upper[nd - 1], p.lower[nd] - min_width);
    } else {
      p.lower[nd] = std::max(p.lower[nd], p.upper[nd - 1] + min_width);
    }
  }
  for (int k = 0; k <= nd; ++k) {
    if (p.lower[k] > p.upper[k]) throw Error(ErrorCode::kDegenerateDomain, "decompose: bracket collapsed");
    p.interfaces[k] = std::clamp(p.interfaces[k], p.lower[k], p.upper[k]);
  }

  const MeshLayout& mesh = current.domains.front().mesh;
  for (int d = 0; d < nd; ++d) {
    DomainSpec spec;
    spec.arcs = classes[d].arcs;
    const double a = d == 0 ? -1.0 : jumps[d - 1].location;
    const double b = d + 1 == nd ? 1.0 : jumps[d].location;
    spec.mesh = restrict_mesh(mesh, a, b);
    p.domains.push_back(std::move(spec));
  }
  return p;
}

void write_structure_csv(std::ostream& out, const TrajectorySolution& sol, const OcpDefinition& ocp,
                         const JumpConfig& config) {
  const DomainTrajectory& dom = only_domain(sol);
  const std::vector<double> tau = collocation_tau(dom);
  const bool have_costates = dom.costates.rows() == dom.num_collocation() + 1;
  SwitchingData data;
  if (have_costates) data = switching_data(sol, ocp);
  out << std::setprecision(17);
  out << "kind,component,tau,t,u,u_normalized,phi,h_uu,minmod,flagged\n";
  for (int j = 0; j < ocp.n_u; ++j) {
    const std::vector<double> raw = column(dom.controls, j);
    const std::vector<double> u = normalize_control(raw, ocp.u_min[j], ocp.u_max[j]);
    for (std::size_t l = 0; l < tau.size(); ++l) {
      out << "point," << j << ',' << tau[l] << ',' << dom.time[l] << ',' << raw[l] << ',' << u[l] << ',';
      if (have_costates) out << data.phi(static_cast<int>(l), j) << ',' << data.h_uu(static_cast<int>(l), j);
      else out << ',';
      out << ",,\n";
    }
    const std::vector<double> mm = midpoint_jumps(tau, u, config.orders);
    for (std::size_t k = 0; k < mm.size(); ++k) {
      const double mid = 0.5 * (tau[k] + tau[k + 1]);
      out << "midpoint," << j << ',' << mid << ',' << affine_map(mid, dom.t_start, dom.t_end) << ",,,,,"
          << mm[k] << ',' << (std::abs(mm[k]) >= config.eta && mm[k] != 0.0 ? 1 : 0) << '\n';
    }
  }
}

}  // namespace bbsoc
