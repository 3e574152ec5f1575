#include "bbsoc/transcription.hpp"

#include <algorithm>
#include <cmath>

#include "bbsoc/error.hpp"

namespace bbsoc {

const char* to_string(ControlArc arc) {
  switch (arc) {
    case ControlArc::kRegular:
      return "regular";
    case ControlArc::kBangMin:
      return "bang-min";
    case ControlArc::kBangMax:
      return "bang-max";
    case ControlArc::kSingular:
      return "singular";
  }
  return "unknown";
}

const char* to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::kRegular:
      return "regular";
    case DomainKind::kBang:
      return "bang";
    case DomainKind::kSingular:
      return "singular";
  }
  return "unknown";
}

DomainKind DomainSpec::kind() const {
  bool pinned = false;
  for (ControlArc a : arcs) {
    if (a == ControlArc::kSingular) return DomainKind::kSingular;
    if (a == ControlArc::kBangMin || a == ControlArc::kBangMax) pinned = true;
  }
  return pinned ? DomainKind::kBang : DomainKind::kRegular;
}

DomainPartition DomainPartition::single(const OcpDefinition& ocp, const MeshLayout& mesh) {
  DomainPartition p;
  p.interfaces = {ocp.t0.value, ocp.tf.value};
  p.lower = {ocp.t0.free ? ocp.t0.lower : ocp.t0.value, ocp.tf.free ? ocp.tf.lower : ocp.tf.value};
  p.upper = {ocp.t0.free ? ocp.t0.upper : ocp.t0.value, ocp.tf.free ? ocp.tf.upper : ocp.tf.value};
  DomainSpec spec;
  spec.arcs.assign(static_cast<std::size_t>(ocp.n_u), ControlArc::kRegular);
  spec.mesh = mesh;
  p.domains.push_back(std::move(spec));
  return p;
}

void DomainPartition::validate(int n_u) const {
  const std::size_t d = domains.size();
  if (d == 0) throw Error(ErrorCode::kInvalidArgument, "partition has no domains");
  if (interfaces.size() != d + 1 || lower.size() != d + 1 || upper.size() != d + 1) {
    throw Error(ErrorCode::kDimensionMismatch, "partition: interface arrays need D+1 entries");
  }
  for (std::size_t k = 0; k <= d; ++k) {
    if (!(lower[k] <= interfaces[k] && interfaces[k] <= upper[k])) {
      throw Error(ErrorCode::kInvalidArgument, "partition: interface guess outside its bounds");
    }
    if (k + 1 <= d && !(interfaces[k + 1] > interfaces[k])) {
      throw Error(ErrorCode::kDegenerateDomain, "partition: interface guesses must increase");
    }
  }
  for (std::size_t k = 0; k + 1 <= d; ++k) {
    if (upper[k] > lower[k + 1]) throw Error(ErrorCode::kInvalidArgument, "partition: interface bounds overlap");
  }
  for (const DomainSpec& s : domains) {
    if (static_cast<int>(s.arcs.size()) != n_u) {
      throw Error(ErrorCode::kDimensionMismatch, "partition: one arc per control component required");
    }
    s.mesh.validate();
  }
}

GuessFunction default_guess(const OcpDefinition& ocp) {
  return [ocp](double t, int, std::span<double> x, std::span<double> u) {
    const double span = ocp.tf.value - ocp.t0.value;
    const double frac = span > 0.0 ? std::clamp((t - ocp.t0.value) / span, 0.0, 1.0) : 0.0;
    for (int i = 0; i < ocp.n_x; ++i) {
      const auto& a = ocp.initial_state[i];
      const auto& b = ocp.final_state[i];
      if (a && b) {
        x[i] = *a + frac * (*b - *a);
      } else if (a) {
        x[i] = *a;
      } else if (b) {
        x[i] = *b;
      } else if (!ocp.state_guess.empty() && ocp.state_guess[i]) {
        x[i] = *ocp.state_guess[i];
      } else {
        x[i] = 0.0;
      }
    }
    for (int j = 0; j < ocp.n_u; ++j) {
      if (!ocp.control_guess.empty()) {
        u[j] = ocp.control_guess[j];
      } else if (std::isfinite(ocp.u_min[j]) && std::isfinite(ocp.u_max[j])) {
        u[j] = 0.5 * (ocp.u_min[j] + ocp.u_max[j]);
      } else {
        u[j] = std::clamp(0.0, ocp.u_min[j], ocp.u_max[j]);
      }
    }
  };
}

GuessFunction interpolating_guess(const TrajectorySolution& previous) {
  return [previous](double t, int, std::span<double> x, std::span<double> u) {
    previous.state_at(t, x);
    previous.control_at(t, previous.domain_of(t), u);
  };
}

CollocationNlp::CollocationNlp(OcpDefinition ocp, DomainPartition partition,
                               std::optional<RegularizationTerms> reg, GuessFunction guess)
    : ocp_(std::move(ocp)), partition_(std::move(partition)), reg_(std::move(reg)) {
  ocp_.validate();
  partition_.validate(ocp_.n_u);
  const int nd = partition_.num_domains();
  for (const DomainSpec& s : partition_.domains) {
    for (int j = 0; j < ocp_.n_u; ++j) {
      const ControlArc a = s.arcs[j];
      if ((a == ControlArc::kBangMin && !std::isfinite(ocp_.u_min[j])) ||
          (a == ControlArc::kBangMax && !std::isfinite(ocp_.u_max[j]))) {
        throw Error(ErrorCode::kInvalidArgument, "bang pin outside the control bounds");
      }
    }
  }
  if (reg_) {
    if (!(reg_->epsilon > 0.0)) throw Error(ErrorCode::kInvalidWeight, "regularization weight must be > 0");
    if (!reg_->alpha.empty() && static_cast<int>(reg_->alpha.size()) != nd) {
      throw Error(ErrorCode::kDimensionMismatch, "regularization targets need one entry per domain");
    }
  }
  point_offset_.resize(static_cast<std::size_t>(nd));
  for (int d = 0; d < nd; ++d) {
    grids_.push_back(build_domain_grid(partition_.domains[d].mesh));
    point_offset_[d] = num_points_;
    num_points_ += grids_.back().num_points();
  }
  control_base_ = (num_points_ + 1) * ocp_.n_x;
  time_base_ = control_base_ + num_points_ * ocp_.n_u;
  n_var_ = time_base_ + nd + 1;
  n_con_ = num_points_ * ocp_.n_x + ocp_.n_b;
  build_patterns();
  build_bounds_and_guess(guess ? guess : default_guess(ocp_));
}

void CollocationNlp::point_variables(int d, int l, std::vector<int>& idx) const {
  idx.clear();
  const int q = point_offset_[d] + l;
  for (int i = 0; i < ocp_.n_x; ++i) idx.push_back(state_index(q, i));
  for (int j = 0; j < ocp_.n_u; ++j) idx.push_back(control_index(q, j));
  idx.push_back(time_index(d));
  idx.push_back(time_index(d + 1));
}

namespace {

std::vector<int> endpoint_variables(const CollocationNlp& nlp) {
  const int nx = nlp.ocp().n_x;
  std::vector<int> idx;
  for (int i = 0; i < nx; ++i) idx.push_back(nlp.state_index(0, i));
  idx.push_back(nlp.time_index(0));
  for (int i = 0; i < nx; ++i) idx.push_back(nlp.state_index(nlp.num_collocation_points(), i));
  idx.push_back(nlp.time_index(nlp.num_domains()));
  return idx;
}

bool has_endpoint_terms(const OcpDefinition& ocp) { return ocp.has_mayer || ocp.n_b > 0; }

}  // namespace

void CollocationNlp::build_patterns() {
  const int nx = ocp_.n_x;
  std::vector<int> idx;
  for (int d = 0; d < num_domains(); ++d) {
    const DomainGrid& g = grids_[d];
    for (int l = 0; l < g.num_points(); ++l) {
      const int q = point_offset_[d] + l;
      const int k = g.interval_of_point[l];
      const int first = g.interval_offset[k];
      const int cols = g.interval_diff[k].cols;
      point_variables(d, l, idx);
      for (int i = 0; i < nx; ++i) {
        const int row = q * nx + i;
        for (int j = 0; j < cols; ++j) {
          jac_pattern_.rows.push_back(row);
          jac_pattern_.cols.push_back(state_index(point_offset_[d] + first + j, i));
        }
        for (int v : idx) {
          jac_pattern_.rows.push_back(row);
          jac_pattern_.cols.push_back(v);
        }
      }
      for (std::size_t a = 0; a < idx.size(); ++a) {
        for (std::size_t b = 0; b <= a; ++b) {
          hess_pattern_.rows.push_back(std::max(idx[a], idx[b]));
          hess_pattern_.cols.push_back(std::min(idx[a], idx[b]));
        }
      }
    }
  }
  const std::vector<int> ep = endpoint_variables(*this);
  for (int r = 0; r < ocp_.n_b; ++r) {
    for (int v : ep) {
      jac_pattern_.rows.push_back(num_defects() + r);
      jac_pattern_.cols.push_back(v);
    }
  }
  if (has_endpoint_terms(ocp_)) {
    for (std::size_t a = 0; a < ep.size(); ++a) {
      for (std::size_t b = 0; b <= a; ++b) {
        hess_pattern_.rows.push_back(std::max(ep[a], ep[b]));
        hess_pattern_.cols.push_back(std::min(ep[a], ep[b]));
      }
    }
  }
}

void CollocationNlp::build_bounds_and_guess(const GuessFunction& guess) {
  const int nx = ocp_.n_x;
  const int nu = ocp_.n_u;
  const int nd = num_domains();
  lo_.assign(static_cast<std::size_t>(n_var_), -kInfinity);
  hi_.assign(static_cast<std::size_t>(n_var_), kInfinity);
  x0_.assign(static_cast<std::size_t>(n_var_), 0.0);
  scaling_.assign(static_cast<std::size_t>(n_var_), 1.0);

  for (int p = 0; p <= num_points_; ++p) {
    for (int i = 0; i < nx; ++i) {
      const int v = state_index(p, i);
      if (!ocp_.x_min.empty()) lo_[v] = ocp_.x_min[i];
      if (!ocp_.x_max.empty()) hi_[v] = ocp_.x_max[i];
      if (!ocp_.state_scale.empty()) scaling_[v] = ocp_.state_scale[i];
    }
  }
  for (int i = 0; i < nx; ++i) {
    if (ocp_.initial_state[i]) lo_[state_index(0, i)] = hi_[state_index(0, i)] = *ocp_.initial_state[i];
    if (ocp_.final_state[i]) {
      lo_[state_index(num_points_, i)] = hi_[state_index(num_points_, i)] = *ocp_.final_state[i];
    }
  }
  for (int d = 0; d < nd; ++d) {
    const DomainSpec& spec = partition_.domains[d];
    for (int l = 0; l < grids_[d].num_points(); ++l) {
      const int q = point_offset_[d] + l;
      for (int j = 0; j < nu; ++j) {
        const int v = control_index(q, j);
        lo_[v] = ocp_.u_min[j];
        hi_[v] = ocp_.u_max[j];
        if (spec.arcs[j] == ControlArc::kBangMin) hi_[v] = ocp_.u_min[j];
        if (spec.arcs[j] == ControlArc::kBangMax) lo_[v] = ocp_.u_max[j];
        if (!ocp_.control_scale.empty()) {
          scaling_[v] = ocp_.control_scale[j];
        } else if (std::isfinite(ocp_.u_min[j]) && std::isfinite(ocp_.u_max[j]) && ocp_.u_max[j] > ocp_.u_min[j]) {
          scaling_[v] = 0.5 * (ocp_.u_max[j] - ocp_.u_min[j]);
        }
      }
    }
  }
  for (int k = 0; k <= nd; ++k) {
    lo_[time_index(k)] = partition_.lower[k];
    hi_[time_index(k)] = partition_.upper[k];
    x0_[time_index(k)] = partition_.interfaces[k];
  }

  std::vector<double> xg(static_cast<std::size_t>(nx));
  std::vector<double> ug(static_cast<std::size_t>(nu));
  for (int d = 0; d < nd; ++d) {
    const DomainGrid& g = grids_[d];
    const double ta = partition_.interfaces[d];
    const double tb = partition_.interfaces[d + 1];
    const int last = d + 1 == nd ? g.num_points() : g.num_points() - 1;
    for (int l = 0; l <= last; ++l) {
      const double t = affine_map(g.tau[l], ta, tb);
      guess(t, d, xg, ug);
      const int p = point_offset_[d] + l;
      for (int i = 0; i < nx; ++i) x0_[state_index(p, i)] = xg[i];
      if (l < g.num_points()) {
        for (int j = 0; j < nu; ++j) x0_[control_index(p, j)] = ug[j];
      }
    }
  }
  for (int v = 0; v < n_var_; ++v) {
    if (!std::isfinite(x0_[v])) x0_[v] = 0.0;
    x0_[v] = std::clamp(x0_[v], lo_[v], hi_[v]);
  }
}

void CollocationNlp::bounds(std::span<double> lo, std::span<double> hi) const {
  std::copy(lo_.begin(), lo_.end(), lo.begin());
  std::copy(hi_.begin(), hi_.end(), hi.begin());
}

template <class T>
T CollocationNlp::point_lagrangian(int d, int l, std::span<const T> z, double obj_factor,
                                   std::span<const double> y, bool with_dynamics) const {
  const int nx = ocp_.n_x;
  const int nu = ocp_.n_u;
  const std::span<const T> x = z.subspan(0, static_cast<std::size_t>(nx));
  const std::span<const T> u = z.subspan(static_cast<std::size_t>(nx), static_cast<std::size_t>(nu));
  const T& ta = z[nx + nu];
  const T& tb = z[nx + nu + 1];
  const DomainGrid& g = grids_[d];
  const double tau = g.tau[l];
  const double w = g.weights[l];
  const T s = 0.5 * (tb - ta);
  const T t = ta * (0.5 * (1.0 - tau)) + tb * (0.5 * (1.0 + tau));
  T result(0.0);
  if (obj_factor != 0.0) {
    T running(0.0);
    if (ocp_.has_lagrange) running = ocp_.functions->lagrange(x, u, t);
    if (reg_) {
      const DomainSpec& spec = partition_.domains[d];
      for (int j = 0; j < nu; ++j) {
        if (spec.arcs[j] != ControlArc::kSingular) continue;
        T target(0.0);
        if (!reg_->alpha.empty() && reg_->alpha[d].size() > static_cast<std::size_t>(j) && reg_->alpha[d][j]) {
          target = (*reg_->alpha[d][j])(t);
        }
        const T e = u[j] - target;
        running += (0.5 * reg_->epsilon) * e * e;
      }
    }
    result = running * s * (w * obj_factor);
  }
  if (with_dynamics) {
    std::vector<T> a(static_cast<std::size_t>(nx));
    ocp_.functions->dynamics(x, u, t, std::span<T>(a));
    const int q = point_offset_[d] + l;
    T dyn(0.0);
    for (int i = 0; i < nx; ++i) dyn += a[i] * y[q * nx + i];
    result -= dyn * s;
  }
  return result;
}

double CollocationNlp::objective(std::span<const double> x) const {
  return cost(x) + [&] {
    double sum = 0.0;
    for (double p : penalties(x)) sum += p;
    return sum;
  }();
}

double CollocationNlp::cost(std::span<const double> x) const {
  const int nx = ocp_.n_x;
  const int nu = ocp_.n_u;
  double total = 0.0;
  if (ocp_.has_mayer) {
    const std::vector<int> ep = endpoint_variables(*this);
    std::vector<double> e(ep.size());
    for (std::size_t k = 0; k < ep.size(); ++k) e[k] = x[ep[k]];
    total += ocp_.functions->mayer(std::span<const double>(e.data(), nx), e[nx],
                                   std::span<const double>(e.data() + nx + 1, nx), e[2 * nx + 1]);
  }
  if (ocp_.has_lagrange) {
    for (int d = 0; d < num_domains(); ++d) {
      const DomainGrid& g = grids_[d];
      const double ta = x[time_index(d)];
      const double tb = x[time_index(d + 1)];
      const double s = 0.5 * (tb - ta);
      for (int l = 0; l < g.num_points(); ++l) {
        const int q = point_offset_[d] + l;
        const double t = ta * 0.5 * (1.0 - g.tau[l]) + tb * 0.5 * (1.0 + g.tau[l]);
        total += s * g.weights[l] *
                 ocp_.functions->lagrange(x.subspan(static_cast<std::size_t>(state_index(q, 0)), nx),
                                          x.subspan(static_cast<std::size_t>(control_index(q, 0)), nu), t);
      }
    }
  }
  return total;
}

std::vector<double> CollocationNlp::penalties(std::span<const double> x) const {
  std::vector<double> out(static_cast<std::size_t>(num_domains()), 0.0);
  if (!reg_) return out;
  for (int d = 0; d < num_domains(); ++d) {
    const DomainSpec& spec = partition_.domains[d];
    const DomainGrid& g = grids_[d];
    const double ta = x[time_index(d)];
    const double tb = x[time_index(d + 1)];
    std::vector<double> times(static_cast<std::size_t>(g.num_points()));
    for (int l = 0; l < g.num_points(); ++l) {
      times[l] = ta * 0.5 * (1.0 - g.tau[l]) + tb * 0.5 * (1.0 + g.tau[l]);
    }
    for (int j = 0; j < ocp_.n_u; ++j) {
      if (spec.arcs[j] != ControlArc::kSingular) continue;
      std::vector<double> u(static_cast<std::size_t>(g.num_points()));
      for (int l = 0; l < g.num_points(); ++l) u[l] = x[control_index(point_offset_[d] + l, j)];
      const MonotoneCubicSpline* alpha = nullptr;
      if (!reg_->alpha.empty() && reg_->alpha[d].size() > static_cast<std::size_t>(j) && reg_->alpha[d][j]) {
        alpha = &*reg_->alpha[d][j];
      }
      out[d] += penalty_value(u, times, g.weights, alpha, reg_->epsilon, tb - ta);
    }
  }
  return out;
}

void CollocationNlp::gradient(std::span<const double> x, std::span<double> grad) const {
  std::fill(grad.begin(), grad.end(), 0.0);
  const bool running = ocp_.has_lagrange || reg_.has_value();
  std::vector<int> idx;
  std::vector<PointDual> z;
  if (running) {
    for (int d = 0; d < num_domains(); ++d) {
      for (int l = 0; l < grids_[d].num_points(); ++l) {
        point_variables(d, l, idx);
        z.assign(idx.size(), PointDual(0.0));
        for (std::size_t k = 0; k < idx.size(); ++k) z[k] = ad::variable<PointDual>(x[idx[k]], static_cast<int>(k));
        const PointDual f = point_lagrangian<PointDual>(d, l, z, 1.0, {}, false);
        for (std::size_t k = 0; k < idx.size(); ++k) grad[idx[k]] += f.d[k];
      }
    }
  }
  if (ocp_.has_mayer) {
    const int nx = ocp_.n_x;
    const std::vector<int> ep = endpoint_variables(*this);
    std::vector<EndpointDual> e(ep.size());
    for (std::size_t k = 0; k < ep.size(); ++k) e[k] = ad::variable<EndpointDual>(x[ep[k]], static_cast<int>(k));
    const EndpointDual m = ocp_.functions->mayer(std::span<const EndpointDual>(e.data(), nx), e[nx],
                                                 std::span<const EndpointDual>(e.data() + nx + 1, nx),
                                                 e[2 * nx + 1]);
    for (std::size_t k = 0; k < ep.size(); ++k) grad[ep[k]] += m.d[k];
  }
}

void CollocationNlp::constraints(std::span<const double> x, std::span<double> c) const {
  const int nx = ocp_.n_x;
  const int nu = ocp_.n_u;
  std::vector<double> a(static_cast<std::size_t>(nx));
  for (int d = 0; d < num_domains(); ++d) {
    const DomainGrid& g = grids_[d];
    const double ta = x[time_index(d)];
    const double tb = x[time_index(d + 1)];
    const double s = 0.5 * (tb - ta);
    for (int l = 0; l < g.num_points(); ++l) {
      const int q = point_offset_[d] + l;
      const double t = ta * 0.5 * (1.0 - g.tau[l]) + tb * 0.5 * (1.0 + g.tau[l]);
      ocp_.functions->dynamics(x.subspan(static_cast<std::size_t>(state_index(q, 0)), nx),
                               x.subspan(static_cast<std::size_t>(control_index(q, 0)), nu), t,
                               std::span<double>(a));
      const int k = g.interval_of_point[l];
      const int first = g.interval_offset[k];
      const DifferentiationMatrix& dm = g.interval_diff[k];
      const int local = l - first;
      for (int i = 0; i < nx; ++i) {
        double dx = 0.0;
        for (int j = 0; j < dm.cols; ++j) dx += dm(local, j) * x[state_index(point_offset_[d] + first + j, i)];
        c[q * nx + i] = dx - s * a[i];
      }
    }
  }
  if (ocp_.n_b > 0) {
    const std::vector<int> ep = endpoint_variables(*this);
    std::vector<double> e(ep.size());
    for (std::size_t k = 0; k < ep.size(); ++k) e[k] = x[ep[k]];
    ocp_.functions->boundary(std::span<const double>(e.data(), nx), e[nx],
                             std::span<const double>(e.data() + nx + 1, nx), e[2 * nx + 1],
                             c.subspan(static_cast<std::size_t>(num_defects()), ocp_.n_b));
  }
}

void CollocationNlp::jacobian_values(std::span<const double> x, std::span<double> values) const {
  const int nx = ocp_.n_x;
  const int nu = ocp_.n_u;
  std::vector<int> idx;
  std::vector<PointDual> z;
  std::vector<PointDual> a(static_cast<std::size_t>(nx));
  std::size_t e = 0;
  for (int d = 0; d < num_domains(); ++d) {
    const DomainGrid& g = grids_[d];
    for (int l = 0; l < g.num_points(); ++l) {
      point_variables(d, l, idx);
      z.assign(idx.size(), PointDual(0.0));
      for (std::size_t k = 0; k < idx.size(); ++k) z[k] = ad::variable<PointDual>(x[idx[k]], static_cast<int>(k));
      const PointDual& ta = z[nx + nu];
      const PointDual& tb = z[nx + nu + 1];
      const PointDual s = 0.5 * (tb - ta);
      const PointDual t = ta * (0.5 * (1.0 - g.tau[l])) + tb * (0.5 * (1.0 + g.tau[l]));
      ocp_.functions->dynamics(std::span<const PointDual>(z.data(), nx),
                               std::span<const PointDual>(z.data() + nx, nu), t, std::span<PointDual>(a));
      const int k = g.interval_of_point[l];
      const DifferentiationMatrix& dm = g.interval_diff[k];
      const int local = l - g.interval_offset[k];
      for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < dm.cols; ++j) values[e++] = dm(local, j);
        const PointDual term = s * a[i];
        for (std::size_t v = 0; v < idx.size(); ++v) values[e++] = -term.d[v];
      }
    }
  }
  if (ocp_.n_b > 0) {
    const std::vector<int> ep = endpoint_variables(*this);
    std::vector<EndpointDual> ez(ep.size());
    for (std::size_t k = 0; k < ep.size(); ++k) ez[k] = ad::variable<EndpointDual>(x[ep[k]], static_cast<int>(k));
    std::vector<EndpointDual> b(static_cast<std::size_t>(ocp_.n_b));
    ocp_.functions->boundary(std::span<const EndpointDual>(ez.data(), nx), ez[nx],
                             std::span<const EndpointDual>(ez.data() + nx + 1, nx), ez[2 * nx + 1],
                             std::span<EndpointDual>(b));
    for (int r = 0; r < ocp_.n_b; ++r) {
      for (std::size_t k = 0; k < ep.size(); ++k) values[e++] = b[r].d[k];
    }
  }
}

void CollocationNlp::hessian_values(std::span<const double> x, double obj_factor,
                                    std::span<const double> y, std::span<double> values) const {
  const int nx = ocp_.n_x;
  std::vector<int> idx;
  std::vector<PointDual2> z;
  std::size_t e = 0;
  for (int d = 0; d < num_domains(); ++d) {
    for (int l = 0; l < grids_[d].num_points(); ++l) {
      point_variables(d, l, idx);
      z.assign(idx.size(), PointDual2(0.0));
      for (std::size_t k = 0; k < idx.size(); ++k) z[k] = ad::variable<PointDual2>(x[idx[k]], static_cast<int>(k));
      const PointDual2 f = point_lagrangian<PointDual2>(d, l, z, obj_factor, y, true);
      for (std::size_t a = 0; a < idx.size(); ++a) {
        for (std::size_t b = 0; b <= a; ++b) values[e++] = f.d[a].d[b];
      }
    }
  }
  if (has_endpoint_terms(ocp_)) {
    const std::vector<int> ep = endpoint_variables(*this);
    std::vector<EndpointDual2> ez(ep.size());
    for (std::size_t k = 0; k < ep.size(); ++k) ez[k] = ad::variable<EndpointDual2>(x[ep[k]], static_cast<int>(k));
    const std::span<const EndpointDual2> x0(ez.data(), nx);
    const std::span<const EndpointDual2> xf(ez.data() + nx + 1, nx);
    EndpointDual2 f(0.0);
    if (ocp_.has_mayer && obj_factor != 0.0) f = ocp_.functions->mayer(x0, ez[nx], xf, ez[2 * nx + 1]) * obj_factor;
    if (ocp_.n_b > 0) {
      std::vector<EndpointDual2> b(static_cast<std::size_t>(ocp_.n_b));
      ocp_.functions->boundary(x0, ez[nx], xf, ez[2 * nx + 1], std::span<EndpointDual2>(b));
      for (int r = 0; r < ocp_.n_b; ++r) f += b[r] * y[num_defects() + r];
    }
    for (std::size_t a = 0; a < ep.size(); ++a) {
      for (std::size_t b = 0; b <= a; ++b) values[e++] = f.d[a].d[b];
    }
  }
}

std::vector<double> CollocationNlp::pack(const TrajectorySolution& sol) const {
  const int nx = ocp_.n_x;
  const int nu = ocp_.n_u;
  if (sol.n_x != nx || sol.n_u != nu || static_cast<int>(sol.domains.size()) != num_domains()) {
    throw Error(ErrorCode::kDimensionMismatch, "pack: solution does not match the NLP layout");
  }
  std::vector<double> x(static_cast<std::size_t>(n_var_), 0.0);
  for (int d = 0; d < num_domains(); ++d) {
    const DomainTrajectory& dom = sol.domains[d];
    const int n = grids_[d].num_points();
    if (dom.states.rows() != n + 1 || dom.controls.rows() != n) {
      throw Error(ErrorCode::kDimensionMismatch, "pack: domain sample counts differ from the mesh");
    }
    for (int l = 0; l <= n; ++l) {
      for (int i = 0; i < nx; ++i) x[state_index(point_offset_[d] + l, i)] = dom.states(l, i);
    }
    for (int l = 0; l < n; ++l) {
      for (int j = 0; j < nu; ++j) x[control_index(point_offset_[d] + l, j)] = dom.controls(l, j);
    }
    x[time_index(d)] = dom.t_start;
    x[time_index(d + 1)] = dom.t_end;
  }
  return x;
}

TrajectorySolution extract_solution(const CollocationNlp& nlp, std::span<const double> primal) {
  if (static_cast<int>(primal.size()) != nlp.num_variables()) {
    throw Error(ErrorCode::kDimensionMismatch, "extract_solution: primal has wrong length");
  }
  const int nx = nlp.ocp().n_x;
  const int nu = nlp.ocp().n_u;
  TrajectorySolution sol;
  sol.n_x = nx;
  sol.n_u = nu;
  for (int k = 0; k <= nlp.num_domains(); ++k) sol.interfaces.push_back(primal[nlp.time_index(k)]);
  for (int d = 0; d < nlp.num_domains(); ++d) {
    const DomainGrid& g = nlp.grid(d);
    const int n = g.num_points();
    DomainTrajectory dom;
    dom.t_start = sol.interfaces[d];
    dom.t_end = sol.interfaces[d + 1];
    dom.mesh = g.mesh;
    dom.tau = g.tau;
    dom.states.resize(n + 1, nx);
    dom.controls.resize(n, nu);
    for (int l = 0; l <= n; ++l) {
      dom.time.push_back(dom.t_start * 0.5 * (1.0 - g.tau[l]) + dom.t_end * 0.5 * (1.0 + g.tau[l]));
      for (int i = 0; i < nx; ++i) dom.states(l, i) = primal[nlp.state_index(nlp.point_offset(d) + l, i)];
      if (l < n) {
        for (int j = 0; j < nu; ++j) dom.controls(l, j) = primal[nlp.control_index(nlp.point_offset(d) + l, j)];
      }
    }
    dom.time.front() = dom.t_start;
    dom.time.back() = dom.t_end;
    sol.domains.push_back(std::move(dom));
  }
  sol.objective = nlp.cost(primal);
  return sol;
}

std::vector<Eigen::MatrixXd> defect_multipliers(const CollocationNlp& nlp, std::span<const double> y) {
  if (static_cast<int>(y.size()) != nlp.num_constraints()) {
    throw Error(ErrorCode::kDimensionMismatch, "defect_multipliers: wrong multiplier length");
  }
  const int nx = nlp.ocp().n_x;
  std::vector<Eigen::MatrixXd> out;
  for (int d = 0; d < nlp.num_domains(); ++d) {
    const int n = nlp.grid(d).num_points();
    Eigen::MatrixXd lam(n, nx);
    for (int l = 0; l < n; ++l) {
      for (int i = 0; i < nx; ++i) lam(l, i) = -y[(nlp.point_offset(d) + l) * nx + i];
    }
    out.push_back(std::move(lam));
  }
  return out;
}

Eigen::MatrixXd costates_from_multipliers(const DomainGrid& grid, const Eigen::MatrixXd& lambda) {
  const int n = grid.num_points();
  if (lambda.rows() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "costates: multipliers must have one row per collocation point");
  }
  Eigen::MatrixXd out(n + 1, lambda.cols());
  for (int l = 0; l < n; ++l) out.row(l) = lambda.row(l) / grid.weights[l];
  out.row(n).setZero();
  for (int l = 0; l < n; ++l) out.row(n) += grid.diff(l, n) * lambda.row(l);
  return out;
}

void estimate_costates(const CollocationNlp& nlp, std::span<const double> y, TrajectorySolution& sol) {
  const std::vector<Eigen::MatrixXd> lam = defect_multipliers(nlp, y);
  if (sol.domains.size() != lam.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "estimate_costates: solution has a different domain count");
  }
  for (std::size_t d = 0; d < lam.size(); ++d) {
    sol.domains[d].costates = costates_from_multipliers(nlp.grid(static_cast<int>(d)), lam[d]);
  }
}

}  // namespace bbsoc
