#include "bbsoc/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "bbsoc/error.hpp"

namespace bbsoc {

namespace {

void check_size(std::size_t got, int want, const char* what) {
  if (static_cast<int>(got) != want) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + ": expected " + std::to_string(want) + ", got " +
                    std::to_string(got));
  }
}

}  // namespace

void OcpDefinition::validate() const {
  if (n_x < 1 || n_u < 0) throw Error(ErrorCode::kInvalidArgument, name + ": invalid dimensions");
  if (!functions) throw Error(ErrorCode::kInvalidArgument, name + ": missing problem functions");
  check_size(u_min.size(), n_u, "u_min");
  check_size(u_max.size(), n_u, "u_max");
  for (int j = 0; j < n_u; ++j) {
    if (u_min[j] > u_max[j]) {
      throw Error(ErrorCode::kInvalidArgument, name + ": control bounds must satisfy u_min <= u_max");
    }
  }
  if (!x_min.empty()) check_size(x_min.size(), n_x, "x_min");
  if (!x_max.empty()) check_size(x_max.size(), n_x, "x_max");
  check_size(initial_state.size(), n_x, "initial_state");
  check_size(final_state.size(), n_x, "final_state");
  if (!state_scale.empty()) check_size(state_scale.size(), n_x, "state_scale");
  if (!control_scale.empty()) check_size(control_scale.size(), n_u, "control_scale");
  if (!control_guess.empty()) check_size(control_guess.size(), n_u, "control_guess");
  if (!state_guess.empty()) check_size(state_guess.size(), n_x, "state_guess");
  if (n_x + n_u + 2 > kPointDirections) {
    throw Error(ErrorCode::kInvalidArgument,
                name + ": n_x + n_u exceeds the supported " + std::to_string(kPointDirections - 2));
  }
  if (2 * n_x + 2 > kEndpointDirections) {
    throw Error(ErrorCode::kInvalidArgument, name + ": too many states for endpoint derivatives");
  }
  if (!(regularization_weight > 0.0)) {
    throw Error(ErrorCode::kInvalidWeight, name + ": regularization weight must be positive");
  }
  auto check_time = [&](const TimeSpec& ts, const char* which) {
    if (ts.free && !(ts.lower < ts.upper)) {
      throw Error(ErrorCode::kInvalidArgument, name + ": empty bounds for free " + which);
    }
  };
  check_time(t0, "t0");
  check_time(tf, "tf");
  if (!tf.free && !t0.free && !(tf.value > t0.value)) {
    throw Error(ErrorCode::kDegenerateDomain, name + ": tf must exceed t0");
  }
}

std::vector<double> OcpDefinition::dynamics(std::span<const double> x,
                                            std::span<const double> u, double t) const {
  check_size(x.size(), n_x, "dynamics state");
  check_size(u.size(), n_u, "dynamics control");
  std::vector<double> out(static_cast<std::size_t>(n_x));
  functions->dynamics(x, u, t, std::span<double>(out));
  return out;
}

double OcpDefinition::lagrange(std::span<const double> x, std::span<const double> u,
                               double t) const {
  check_size(x.size(), n_x, "lagrange state");
  check_size(u.size(), n_u, "lagrange control");
  return functions->lagrange(x, u, t);
}

std::optional<double> OcpDefinition::affine_split_residual(int probes, unsigned seed) const {
  std::vector<double> x(static_cast<std::size_t>(n_x));
  std::vector<double> u(static_cast<std::size_t>(n_u));
  std::vector<double> drift(static_cast<std::size_t>(n_x));
  std::vector<double> input(static_cast<std::size_t>(n_x) * n_u);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    for (int i = 0; i < n_x; ++i) {
      const double lo = x_min.empty() ? -1.0 : x_min[i];
      const double hi = x_max.empty() ? 1.0 : x_max[i];
      const double center = initial_state[i].value_or(final_state[i].value_or(0.0));
      const double width = std::isfinite(hi - lo) ? (hi - lo) : 2.0;
      x[i] = std::isfinite(lo) && std::isfinite(hi) ? lo + width * unit(rng)
                                                    : center + (unit(rng) - 0.5) * width;
    }
    for (int j = 0; j < n_u; ++j) {
      const double lo = std::isfinite(u_min[j]) ? u_min[j] : -1.0;
      const double hi = std::isfinite(u_max[j]) ? u_max[j] : 1.0;
      u[j] = lo + (hi - lo) * unit(rng);
    }
    const double t = t0.value + (tf.value - t0.value) * unit(rng);
    if (!functions->affine_split(x, drift, input)) return std::nullopt;
    const std::vector<double> a = dynamics(x, u, t);
    for (int i = 0; i < n_x; ++i) {
      double rhs = drift[i];
      for (int j = 0; j < n_u; ++j) rhs += input[static_cast<std::size_t>(i) * n_u + j] * u[j];
      const double scale = 1.0 + std::abs(a[i]);
      worst = std::max(worst, std::abs(a[i] - rhs) / scale);
    }
  }
  return worst;
}

double hamiltonian(const OcpDefinition& ocp, std::span<const double> x,
                   std::span<const double> u, std::span<const double> lambda, double t) {
  check_size(lambda.size(), ocp.n_x, "hamiltonian costate");
  const std::vector<double> a = ocp.dynamics(x, u, t);
  double h = ocp.lagrange(x, u, t);
  for (int i = 0; i < ocp.n_x; ++i) h += lambda[i] * a[i];
  return h;
}

ControlSensitivity hamiltonian_control_derivatives(const OcpDefinition& ocp,
                                                   std::span<const double> x,
                                                   std::span<const double> u,
                                                   std::span<const double> lambda, double t) {
  check_size(x.size(), ocp.n_x, "hamiltonian state");
  check_size(u.size(), ocp.n_u, "hamiltonian control");
  check_size(lambda.size(), ocp.n_x, "hamiltonian costate");
  std::vector<PointDual2> xs(x.begin(), x.end());
  std::vector<PointDual2> us(static_cast<std::size_t>(ocp.n_u));
  for (int j = 0; j < ocp.n_u; ++j) us[j] = ad::variable<PointDual2>(u[j], j);
  std::vector<PointDual2> a(static_cast<std::size_t>(ocp.n_x));
  const PointDual2 time(t);
  ocp.functions->dynamics(std::span<const PointDual2>(xs), std::span<const PointDual2>(us), time,
                          std::span<PointDual2>(a));
  PointDual2 h = ocp.functions->lagrange(std::span<const PointDual2>(xs),
                                         std::span<const PointDual2>(us), time);
  for (int i = 0; i < ocp.n_x; ++i) h += a[i] * lambda[i];
  ControlSensitivity s;
  s.h_u.resize(static_cast<std::size_t>(ocp.n_u));
  s.h_uu.resize(static_cast<std::size_t>(ocp.n_u));
  for (int j = 0; j < ocp.n_u; ++j) {
    s.h_u[j] = h.v.d[j];
    s.h_uu[j] = h.d[j].d[j];
  }
  return s;
}

}  // namespace bbsoc
