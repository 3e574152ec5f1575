#include "bbsoc/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bbsoc/error.hpp"

namespace bbsoc {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Minimum-time reorientation of a robotic arm; three independently bounded torques.
struct RobotArm {
  double length = kRobotArmLength;

  template <class T>
  void dynamics(std::span<const T> y, std::span<const T> u, const T& /*t*/,
                std::span<T> out) const {
    const T lmy = length - y[0];
    const T i_phi = (lmy * lmy * lmy + y[0] * y[0] * y[0]) / 3.0;
    const T s5 = ad::sin(y[4]);
    const T i_theta = i_phi * s5 * s5;
    out[0] = y[1];
    out[1] = u[0] / length;
    out[2] = y[3];
    out[3] = u[1] / i_theta;
    out[4] = y[5];
    out[5] = u[2] / i_phi;
  }

  template <class T>
  T mayer(std::span<const T> /*x0*/, const T& /*t0*/, std::span<const T> /*xf*/,
          const T& tf) const {
    return tf;
  }

  void affine(std::span<const double> y, std::span<double> g, std::span<double> h) const {
    const double lmy = length - y[0];
    const double i_phi = (lmy * lmy * lmy + y[0] * y[0] * y[0]) / 3.0;
    const double i_theta = i_phi * std::sin(y[4]) * std::sin(y[4]);
    std::fill(h.begin(), h.end(), 0.0);
    g[0] = y[1];
    g[1] = 0.0;
    g[2] = y[3];
    g[3] = 0.0;
    g[4] = y[5];
    g[5] = 0.0;
    h[1 * 3 + 0] = 1.0 / length;
    h[3 * 3 + 1] = 1.0 / i_theta;
    h[5 * 3 + 2] = 1.0 / i_phi;
  }
};

// Maximum final altitude of a vertically ascending rocket with drag.
struct Goddard {
  GoddardParameters p;

  template <class T>
  void dynamics(std::span<const T> x, std::span<const T> u, const T& /*t*/,
                std::span<T> out) const {
    const T& h = x[0];
    const T& v = x[1];
    const T& m = x[2];
    const T drag = p.drag_coefficient * v * v * ad::exp(-h / p.scale_height);
    out[0] = v;
    out[1] = (u[0] - drag) / m - p.g;
    out[2] = -u[0] / p.exhaust_speed;
  }

  template <class T>
  T mayer(std::span<const T> /*x0*/, const T& /*t0*/, std::span<const T> xf,
          const T& /*tf*/) const {
    return -xf[0];
  }

  void affine(std::span<const double> x, std::span<double> g, std::span<double> h) const {
    const double drag = goddard_drag(p, x[0], x[1]);
    g[0] = x[1];
    g[1] = -drag / x[2] - p.g;
    g[2] = 0.0;
    h[0] = 0.0;
    h[1] = 1.0 / x[2];
    h[2] = -1.0 / p.exhaust_speed;
  }
};

// Double integrator with a quadratic state cost; bang then singular.
struct Jacobson {
  template <class T>
  void dynamics(std::span<const T> x, std::span<const T> u, const T& /*t*/,
                std::span<T> out) const {
    out[0] = x[1];
    out[1] = u[0];
  }

  template <class T>
  T lagrange(std::span<const T> x, std::span<const T> /*u*/, const T& /*t*/) const {
    return 0.5 * (x[0] * x[0] + x[1] * x[1]);
  }

  void affine(std::span<const double> x, std::span<double> g, std::span<double> h) const {
    g[0] = x[1];
    g[1] = 0.0;
    h[0] = 0.0;
    h[1] = 1.0;
  }
};

// Crossrange maximization of a lifting entry vehicle; smooth optimal control.
struct EntryVehicle {
  EntryVehicleParameters p;

  template <class T>
  void dynamics(std::span<const T> x, std::span<const T> u, const T& /*t*/,
                std::span<T> out) const {
    const T& rad = x[0];
    const T& lat = x[2];
    const T& speed = x[3];
    const T& fpa = x[4];
    const T& azi = x[5];
    const T& aoa = u[0];
    const T& bank = u[1];
    const T cd = p.cd0 + p.cd1 * aoa + p.cd2 * aoa * aoa;
    const T cl = p.cl0 + p.cl1 * aoa;
    const T rho = p.rho0 * ad::exp(-(rad - p.earth_radius) / p.scale_height);
    const T q = 0.5 * rho * speed * speed;
    const T drag = q * p.reference_area * cd / p.mass;
    const T lift = q * p.reference_area * cl / p.mass;
    const T gravity = p.mu / (rad * rad);
    const T cfpa = ad::cos(fpa);
    out[0] = speed * ad::sin(fpa);
    out[1] = speed * cfpa * ad::sin(azi) / (rad * ad::cos(lat));
    out[2] = speed * cfpa * ad::cos(azi) / rad;
    out[3] = -drag - gravity * ad::sin(fpa);
    out[4] = (lift * ad::cos(bank) - cfpa * (gravity - speed * speed / rad)) / speed;
    out[5] = (lift * ad::sin(bank) / cfpa + speed * speed * cfpa * ad::sin(azi) * ad::tan(lat) / rad) /
             speed;
  }

  template <class T>
  T mayer(std::span<const T> /*x0*/, const T& /*t0*/, std::span<const T> xf,
          const T& /*tf*/) const {
    return -xf[2];
  }
};

OcpDefinition make_robot_arm() {
  OcpDefinition ocp;
  ocp.name = "robot_arm";
  ocp.n_x = 6;
  ocp.n_u = 3;
  ocp.state_names = {"y1", "y2", "y3", "y4", "y5", "y6"};
  ocp.control_names = {"u1", "u2", "u3"};
  ocp.u_min = {-1.0, -1.0, -1.0};
  ocp.u_max = {1.0, 1.0, 1.0};
  const double pi = std::numbers::pi;
  ocp.initial_state = {4.5, 0.0, 0.0, 0.0, pi / 4.0, 0.0};
  ocp.final_state = {4.5, 0.0, 2.0 * pi / 3.0, 0.0, pi / 4.0, 0.0};
  ocp.t0 = TimeSpec::fixed(0.0);
  ocp.tf = TimeSpec::free_in(10.0, 0.1, 100.0);
  ocp.has_mayer = true;
  ocp.functions = make_ocp_functions(RobotArm{});
  return ocp;
}

OcpDefinition make_goddard() {
  const GoddardParameters p;
  OcpDefinition ocp;
  ocp.name = "goddard_rocket";
  ocp.n_x = 3;
  ocp.n_u = 1;
  ocp.state_names = {"h", "v", "m"};
  ocp.control_names = {"T"};
  ocp.u_min = {0.0};
  ocp.u_max = {p.max_thrust};
  ocp.initial_state = {0.0, 0.0, p.initial_mass};
  ocp.final_state = {std::nullopt, std::nullopt, p.final_mass};
  ocp.t0 = TimeSpec::fixed(0.0);
  ocp.tf = TimeSpec::free_in(50.0, 1.0, 200.0);
  ocp.state_scale = {2.0e4, 1.0e3, 2.0};
  ocp.has_mayer = true;
  ocp.functions = make_ocp_functions(Goddard{p});
  return ocp;
}

OcpDefinition make_jacobson() {
  OcpDefinition ocp;
  ocp.name = "jacobson";
  ocp.n_x = 2;
  ocp.n_u = 1;
  ocp.state_names = {"x1", "x2"};
  ocp.control_names = {"u"};
  ocp.u_min = {-1.0};
  ocp.u_max = {1.0};
  ocp.initial_state = {0.0, 1.0};
  ocp.final_state = {std::nullopt, std::nullopt};
  ocp.t0 = TimeSpec::fixed(0.0);
  ocp.tf = TimeSpec::fixed(5.0);
  ocp.regularization_weight = 1e-8;
  ocp.has_lagrange = true;
  ocp.functions = make_ocp_functions(Jacobson{});
  return ocp;
}

OcpDefinition make_entry_vehicle() {
  const EntryVehicleParameters p;
  OcpDefinition ocp;
  ocp.name = "entry_vehicle";
  ocp.n_x = 6;
  ocp.n_u = 2;
  ocp.state_names = {"rad", "lon", "lat", "speed", "fpa", "azi"};
  ocp.control_names = {"aoa", "bank"};
  ocp.u_min = {-90.0 * kDeg, -90.0 * kDeg};
  ocp.u_max = {90.0 * kDeg, 1.0 * kDeg};
  const double alt0 = 79248.0;
  const double altf = 24384.0;
  ocp.initial_state = {p.earth_radius + alt0, 0.0, 0.0, 7802.88, -1.0 * kDeg, 90.0 * kDeg};
  ocp.final_state = {p.earth_radius + altf, std::nullopt, std::nullopt, 762.0, -5.0 * kDeg,
                     std::nullopt};
  ocp.x_min = {p.earth_radius, -std::numbers::pi, -70.0 * kDeg, 10.0, -80.0 * kDeg,
               -std::numbers::pi};
  ocp.x_max = {p.earth_radius + alt0, std::numbers::pi, 70.0 * kDeg, 45000.0, 80.0 * kDeg,
               std::numbers::pi};
  ocp.state_scale = {1.0e5, 1.0, 1.0, 1.0e4, 1.0, 1.0};
  ocp.t0 = TimeSpec::fixed(0.0);
  ocp.tf = TimeSpec::free_in(1000.0, 100.0, 4000.0);
  ocp.has_mayer = true;
  ocp.functions = make_ocp_functions(EntryVehicle{p});
  return ocp;
}

}  // namespace

std::vector<std::string> builtin_problem_names() {
  return {"robot_arm", "goddard_rocket", "jacobson", "entry_vehicle"};
}

OcpDefinition builtin_problem(std::string_view name) {
  OcpDefinition ocp;
  if (name == "robot_arm") {
    ocp = make_robot_arm();
  } else if (name == "goddard_rocket") {
    ocp = make_goddard();
  } else if (name == "jacobson") {
    ocp = make_jacobson();
  } else if (name == "entry_vehicle") {
    ocp = make_entry_vehicle();
  } else {
    throw Error(ErrorCode::kNotFound, "unknown built-in problem '" + std::string(name) + "'");
  }
  ocp.validate();
  return ocp;
}

double goddard_drag(const GoddardParameters& p, double h, double v) {
  return p.drag_coefficient * v * v * std::exp(-h / p.scale_height);
}

double goddard_singular_surface_residual(const GoddardParameters& p, double h, double v,
                                         double m) {
  const double surface = goddard_drag(p, h, v) * (1.0 + v / p.exhaust_speed) / p.g;
  return std::abs(m - surface) / m;
}

double goddard_singular_thrust(const GoddardParameters& p, double h, double v, double m) {
  const double c = p.exhaust_speed;
  const double drag = goddard_drag(p, h, v);
  const double bracket = c * c * (1.0 + v / c) / (p.scale_height * p.g) - 1.0 - 2.0 * c / v;
  const double denom = 1.0 + 4.0 * c / v + 2.0 * c * c / (v * v);
  return drag + m * p.g + bracket * (m * p.g / denom);
}

}  // namespace bbsoc
