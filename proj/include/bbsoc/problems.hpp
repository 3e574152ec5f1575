#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "bbsoc/ocp.hpp"

namespace bbsoc {

/// Goddard rocket constants (English units: ft, s, slug, lbf).
struct GoddardParameters {
  double g = 32.174;
  double scale_height = 23800.0;
  double exhaust_speed = 1580.9425279876559;
  double max_thrust = 193.044;
  double drag_coefficient = 5.49153484923381e-05;
  double initial_mass = 3.0;
  double final_mass = 1.0;
};

/// Reusable-launch-vehicle entry constants (SI units).
struct EntryVehicleParameters {
  double earth_radius = 6371203.92;
  double reference_area = 249.9091776;
  double cl0 = -0.2070;
  double cl1 = 1.6756;
  double cd0 = 0.0785;
  double cd1 = -0.3529;
  double cd2 = 2.0400;
  double scale_height = 7254.24;
  double rho0 = 1.225570827014494;
  double mu = 3.986031954093051e14;
  double mass = 92079.2525560557;
};

/// Arm length of the robot arm problem.
inline constexpr double kRobotArmLength = 5.0;

std::vector<std::string> builtin_problem_names();

/// Throws ErrorCode::kNotFound for unknown names.
OcpDefinition builtin_problem(std::string_view name);

/// Drag of the Goddard model, D0 v^2 exp(-h / H).
double goddard_drag(const GoddardParameters& p, double h, double v);

/// Relative distance of (h, v, m) to the Goddard singular surface.
double goddard_singular_surface_residual(const GoddardParameters& p, double h, double v, double m);

/// Closed-form Goddard singular thrust; used only to check solutions.
double goddard_singular_thrust(const GoddardParameters& p, double h, double v, double m);

}  // namespace bbsoc
