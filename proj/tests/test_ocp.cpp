#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "bbsoc/error.hpp"
#include "bbsoc/ocp.hpp"
#include "bbsoc/problems.hpp"
#include "doctest.h"

using namespace bbsoc;

TEST_CASE("Jacobson Hamiltonian hand evaluations") {
  const OcpDefinition ocp = builtin_problem("jacobson");
  const std::vector<double> x1{0.0, 1.0};
  const std::vector<double> u1{1.0};
  const std::vector<double> l1{0.0, 0.0};
  CHECK(hamiltonian(ocp, x1, u1, l1, 0.0) == doctest::Approx(0.5));
  const std::vector<double> x2{0.0, 0.0};
  const std::vector<double> u2{0.3};
  const std::vector<double> l2{0.0, 1.0};
  CHECK(hamiltonian(ocp, x2, u2, l2, 0.0) == doctest::Approx(0.3));
}

TEST_CASE("zero costate and zero running cost gives zero Hamiltonian") {
  const OcpDefinition ocp = builtin_problem("robot_arm");
  const std::vector<double> x{4.5, 0.1, 0.2, 0.3, 0.7, 0.1};
  const std::vector<double> u{0.5, -0.5, 0.2};
  const std::vector<double> l(6, 0.0);
  CHECK(hamiltonian(ocp, x, u, l, 1.0) == 0.0);
}

TEST_CASE("hamiltonian rejects mismatched dimensions") {
  const OcpDefinition ocp = builtin_problem("jacobson");
  const std::vector<double> x{0.0, 1.0};
  const std::vector<double> u{1.0};
  const std::vector<double> bad{0.0};
  CHECK_THROWS_AS(hamiltonian(ocp, x, u, bad, 0.0), Error);
  CHECK_THROWS_AS(hamiltonian(ocp, bad, u, x, 0.0), Error);
}

TEST_CASE("built-in problems carry the benchmark data") {
  const OcpDefinition arm = builtin_problem("robot_arm");
  CHECK(arm.n_x == 6);
  CHECK(arm.n_u == 3);
  for (int j = 0; j < 3; ++j) {
    CHECK(arm.u_min[j] == -1.0);
    CHECK(arm.u_max[j] == 1.0);
  }
  CHECK(*arm.initial_state[0] == 4.5);
  CHECK(*arm.final_state[2] == doctest::Approx(2.0 * std::numbers::pi / 3.0));
  CHECK(arm.tf.free);

  const OcpDefinition god = builtin_problem("goddard_rocket");
  CHECK(*god.initial_state[2] == 3.0);
  CHECK(*god.final_state[2] == 1.0);
  CHECK(*god.initial_state[0] == 0.0);
  CHECK(*god.initial_state[1] == 0.0);
  CHECK(god.u_min[0] == 0.0);
  CHECK(god.u_max[0] == GoddardParameters{}.max_thrust);

  const OcpDefinition jac = builtin_problem("jacobson");
  CHECK(*jac.initial_state[0] == 0.0);
  CHECK(*jac.initial_state[1] == 1.0);
  CHECK(jac.u_min[0] == -1.0);
  CHECK(jac.u_max[0] == 1.0);
  CHECK(!jac.tf.free);
  CHECK(jac.tf.value == 5.0);

  const OcpDefinition entry = builtin_problem("entry_vehicle");
  CHECK(entry.n_x == 6);
  CHECK(entry.n_u == 2);
}

TEST_CASE("unknown built-in is not found") {
  try {
    builtin_problem("moon_lander");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotFound);
  }
}

TEST_CASE("affine splits are consistent on 100 random probes") {
  for (const std::string& name : builtin_problem_names()) {
    const OcpDefinition ocp = builtin_problem(name);
    const auto residual = ocp.affine_split_residual(100, 7u);
    if (name == "entry_vehicle") {
      CHECK(!residual.has_value());
    } else {
      REQUIRE(residual.has_value());
      CHECK(*residual < 1e-10);
    }
  }
}

TEST_CASE("Goddard dynamics at rest with zero thrust") {
  const OcpDefinition ocp = builtin_problem("goddard_rocket");
  const std::vector<double> x{0.0, 0.0, 3.0};
  const std::vector<double> u{0.0};
  const std::vector<double> a = ocp.dynamics(x, u, 0.0);
  CHECK(a[0] == 0.0);
  CHECK(a[1] == doctest::Approx(-GoddardParameters{}.g));
  CHECK(a[2] == 0.0);
}

TEST_CASE("control derivatives of the Hamiltonian") {
  const OcpDefinition jac = builtin_problem("jacobson");
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const std::vector<double> x{d(rng), d(rng)};
    const std::vector<double> u{d(rng)};
    const std::vector<double> l{d(rng), d(rng)};
    const ControlSensitivity s = hamiltonian_control_derivatives(jac, x, u, l, 1.0);
    CHECK(s.h_uu[0] == 0.0);
    CHECK(s.h_u[0] == doctest::Approx(l[1]));
  }
  const OcpDefinition entry = builtin_problem("entry_vehicle");
  const EntryVehicleParameters p;
  const std::vector<double> x{p.earth_radius + 60000.0, 0.1, 0.1, 6000.0, -0.02, 1.5};
  const std::vector<double> u{0.3, -0.2};
  const std::vector<double> l{1e-5, 0.1, 1.0, 1e-4, 0.5, 0.2};
  const ControlSensitivity s = hamiltonian_control_derivatives(entry, x, u, l, 0.0);
  CHECK(std::abs(s.h_uu[0]) > 1e-8);
}

TEST_CASE("validation catches malformed definitions") {
  OcpDefinition ocp = builtin_problem("jacobson");
  ocp.u_min = {2.0};
  CHECK_THROWS_AS(ocp.validate(), Error);
  ocp = builtin_problem("jacobson");
  ocp.initial_state.pop_back();
  CHECK_THROWS_AS(ocp.validate(), Error);
  ocp = builtin_problem("jacobson");
  ocp.tf = TimeSpec::fixed(0.0);
  CHECK_THROWS_AS(ocp.validate(), Error);
}

TEST_CASE("Goddard singular thrust oracle lies within the thrust bounds on the surface") {
  const GoddardParameters p;
  // A state on the singular surface: choose h, v and set m accordingly.
  const double h = 5000.0;
  const double v = 600.0;
  const double m = goddard_drag(p, h, v) * (1.0 + v / p.exhaust_speed) / p.g;
  CHECK(goddard_singular_surface_residual(p, h, v, m) < 1e-14);
  const double thrust = goddard_singular_thrust(p, h, v, m);
  CHECK(std::isfinite(thrust));
  CHECK(thrust > 0.0);
}
