#include <cmath>
#include <functional>
#include <vector>

#include "bbsoc/error.hpp"
#include "bbsoc/mesh.hpp"
#include "doctest.h"

using namespace bbsoc;

namespace {

// x' = u on a fixed horizon; the solution samples are written by hand.
struct Integrator {
  template <class T>
  void dynamics(std::span<const T>, std::span<const T> u, const T&, std::span<T> out) const {
    out[0] = u[0];
  }
};

OcpDefinition integrator() {
  OcpDefinition ocp;
  ocp.name = "integrator";
  ocp.n_x = 1;
  ocp.n_u = 1;
  ocp.u_min = {-kInfinity};
  ocp.u_max = {kInfinity};
  ocp.initial_state = {std::nullopt};
  ocp.final_state = {std::nullopt};
  ocp.t0 = TimeSpec::fixed(-1.0);
  ocp.tf = TimeSpec::fixed(1.0);
  ocp.functions = make_ocp_functions(Integrator{});
  return ocp;
}

TrajectorySolution sampled(const MeshLayout& mesh, const std::function<double(double)>& x,
                           const std::function<double(double)>& u) {
  const DomainGrid grid = build_domain_grid(mesh);
  const int n = grid.num_points();
  TrajectorySolution sol;
  sol.n_x = 1;
  sol.n_u = 1;
  sol.interfaces = {-1.0, 1.0};
  DomainTrajectory dom;
  dom.t_start = -1.0;
  dom.t_end = 1.0;
  dom.mesh = mesh;
  dom.tau = grid.tau;
  dom.time = grid.tau;
  dom.states.resize(n + 1, 1);
  dom.controls.resize(n, 1);
  for (int l = 0; l <= n; ++l) {
    dom.states(l, 0) = x(grid.tau[l]);
    if (l < n) dom.controls(l, 0) = u(grid.tau[l]);
  }
  sol.domains.push_back(dom);
  return sol;
}

double error_of(const MeshLayout& mesh, const std::function<double(double)>& x,
                const std::function<double(double)>& u) {
  return estimate_error(sampled(mesh, x, u), integrator()).max_error();
}

DomainPartition with_mesh(const MeshLayout& mesh) {
  DomainPartition p;
  p.interfaces = {0.0, 1.0};
  p.lower = {0.0, 1.0};
  p.upper = {0.0, 1.0};
  p.domains.push_back({{ControlArc::kRegular}, mesh});
  return p;
}

}  // namespace

TEST_CASE("a polynomial trajectory has no mesh error") {
  const auto x = [](double t) { return t * t * t / 3.0 + 0.5; };
  const auto u = [](double t) { return t * t; };
  CHECK(error_of(MeshLayout::uniform(1, 4), x, u) < 1e-12);
  CHECK(error_of(MeshLayout::uniform(3, 5), x, u) < 1e-12);
  const ErrorEstimate est = estimate_error(sampled(MeshLayout::uniform(3, 4), x, u), integrator());
  REQUIRE(est.interval_errors.size() == 1);
  CHECK(est.interval_errors[0].size() == 3);
}

TEST_CASE("a kink inside an interval is visible") {
  const auto x = [](double t) { return 0.5 * t * std::abs(t); };
  const auto u = [](double t) { return std::abs(t); };
  CHECK(error_of(MeshLayout::uniform(1, 4), x, u) > 1e-4);
  // With the kink on a mesh break both halves are polynomial.
  CHECK(error_of(MeshLayout::uniform(2, 4), x, u) < 1e-12);
}

TEST_CASE("doubling the order shrinks a smooth error by more than ten") {
  const auto x = [](double t) { return std::exp(2.0 * t) / 2.0; };
  const auto u = [](double t) { return std::exp(2.0 * t); };
  const double coarse = error_of(MeshLayout::uniform(1, 4), x, u);
  const double fine = error_of(MeshLayout::uniform(1, 8), x, u);
  CHECK(coarse > 1e-6);
  CHECK(fine < coarse / 10.0);
}

TEST_CASE("order increment") {
  CHECK(order_increment(1e-7, 1e-6, 4) == 0);
  CHECK(order_increment(1e-6, 1e-6, 4) == 0);
  CHECK(order_increment(2e-6, 1e-6, 4) == 1);
  CHECK(order_increment(1e-2, 1e-6, 9) == 5);
  CHECK(order_increment(1e-2, 1e-6, 1) == order_increment(1e-2, 1e-6, 2));
}

TEST_CASE("refine keeps, raises or splits intervals") {
  MeshLayout mesh;
  mesh.breaks = {-1.0, -0.5, 0.5, 1.0};
  mesh.orders = {4, 4, 13};
  const DomainPartition p = with_mesh(mesh);
  ErrorEstimate est;
  est.interval_errors = {{1e-8, 1e-2, 1e-2}};
  const DomainPartition r = refine(p, est, 1e-6);
  const MeshLayout& out = r.domains[0].mesh;
  CHECK(out.breaks[0] == -1.0);
  CHECK(out.breaks[1] == -0.5);
  CHECK(out.orders[0] == 4);
  CHECK(out.orders[1] == 4 + order_increment(1e-2, 1e-6, 4));
  CHECK(out.orders[1] <= kDefaultMaxOrder);
  // The capped interval is split into order-3 pieces without losing points.
  const int pieces = out.num_intervals() - 2;
  CHECK(pieces >= 2);
  CHECK(3 * pieces > 13);
  for (int k = 2; k < out.num_intervals(); ++k) CHECK(out.orders[k] == 3);
  CHECK(out.breaks.back() == 1.0);
  CHECK(out.num_points() >= mesh.num_points());
  CHECK_NOTHROW(out.validate());
  CHECK(r.interfaces == p.interfaces);
}

TEST_CASE("refine never removes collocation points") {
  for (int n = 1; n <= kDefaultMaxOrder; ++n) {
    for (double e : {1e-9, 1e-5, 1e-3, 1.0, 1e3}) {
      const DomainPartition p = with_mesh(MeshLayout::uniform(2, n));
      ErrorEstimate est;
      est.interval_errors = {{e, e}};
      const DomainPartition r = refine(p, est, 1e-6);
      CAPTURE(n);
      CAPTURE(e);
      CHECK(r.domains[0].mesh.num_points() >= 2 * n);
      if (e > 1e-6) CHECK(r.domains[0].mesh.num_points() > 2 * n);
    }
  }
}

TEST_CASE("refine argument errors") {
  const DomainPartition p = with_mesh(MeshLayout::uniform(2, 4));
  ErrorEstimate est;
  est.interval_errors = {{1.0, 1.0}};
  CHECK_THROWS_AS(refine(p, est, 0.0), Error);
  CHECK_THROWS_AS(refine(p, est, 1e-6, MeshLimits{5, 4}), Error);
  ErrorEstimate short_est;
  short_est.interval_errors = {{1.0}};
  CHECK_THROWS_AS(refine(p, short_est, 1e-6), Error);
  ErrorEstimate no_domains;
  CHECK_THROWS_AS(refine(p, no_domains, 1e-6), Error);
}
