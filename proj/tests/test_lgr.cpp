#include <cmath>
#include <vector>

#include "bbsoc/error.hpp"
#include "bbsoc/lgr.hpp"
#include "doctest.h"

using namespace bbsoc;

namespace {

double integrate_monomial(const QuadratureRule& r, int q) {
  double s = 0.0;
  for (int i = 0; i < r.order; ++i) s += r.weights[i] * std::pow(r.points[i], q);
  return s;
}

double exact_monomial(int q) { return q % 2 == 1 ? 0.0 : 2.0 / (q + 1.0); }

}  // namespace

TEST_CASE("lgr_rule small orders match closed forms") {
  const QuadratureRule r1 = lgr_rule(1);
  CHECK(r1.points == std::vector<double>{-1.0});
  CHECK(r1.weights[0] == doctest::Approx(2.0).epsilon(1e-15));

  const QuadratureRule r2 = lgr_rule(2);
  CHECK(r2.points[0] == -1.0);
  CHECK(r2.points[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(r2.weights[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r2.weights[1] == doctest::Approx(1.5).epsilon(1e-14));

  const QuadratureRule r3 = lgr_rule(3);
  const double s6 = std::sqrt(6.0);
  CHECK(r3.points[1] == doctest::Approx((1.0 - s6) / 5.0).epsilon(1e-14));
  CHECK(r3.points[2] == doctest::Approx((1.0 + s6) / 5.0).epsilon(1e-14));
  CHECK(r3.weights[0] == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
  CHECK(r3.weights[1] == doctest::Approx((16.0 + s6) / 18.0).epsilon(1e-14));
  CHECK(r3.weights[2] == doctest::Approx((16.0 - s6) / 18.0).epsilon(1e-14));
}

TEST_CASE("lgr_rule rejects order zero") {
  CHECK_THROWS_AS(lgr_rule(0), Error);
  try {
    lgr_rule(0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidOrder);
  }
}

TEST_CASE("quadrature exact through degree 2N-2 for N = 1..15") {
  for (int n = 1; n <= 15; ++n) {
    const QuadratureRule r = lgr_rule(n);
    double sum = 0.0;
    for (double w : r.weights) {
      CHECK(w > 0.0);
      sum += w;
    }
    CHECK(std::abs(sum - 2.0) < 1e-12);
    CHECK(r.points[0] == -1.0);
    for (int i = 1; i < n; ++i) CHECK(r.points[i] > r.points[i - 1]);
    CHECK(r.points.back() < 1.0);
    for (int q = 0; q <= 2 * n - 2; ++q) {
      CHECK(std::abs(integrate_monomial(r, q) - exact_monomial(q)) < 1e-10);
    }
  }
}

TEST_CASE("differentiation matrix N=1 and polynomial exactness") {
  const DifferentiationMatrix d1 = differentiation_matrix(lgr_rule(1));
  CHECK(d1.rows == 1);
  CHECK(d1.cols == 2);
  CHECK(d1(0, 0) == doctest::Approx(-0.5));
  CHECK(d1(0, 1) == doctest::Approx(0.5));

  for (int n = 1; n <= 15; ++n) {
    const QuadratureRule r = lgr_rule(n);
    const DifferentiationMatrix d = differentiation_matrix(r);
    const std::vector<double> s = r.support();
    for (int l = 0; l < n; ++l) {
      double row = 0.0;
      for (int j = 0; j <= n; ++j) row += d(l, j);
      CHECK(std::abs(row) < 1e-12);
    }
    for (int q = 1; q <= n; ++q) {
      for (int l = 0; l < n; ++l) {
        double v = 0.0;
        for (int j = 0; j <= n; ++j) v += d(l, j) * std::pow(s[j], q);
        CHECK(std::abs(v - q * std::pow(s[l], q - 1)) < 1e-9);
      }
    }
  }
}

TEST_CASE("affine map endpoints, midpoint and round trip") {
  CHECK(affine_map(-1.0, 0.0, 10.0) == 0.0);
  CHECK(affine_map(1.0, 0.0, 10.0) == 10.0);
  CHECK(affine_map(0.0, 2.0, 4.0) == 3.0);
  for (double tau : {-1.0, -0.3, 0.0, 0.77, 1.0}) {
    CHECK(std::abs(affine_unmap(affine_map(tau, 1.5, 7.25), 1.5, 7.25) - tau) < 1e-14);
  }
  CHECK_THROWS_AS(affine_map(0.0, 1.0, 1.0), Error);
  CHECK_THROWS_AS(affine_unmap(0.0, 2.0, 1.0), Error);
}

TEST_CASE("interpolate_state reproduces polynomials and stored samples") {
  const QuadratureRule r = lgr_rule(3);
  const std::vector<double> s = r.support();
  std::vector<double> c(s.size(), 4.2);
  std::vector<double> sq(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) sq[i] = s[i] * s[i];
  for (double t : {-1.0, -0.5, 0.1, 0.9, 1.0}) {
    CHECK(interpolate_state(c, r, t) == doctest::Approx(4.2).epsilon(1e-14));
    CHECK(std::abs(interpolate_state(sq, r, t) - t * t) < 1e-12);
  }
  CHECK(interpolate_state(sq, r, s[2]) == sq[2]);
  CHECK_THROWS_AS(interpolate_state(sq, r, 1.0001), Error);
  CHECK_THROWS_AS(interpolate_state(std::vector<double>{1.0, 2.0}, r, 0.0), Error);
}

TEST_CASE("mesh layout validation and domain grid assembly") {
  MeshLayout m = MeshLayout::uniform(10, 4);
  CHECK(m.num_points() == 40);
  const DomainGrid g = build_domain_grid(m);
  CHECK(g.num_points() == 40);
  CHECK(g.tau.size() == 41u);
  double sum = 0.0;
  for (double w : g.weights) sum += w;
  CHECK(std::abs(sum - 2.0) < 1e-12);
  // Domain differentiation of tau^3 is exact on every interval.
  for (int l = 0; l < g.num_points(); ++l) {
    double v = 0.0;
    for (int j = 0; j <= g.num_points(); ++j) v += g.diff(l, j) * std::pow(g.tau[j], 3);
    CHECK(std::abs(v - 3.0 * g.tau[l] * g.tau[l]) < 1e-9);
  }
  MeshLayout bad;
  bad.breaks = {-1.0, 0.5, 0.2, 1.0};
  bad.orders = {3, 3, 3};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad.breaks = {-1.0, 1.0};
  bad.orders = {0};
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_THROWS_AS(MeshLayout::uniform(0, 3), Error);
}
