#include <cmath>
#include <vector>

#include "bbsoc/ad.hpp"
#include "bbsoc/error.hpp"
#include "bbsoc/lgr.hpp"
#include "bbsoc/regularization.hpp"
#include "doctest.h"

using namespace bbsoc;

TEST_CASE("penalty of a constant control against a zero target") {
  const QuadratureRule& rule = cached_lgr_rule(3);
  const std::vector<double> u(3, 1.0);
  CHECK(penalty_value(u, rule, 0.0, 1.0, nullptr, 1e-6) == doctest::Approx(5e-7));
}

TEST_CASE("penalty integrates the squared distance to the target") {
  // u = t on [0, 1], alpha = 0, eps = 2: (eps / 2) * int t^2 dt = 1 / 3.
  const QuadratureRule& rule = cached_lgr_rule(4);
  std::vector<double> u;
  for (double tau : rule.points) u.push_back(affine_map(tau, 0.0, 1.0));
  CHECK(penalty_value(u, rule, 0.0, 1.0, nullptr, 2.0) == doctest::Approx(1.0 / 3.0));
  const MonotoneCubicSpline same({0.0, 1.0}, {0.0, 1.0});
  CHECK(penalty_value(u, rule, 0.0, 1.0, &same, 2.0) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("penalty rejects a non-positive weight and mismatched samples") {
  const QuadratureRule& rule = cached_lgr_rule(2);
  const std::vector<double> u(2, 0.0);
  try {
    penalty_value(u, rule, 0.0, 1.0, nullptr, 0.0);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidWeight);
  }
  const std::vector<double> t(3, 0.0);
  CHECK_THROWS_AS(penalty_value(u, t, rule.weights, nullptr, 1.0, 1.0), Error);
  RegularizationState s;
  s.epsilon = -1.0;
  CHECK_THROWS_AS(augment(s), Error);
}

TEST_CASE("spline reproduces a straight line and its samples") {
  const MonotoneCubicSpline s({0.0, 0.5, 2.0, 3.0}, {1.0, 2.0, 5.0, 7.0});
  CHECK(s(0.25) == doctest::Approx(1.5));
  CHECK(s(1.0) == doctest::Approx(3.0));
  CHECK(s(2.5) == doctest::Approx(6.0));
  CHECK(s(2.0) == doctest::Approx(5.0));
  CHECK(s(-1.0) == 1.0);
  CHECK(s(9.0) == 7.0);
}

TEST_CASE("spline stays monotone across a step") {
  const MonotoneCubicSpline s({0.0, 1.0, 2.0, 3.0, 4.0}, {0.0, 0.0, 1.0, 1.0, 1.0});
  double prev = s(0.0);
  for (int k = 1; k <= 400; ++k) {
    const double v = s(0.01 * k);
    CHECK(v >= prev - 1e-15);
    CHECK(v <= 1.0 + 1e-15);
    prev = v;
  }
}

TEST_CASE("spline derivative through dual numbers") {
  const MonotoneCubicSpline s({0.0, 1.0, 2.0}, {0.0, 2.0, 4.0});
  const auto t = ad::variable<ad::Dual<double, 1>>(0.7, 0);
  CHECK(s(t).d[0] == doctest::Approx(2.0));
}

TEST_CASE("spline construction errors") {
  CHECK_THROWS_AS(MonotoneCubicSpline({0.0, 0.0}, {1.0, 2.0}), Error);
  CHECK_THROWS_AS(MonotoneCubicSpline({0.0, 1.0}, {1.0}), Error);
  CHECK_THROWS_AS(MonotoneCubicSpline({}, {}), Error);
  const MonotoneCubicSpline one({2.0}, {3.0});
  CHECK(one(-5.0) == 3.0);
  CHECK(MonotoneCubicSpline()(1.0) == 0.0);
}

TEST_CASE("update_alpha interpolates the previous controls") {
  const std::vector<double> t{0.0, 1.0, 3.0};
  const std::vector<double> u{0.2, 0.4, 0.1};
  const MonotoneCubicSpline a = update_alpha(t, u);
  for (std::size_t k = 0; k < t.size(); ++k) CHECK(a(t[k]) == doctest::Approx(u[k]));
}

TEST_CASE("convergence classification") {
  RegularizationState s;
  CHECK(check_convergence(s, 1e-6) == RegularizationStatus::kContinue);
  s.history = {1e-3, 1e-5};
  CHECK(check_convergence(s, 1e-6) == RegularizationStatus::kContinue);
  s.history.push_back(5e-7);
  CHECK(check_convergence(s, 1e-6) == RegularizationStatus::kConverged);
  s.history = {2e-3, 2e-3, 2e-3};
  CHECK(check_convergence(s, 1e-6) == RegularizationStatus::kStalled);
  CHECK(std::string(to_string(RegularizationStatus::kStalled)) == "stalled");
}

TEST_CASE("augment carries the weight and targets") {
  RegularizationState s;
  s.epsilon = 1e-8;
  s.alpha = {{std::nullopt}, {MonotoneCubicSpline({0.0, 1.0}, {1.0, 1.0})}};
  const RegularizationTerms t = augment(s);
  CHECK(t.epsilon == 1e-8);
  REQUIRE(t.alpha.size() == 2);
  CHECK(!t.alpha[0][0].has_value());
  CHECK((*t.alpha[1][0])(0.5) == doctest::Approx(1.0));
}
