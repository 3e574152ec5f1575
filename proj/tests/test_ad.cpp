#include <cmath>

#include "bbsoc/ad.hpp"
#include "doctest.h"

using D1 = bbsoc::ad::Dual<double, 2>;
using D2 = bbsoc::ad::Dual<D1, 2>;
namespace ad = bbsoc::ad;

TEST_CASE("square: gradient 6 and second derivative 2 at x = 3") {
  const D2 x = ad::variable<D2>(3.0, 0);
  const D2 f = x * x;
  CHECK(ad::value(f) == 9.0);
  CHECK(f.v.d[0] == 6.0);
  CHECK(f.d[0].d[0] == 2.0);
}

TEST_CASE("sin derivative at zero is one") {
  const D1 x = ad::variable<D1>(0.0, 0);
  const D1 s = ad::sin(x);
  CHECK(s.d[0] == 1.0);
}

TEST_CASE("elementary functions against central differences") {
  auto check = [](auto fn, double x0) {
    const D1 x = ad::variable<D1>(x0, 0);
    const double h = 1e-6;
    const double fd = (fn(x0 + h) - fn(x0 - h)) / (2.0 * h);
    CHECK(std::abs(fn(x).d[0] - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
  };
  check([](auto x) { return ad::exp(x) * ad::cos(x); }, 0.7);
  check([](auto x) { return ad::log(x) / ad::sqrt(x); }, 1.3);
  check([](auto x) { return ad::tan(x) + ad::atan(x); }, 0.4);
  check([](auto x) { return ad::pow(x, 2.5) - ad::sinh(x) + ad::cosh(x); }, 1.1);
  check([](auto x) { return ad::tanh(x) * ad::asin(x * 0.5) + ad::acos(x * 0.3); }, 0.6);
  check([](auto x) { return ad::atan2(x, x * x + 1.0); }, 0.8);
}

TEST_CASE("mixed second derivative") {
  const D2 x = ad::variable<D2>(1.5, 0);
  const D2 y = ad::variable<D2>(-0.5, 1);
  const D2 f = x * x * y + ad::exp(x * y);
  const double e = std::exp(1.5 * -0.5);
  CHECK(f.d[0].d[1] == doctest::Approx(2.0 * 1.5 + e + 1.5 * -0.5 * e));
  CHECK(f.d[1].d[0] == doctest::Approx(f.d[0].d[1]));
}

TEST_CASE("abs is not differentiable at zero") {
  const D1 x = ad::variable<D1>(0.0, 0);
  CHECK(std::isnan(ad::abs(x).d[0]));
  const D1 y = ad::variable<D1>(-2.0, 0);
  CHECK(ad::abs(y).d[0] == -1.0);
}

TEST_CASE("comparisons use the innermost value") {
  const D2 a = ad::variable<D2>(1.0, 0);
  CHECK(a < 2.0);
  CHECK(a > 0.5);
}
