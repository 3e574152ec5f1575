#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "bbsoc/error.hpp"
#include "bbsoc/expression.hpp"
#include "bbsoc/ocp.hpp"
#include "doctest.h"

using namespace bbsoc;

namespace {

ExpressionSymbols xy() {
  ExpressionSymbols s;
  s.variables = {"x", "y"};
  s.constants = {{"k", 3.0}};
  return s;
}

double eval(const std::string& text, double x, double y) {
  const std::vector<double> slots{x, y};
  return Expression::parse(text, xy()).evaluate<double>(slots);
}

}  // namespace

TEST_CASE("precedence and associativity") {
  CHECK(eval("1 + 2 * 3", 0, 0) == 7.0);
  CHECK(eval("(1 + 2) * 3", 0, 0) == 9.0);
  CHECK(eval("2 ^ 3 ^ 2", 0, 0) == 512.0);
  CHECK(eval("-2 ^ 2", 0, 0) == -4.0);
  CHECK(eval("2 ^ -1", 0, 0) == 0.5);
  CHECK(eval("8 / 4 / 2", 0, 0) == 1.0);
  CHECK(eval("7 - 2 - 1", 0, 0) == 4.0);
  CHECK(eval("--x", 5, 0) == 5.0);
  CHECK(eval("+x", 5, 0) == 5.0);
  CHECK(eval("1.5e2 + .5 + 2E-1", 0, 0) == doctest::Approx(150.7));
}

TEST_CASE("names, constants and functions") {
  CHECK(eval("k * x + y", 2, 1) == 7.0);
  CHECK(eval("pi", 0, 0) == std::numbers::pi);
  CHECK(std::isinf(eval("-inf", 0, 0)));
  CHECK(eval("atan2(y, x)", 1, 1) == doctest::Approx(std::numbers::pi / 4));
  CHECK(eval("pow(x, y)", 2, 3) == 8.0);
  CHECK(eval("sqrt(abs(x))", -4, 0) == 2.0);
  CHECK(eval("log(exp(x)) + sin(0) + cos(0) + tanh(0)", 1.25, 0) == doctest::Approx(2.25));
  CHECK(eval("cosh(x)^2 - sinh(x)^2", 0.7, 0) == doctest::Approx(1.0));
  CHECK(eval("asin(x) + acos(x)", 0.3, 0) == doctest::Approx(std::numbers::pi / 2));
  CHECK(eval("tan(atan(x))", 0.4, 0) == doctest::Approx(0.4));
}

TEST_CASE("constant folding") {
  const Expression c = Expression::parse("2 * pi / 3 + k", xy());
  CHECK(c.is_constant());
  CHECK(c.constant_value() == doctest::Approx(2.0 * std::numbers::pi / 3.0 + 3.0));
  const Expression v = Expression::parse("x * (1 + 1)", xy());
  CHECK_FALSE(v.is_constant());
  CHECK_THROWS_AS(v.constant_value(), Error);
  CHECK(v.slots_used() == std::vector<int>{0});
  CHECK(Expression::parse("y + x * y", xy()).slots_used() == std::vector<int>{0, 1});
  CHECK(v.text() == "x * (1 + 1)");
}

TEST_CASE("endpoint values") {
  ExpressionSymbols s;
  s.variables = {"", "t0", "", "tf"};
  s.endpoint_values = {{"h", {0, 2}}};
  const Expression e = Expression::parse("final(h) - initial(h) + tf", s);
  const std::vector<double> slots{1.0, 0.0, 4.0, 10.0};
  CHECK(e.evaluate<double>(slots) == 13.0);
  CHECK_THROWS_AS(Expression::parse("h", s), Error);
  CHECK_THROWS_AS(Expression::parse("final(q)", s), Error);
  CHECK_THROWS_AS(Expression::parse("initial(x)", xy()), Error);
}

TEST_CASE("parse errors carry the column") {
  const auto message = [](const std::string& text) {
    try {
      Expression::parse(text, xy());
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kParse);
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("x + w").find("unknown name 'w' at column 5") != std::string::npos);
  CHECK(message("foo(x)").find("unknown function 'foo' at column 1") != std::string::npos);
  CHECK(message("sin(x, y)").find("takes 1 argument") != std::string::npos);
  CHECK(message("(x + 1").find("expected ')'") != std::string::npos);
  CHECK(message("x y").find("unexpected 'y'") != std::string::npos);
  CHECK(message("").find("empty expression") != std::string::npos);
  CHECK(message("x +").find("unexpected end") != std::string::npos);
  CHECK(message("1..2").find("malformed number") != std::string::npos);
  CHECK(message("x $ 1").find("unexpected '$'") != std::string::npos);
}

TEST_CASE("dual evaluation matches hand derivatives") {
  const Expression e = Expression::parse("x^2 * sin(y) + exp(x * y) + x^3 + 2^x", xy());
  const double x = 0.7;
  const double y = -0.4;
  const std::vector<PointDual2> slots{ad::variable<PointDual2>(x, 0), ad::variable<PointDual2>(y, 1)};
  const PointDual2 r = e.evaluate<PointDual2>(slots);
  const double exy = std::exp(x * y);
  CHECK(r.v.v == doctest::Approx(x * x * std::sin(y) + exy + x * x * x + std::pow(2.0, x)));
  CHECK(r.v.d[0] == doctest::Approx(2 * x * std::sin(y) + y * exy + 3 * x * x + std::log(2.0) * std::pow(2.0, x)));
  CHECK(r.v.d[1] == doctest::Approx(x * x * std::cos(y) + x * exy));
  CHECK(r.d[0].d[0] == doctest::Approx(2 * std::sin(y) + y * y * exy + 6 * x + std::pow(std::log(2.0), 2) * std::pow(2.0, x)));
  CHECK(r.d[0].d[1] == doctest::Approx(2 * x * std::cos(y) + exy + x * y * exy));
  CHECK(r.d[1].d[1] == doctest::Approx(-x * x * std::sin(y) + x * x * exy));
}
