#include <cmath>
#include <vector>

#include "bbsoc/error.hpp"
#include "bbsoc/nlp.hpp"
#include "bbsoc/nlp_ad.hpp"
#include "doctest.h"

using namespace bbsoc;

namespace {

struct SquareAboveOne {
  template <class T>
  T objective(std::span<const T> x) const {
    return x[0] * x[0];
  }
  template <class T>
  void constraints(std::span<const T>, std::span<T>) const {}
};

struct ProjectOntoLine {
  template <class T>
  T objective(std::span<const T> x) const {
    return 0.5 * (x[0] * x[0] + x[1] * x[1]);
  }
  template <class T>
  void constraints(std::span<const T> x, std::span<T> c) const {
    c[0] = x[0] + x[1] - 1.0;
  }
};

struct Rosenbrock {
  template <class T>
  T objective(std::span<const T> x) const {
    const T a = 1.0 - x[0];
    const T b = x[1] - x[0] * x[0];
    return a * a + 100.0 * b * b;
  }
  template <class T>
  void constraints(std::span<const T>, std::span<T>) const {}
};

// Nonconvex objective on a circle (Hock-Schittkowski-like).
struct CircleNonconvex {
  template <class T>
  T objective(std::span<const T> x) const {
    return -x[0] * x[1] + 0.1 * x[2] * x[2];
  }
  template <class T>
  void constraints(std::span<const T> x, std::span<T> c) const {
    c[0] = x[0] * x[0] + x[1] * x[1] - 2.0;
    c[1] = x[2] - x[0] + x[1];
  }
};

struct Absolute {
  template <class T>
  T objective(std::span<const T> x) const {
    return bbsoc::ad::abs(x[0]);
  }
  template <class T>
  void constraints(std::span<const T>, std::span<T>) const {}
};

// Convex QP: min 0.5 x^T Q x + q^T x with equality and bounds.
struct ConvexQp {
  template <class T>
  T objective(std::span<const T> x) const {
    return 2.0 * x[0] * x[0] + x[1] * x[1] + 1.5 * x[2] * x[2] + x[0] * x[1] - 3.0 * x[0] + x[2];
  }
  template <class T>
  void constraints(std::span<const T> x, std::span<T> c) const {
    c[0] = x[0] + x[1] + x[2] - 1.0;
  }
};

struct Inconsistent {
  template <class T>
  T objective(std::span<const T> x) const {
    return x[0] * x[0] + x[1] * x[1];
  }
  template <class T>
  void constraints(std::span<const T> x, std::span<T> c) const {
    c[0] = x[0] * x[0] + 1.0;
  }
};

}  // namespace

TEST_CASE("minimize x^2 subject to x >= 1") {
  auto nlp = make_dense_ad_nlp<1>(SquareAboveOne{}, 0, {1.0}, {kInfinity}, {3.0});
  const NlpSolution s = solve_nlp(nlp);
  CHECK(s.status == NlpStatus::kConverged);
  CHECK(s.primal[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(s.bound_lower[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(s.kkt_residual <= 1e-8);
}

TEST_CASE("projection onto a line") {
  auto nlp = make_dense_ad_nlp<2>(ProjectOntoLine{}, 1, {-kInfinity, -kInfinity},
                                  {kInfinity, kInfinity}, {3.0, -2.0});
  const NlpSolution s = solve_nlp(nlp);
  CHECK(s.status == NlpStatus::kConverged);
  CHECK(s.primal[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(s.primal[1] == doctest::Approx(0.5).epsilon(1e-9));
  // grad f + y grad c = 0 -> y = -0.5
  CHECK(s.multipliers[0] == doctest::Approx(-0.5).epsilon(1e-8));
  CHECK(s.kkt_residual <= 1e-8);
}

TEST_CASE("Rosenbrock from the classical start") {
  auto nlp = make_dense_ad_nlp<2>(Rosenbrock{}, 0, {-kInfinity, -kInfinity},
                                  {kInfinity, kInfinity}, {-1.2, 1.0});
  const NlpSolution s = solve_nlp(nlp);
  CHECK(s.status == NlpStatus::kConverged);
  CHECK(std::abs(s.primal[0] - 1.0) < 1e-6);
  CHECK(std::abs(s.primal[1] - 1.0) < 1e-6);
  CHECK(s.kkt_residual <= 1e-8);
}

TEST_CASE("nonconvex equality-constrained problem needs inertia correction") {
  auto nlp = make_dense_ad_nlp<3>(CircleNonconvex{}, 2, {-kInfinity, -kInfinity, -kInfinity},
                                  {kInfinity, kInfinity, kInfinity}, {0.5, -0.3, 0.1});
  const NlpSolution s = solve_nlp(nlp);
  REQUIRE(s.status == NlpStatus::kConverged);
  CHECK(std::abs(s.primal[0] * s.primal[0] + s.primal[1] * s.primal[1] - 2.0) < 1e-8);
}

TEST_CASE("convex QP converges tightly in few iterations") {
  auto nlp = make_dense_ad_nlp<3>(ConvexQp{}, 1, {0.0, 0.0, 0.0}, {kInfinity, kInfinity, kInfinity},
                                  {0.3, 0.3, 0.3});
  NlpOptions opt;
  opt.tolerance = 1e-10;
  const NlpSolution s = solve_nlp(nlp, opt);
  CHECK(s.status == NlpStatus::kConverged);
  CHECK(s.kkt_residual < 1e-10);
  CHECK(s.iterations <= 30);
}

TEST_CASE("fixed variables are eliminated and get bound multipliers") {
  auto nlp = make_dense_ad_nlp<2>(ProjectOntoLine{}, 1, {-kInfinity, 0.2}, {kInfinity, 0.2}, {0.0, 0.2});
  const NlpSolution s = solve_nlp(nlp);
  CHECK(s.status == NlpStatus::kConverged);
  CHECK(s.primal[1] == 0.2);
  CHECK(s.primal[0] == doctest::Approx(0.8).epsilon(1e-9));
  // Stationarity in x2: x2 + y - z_lo + z_hi = 0 with y = -0.8.
  CHECK(s.bound_upper[1] == doctest::Approx(0.6).epsilon(1e-8));
}

TEST_CASE("solve is deterministic") {
  auto nlp = make_dense_ad_nlp<2>(Rosenbrock{}, 0, {-kInfinity, -kInfinity},
                                  {kInfinity, kInfinity}, {-1.2, 1.0});
  const NlpSolution a = solve_nlp(nlp);
  const NlpSolution b = solve_nlp(nlp);
  CHECK(a.primal == b.primal);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("iteration limit is reported as a status") {
  auto nlp = make_dense_ad_nlp<2>(Rosenbrock{}, 0, {-kInfinity, -kInfinity},
                                  {kInfinity, kInfinity}, {-1.2, 1.0});
  NlpOptions opt;
  opt.max_iterations = 2;
  const NlpSolution s = solve_nlp(nlp, opt);
  CHECK(s.status == NlpStatus::kMaxIterations);
}

TEST_CASE("inconsistent constraints are reported, not thrown") {
  auto nlp = make_dense_ad_nlp<2>(Inconsistent{}, 1, {-kInfinity, -kInfinity}, {kInfinity, kInfinity},
                                  {0.5, 0.5});
  const NlpSolution s = solve_nlp(nlp);
  CHECK(s.status != NlpStatus::kConverged);
}

TEST_CASE("differentiate: exact derivatives and NaN detection") {
  auto nlp = make_dense_ad_nlp<1>(SquareAboveOne{}, 0, {-kInfinity}, {kInfinity}, {3.0});
  const std::vector<double> x{3.0};
  const DerivativeBundle d = differentiate(nlp, x);
  CHECK(d.gradient[0] == 6.0);
  CHECK(d.hessian[0] == 2.0);

  auto bad = make_dense_ad_nlp<1>(Absolute{}, 0, {-kInfinity}, {kInfinity}, {0.0});
  const std::vector<double> zero{0.0};
  try {
    differentiate(bad, zero);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonDifferentiable);
  }
}

TEST_CASE("derivative check agrees with central differences") {
  auto nlp = make_dense_ad_nlp<3>(CircleNonconvex{}, 2, {-kInfinity, -kInfinity, -kInfinity},
                                  {kInfinity, kInfinity, kInfinity}, {0.5, -0.3, 0.1});
  const std::vector<double> x{0.7, -0.4, 1.3};
  const std::vector<double> y{0.3, -1.1};
  const DerivativeCheck c = check_derivatives(nlp, x, y);
  CHECK(c.gradient_error < 1e-6);
  CHECK(c.jacobian_error < 1e-6);
  CHECK(c.hessian_error < 1e-6);
}
