// Acceptance suite: one PASS/FAIL line per criterion, sub-check details
// indented below it. Exit status is the number of failed criteria.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "bbsoc/error.hpp"
#include "bbsoc/lgr.hpp"
#include "bbsoc/nlp.hpp"
#include "bbsoc/nlp_ad.hpp"
#include "bbsoc/problems.hpp"
#include "bbsoc/regularization.hpp"
#include "bbsoc/structure.hpp"
#include "bbsoc/transcription.hpp"
#include "bbsoc/verify.hpp"

using namespace bbsoc;

namespace {

struct SubCheck {
  std::string name;
  bool passed;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

int report(int id, const std::string& title, const std::vector<SubCheck>& checks) {
  const bool ok = std::all_of(checks.begin(), checks.end(), [](const SubCheck& c) { return c.passed; });
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, title.c_str());
  for (const SubCheck& c : checks) {
    std::printf("    %s %s: %s\n", c.passed ? "ok  " : "FAIL", c.name.c_str(), c.detail.c_str());
  }
  std::fflush(stdout);
  return ok ? 0 : 1;
}

std::vector<SubCheck> benchmark(const char* problem) {
  std::vector<SubCheck> out;
  try {
    const AcceptanceResult r = run_acceptance(problem);
    for (const AcceptanceCheck& c : r.checks) out.push_back({c.name, c.passed, c.detail});
  } catch (const std::exception& e) {
    out.push_back({"solve", false, e.what()});
  }
  return out;
}

// Property suites ------------------------------------------------------------

SubCheck lgr_quadrature() {
  double worst = 0.0;
  for (int n = 1; n <= 15; ++n) {
    const QuadratureRule r = lgr_rule(n);
    for (int q = 0; q <= 2 * n - 2; ++q) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.points[i], q);
      const double exact = q % 2 == 1 ? 0.0 : 2.0 / (q + 1.0);
      worst = std::max(worst, std::abs(s - exact));
    }
  }
  return {"LGR quadrature exact through degree 2N-2, N = 1..15", worst < 1e-12, fmt("max error %.2e", worst)};
}

SubCheck differentiation_matrix_exactness() {
  double worst = 0.0;
  for (int n = 1; n <= 15; ++n) {
    const QuadratureRule r = lgr_rule(n);
    const DifferentiationMatrix d = differentiation_matrix(r);
    const std::vector<double> s = r.support();
    for (int q = 0; q <= n; ++q) {
      for (int l = 0; l < n; ++l) {
        double v = 0.0;
        for (int j = 0; j <= n; ++j) v += d(l, j) * std::pow(s[j], q);
        const double exact = q == 0 ? 0.0 : q * std::pow(s[l], q - 1);
        worst = std::max(worst, std::abs(v - exact) / std::max(1.0, static_cast<double>(q)));
      }
    }
  }
  return {"differentiation matrix exact on degree <= N, N = 1..15", worst < 1e-9, fmt("max error %.2e", worst)};
}

SubCheck jump_annihilation() {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> step(0.05, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    for (int m = 1; m <= 4; ++m) {
      std::vector<double> t{-0.3};
      for (int j = 0; j < m; ++j) t.push_back(t.back() + step(rng));
      const std::vector<double> c = jump_coefficients(t, m);
      double factorial = 1.0;
      for (int k = 2; k <= m; ++k) factorial *= k;
      for (int q = 0; q <= m; ++q) {
        double sum = 0.0;
        for (int j = 0; j <= m; ++j) sum += c[j] * std::pow(t[j], q);
        worst = std::max(worst, std::abs(sum - (q < m ? 0.0 : factorial)) / factorial);
      }
    }
  }
  return {"jump coefficients annihilate degree < m and give m! on degree m", worst < 1e-9,
          fmt("max error %.2e", worst)};
}

SubCheck minmod_table() {
  struct Row {
    std::vector<double> in;
    double expected;
  };
  const std::vector<Row> rows{{{1.0, 2.0, 3.0}, 1.0}, {{-3.0, -1.0, -2.0}, -1.0}, {{1.0, -1.0}, 0.0},
                              {{0.0, 1.0}, 0.0},      {{0.0, -1.0}, 0.0},         {{2.5}, 2.5},
                              {{}, 0.0}};
  int bad = 0;
  for (const Row& r : rows) bad += minmod(r.in) == r.expected ? 0 : 1;
  return {"minmod branch table", bad == 0, std::to_string(rows.size() - bad) + "/" + std::to_string(rows.size()) + " rows"};
}

SubCheck ad_versus_finite_differences() {
  double worst = 0.0;
  std::string where;
  for (const std::string& name : builtin_problem_names()) {
    const OcpDefinition ocp = builtin_problem(name);
    // A bang domain followed by a regularized singular one exercises every term.
    DomainPartition p = DomainPartition::single(ocp, MeshLayout::uniform(2, 3));
    const double end = p.interfaces[1];
    const double split = 0.5 * (ocp.t0.value + ocp.tf.value);
    p.interfaces = {p.interfaces[0], split, end};
    const double lo = std::max(split - 0.5, p.upper[0]);
    const double hi = std::min(split + 0.5, end);
    p.lower = {p.lower[0], lo, std::max(p.lower[1], hi)};
    p.upper = {p.upper[0], hi, p.upper[1]};
    DomainSpec s;
    s.arcs.assign(static_cast<std::size_t>(ocp.n_u), ControlArc::kSingular);
    s.mesh = MeshLayout::uniform(1, 4);
    p.domains.push_back(s);
    RegularizationTerms terms;
    terms.epsilon = 1e-2;
    CollocationNlp nlp(ocp, p, terms);

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<double> lo_b(nlp.num_variables()), hi_b(nlp.num_variables());
    nlp.bounds(lo_b, hi_b);
    std::vector<double> x = nlp.initial_point();
    const std::vector<double> scale = nlp.variable_scaling();
    for (int i = 0; i < nlp.num_variables(); ++i) {
      if (lo_b[i] == hi_b[i]) continue;
      x[i] = std::clamp(x[i] + 0.05 * scale[i] * unit(rng), lo_b[i], hi_b[i]);
    }
    std::vector<double> y(nlp.num_constraints());
    for (double& v : y) v = unit(rng);
    const DerivativeCheck c = check_derivatives(nlp, x, y);
    const double e = std::max({c.gradient_error, c.jacobian_error, c.hessian_error});
    if (e >= worst) {
      worst = e;
      where = name;
    }
  }
  return {"AD vs central differences on all built-ins (relative)", worst < 1e-6,
          fmt("max error %.2e", worst) + " (" + where + ")"};
}

// x' = u, cost (x^2 + u^2) / 2 on [0, 1], x(0) = 1: lambda = sinh(1 - t) / cosh(1).
struct ScalarLqr {
  template <class T>
  void dynamics(std::span<const T>, std::span<const T> u, const T&, std::span<T> out) const {
    out[0] = u[0];
  }
  template <class T>
  T lagrange(std::span<const T> x, std::span<const T> u, const T&) const {
    return 0.5 * (x[0] * x[0] + u[0] * u[0]);
  }
};

SubCheck lqr_costate() {
  OcpDefinition ocp;
  ocp.name = "lqr";
  ocp.n_x = 1;
  ocp.n_u = 1;
  ocp.state_names = {"x"};
  ocp.control_names = {"u"};
  ocp.u_min = {-kInfinity};
  ocp.u_max = {kInfinity};
  ocp.initial_state = {1.0};
  ocp.final_state = {std::nullopt};
  ocp.tf = TimeSpec::fixed(1.0);
  ocp.has_lagrange = true;
  ocp.functions = make_ocp_functions(ScalarLqr{});
  CollocationNlp nlp(ocp, DomainPartition::single(ocp, MeshLayout::uniform(4, 6)));
  NlpOptions opts;
  opts.tolerance = 1e-10;
  const NlpSolution res = solve_nlp(nlp, opts);
  if (res.status != NlpStatus::kConverged) return {"LQR costate oracle", false, "NLP did not converge"};
  TrajectorySolution sol = extract_solution(nlp, res.primal);
  estimate_costates(nlp, res.multipliers, sol);
  const DomainTrajectory& d = sol.domains[0];
  double worst = 0.0;
  for (int l = 0; l <= d.num_collocation(); ++l) {
    worst = std::max(worst, std::abs(d.costates(l, 0) - std::sinh(1.0 - d.time[l]) / std::cosh(1.0)));
  }
  return {"LQR costate oracle", worst < 1e-4, fmt("max |lambda - exact| %.2e", worst)};
}

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

SubCheck nlp_kkt() {
  const NlpSolution a = solve_nlp(make_dense_ad_nlp<1>(SquareAboveOne{}, 0, {1.0}, {kInfinity}, {3.0}));
  const NlpSolution b = solve_nlp(
      make_dense_ad_nlp<2>(ProjectOntoLine{}, 1, {-kInfinity, -kInfinity}, {kInfinity, kInfinity}, {3.0, -2.0}));
  const NlpSolution c = solve_nlp(
      make_dense_ad_nlp<2>(Rosenbrock{}, 0, {-kInfinity, -kInfinity}, {kInfinity, kInfinity}, {-1.2, 1.0}));
  const double worst = std::max({a.kkt_residual, b.kkt_residual, c.kkt_residual});
  const bool all_converged = a.status == NlpStatus::kConverged && b.status == NlpStatus::kConverged &&
                             c.status == NlpStatus::kConverged;
  const bool right = std::abs(a.primal[0] - 1.0) < 1e-6 && std::abs(b.primal[0] - 0.5) < 1e-6 &&
                     std::abs(c.primal[0] - 1.0) < 1e-6 && std::abs(c.primal[1] - 1.0) < 1e-6;
  return {"NLP KKT residual on three analytic problems", all_converged && right && worst <= 1e-8,
          fmt("max KKT residual %.2e", worst) + (right ? "" : ", wrong optimum")};
}

SubCheck penalty_exactness() {
  // u(t) = sum c_k t^k of degree N-1 on [t_a, t_b], alpha = 0 or a line.
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const double ta = 0.3;
  const double tb = 2.1;
  const double eps = 0.7;
  double worst = 0.0;
  for (int n = 1; n <= 12; ++n) {
    const QuadratureRule& rule = cached_lgr_rule(n);
    std::vector<double> c(static_cast<std::size_t>(n));
    for (double& v : c) v = coef(rng);
    const MonotoneCubicSpline line({ta, tb}, {0.2, -0.4});
    for (const MonotoneCubicSpline* alpha : {static_cast<const MonotoneCubicSpline*>(nullptr), &line}) {
      // A linear target needs u - alpha of degree N-1 too.
      if (alpha != nullptr && n == 1) continue;
      std::vector<double> d = c;
      if (alpha != nullptr) {
        const double slope = (-0.4 - 0.2) / (tb - ta);
        d[0] -= 0.2 - slope * ta;
        d[1] -= slope;
      }
      std::vector<double> u;
      for (double tau : rule.points) {
        const double t = affine_map(tau, ta, tb);
        double v = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) v += c[k] * std::pow(t, static_cast<double>(k));
        u.push_back(v);
      }
      // (eps / 2) * integral of (sum d_k t^k)^2.
      double exact = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = 0; j < d.size(); ++j) {
          const double p = static_cast<double>(i + j + 1);
          exact += d[i] * d[j] * (std::pow(tb, p) - std::pow(ta, p)) / p;
        }
      }
      exact *= 0.5 * eps;
      const double got = penalty_value(u, rule, ta, tb, alpha, eps);
      worst = std::max(worst, std::abs(got - exact) / std::max(1.0, std::abs(exact)));
    }
  }
  return {"penalty quadrature exact on polynomial integrands", worst < 1e-12, fmt("max error %.2e", worst)};
}

std::vector<SubCheck> property_suites() {
  const std::vector<std::function<SubCheck()>> suites{lgr_quadrature, differentiation_matrix_exactness,
                                                      jump_annihilation, minmod_table, ad_versus_finite_differences,
                                                      lqr_costate, nlp_kkt, penalty_exactness};
  std::vector<SubCheck> out;
  for (const auto& s : suites) {
    try {
      out.push_back(s());
    } catch (const std::exception& e) {
      out.push_back({"suite", false, e.what()});
    }
  }
  return out;
}

}  // namespace

int main() {
  int failed = 0;
  failed += report(1, "robot arm: cost, five switch times, five first-mesh jumps", benchmark("robot_arm"));
  failed += report(2, "Goddard rocket: switch times, final time, cost, regularization, singular surface",
                   benchmark("goddard_rocket"));
  failed += report(3, "Jacobson: switch time, cost, singular control u = x1", benchmark("jacobson"));
  failed += report(4, "entry vehicle: no jumps, one domain, no regularization, cost", benchmark("entry_vehicle"));
  failed += report(5, "property suites", property_suites());
  std::printf("%d of 5 criteria failed\n", failed);
  return failed;
}
