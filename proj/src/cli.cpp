#include "bbsoc/cli.hpp"

#include <charconv>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bbsoc/driver.hpp"
#include "bbsoc/error.hpp"
#include "bbsoc/problem_file.hpp"
#include "bbsoc/problems.hpp"
#include "bbsoc/report.hpp"
#include "bbsoc/verify.hpp"

namespace bbsoc {

namespace {

struct SolveArgs {
  std::string problem;
  std::optional<double> nlp_tol;
  std::optional<double> mesh_tol;
  std::optional<double> eta;
  std::optional<double> mu;
  std::optional<double> epsilon;
  std::optional<double> sigma;
  std::optional<int> max_iterations;
  std::string initial_mesh;
  std::string out;
  std::string trajectory_csv;
  std::string structure_csv;
  bool quiet = false;
};

// "KxN": K intervals with N collocation points each.
std::pair<int, int> parse_mesh(const std::string& spec) {
  const auto x = spec.find_first_of("xX");
  int k = 0;
  int n = 0;
  bool ok = x != std::string::npos;
  if (ok) {
    const char* s = spec.data();
    const auto rk = std::from_chars(s, s + x, k);
    const auto rn = std::from_chars(s + x + 1, s + spec.size(), n);
    ok = rk.ec == std::errc() && rk.ptr == s + x && rn.ec == std::errc() && rn.ptr == s + spec.size() && k > 0 &&
         n > 0;
  }
  if (!ok) throw Error(ErrorCode::kInvalidArgument, "--initial-mesh expects KxN with positive integers, got '" + spec + "'");
  return {k, n};
}

SolverOptions options_from(const SolveArgs& a, std::ostream& err) {
  SolverOptions o;
  if (a.nlp_tol) o.nlp_tolerance = *a.nlp_tol;
  if (a.mesh_tol) o.mesh_tolerance = *a.mesh_tol;
  if (a.eta) o.jump.eta = *a.eta;
  if (a.mu) o.jump.mu = *a.mu;
  if (a.epsilon) o.epsilon = *a.epsilon;
  if (a.sigma) o.sigma = *a.sigma;
  if (a.max_iterations) o.max_iterations = *a.max_iterations;
  if (!a.initial_mesh.empty()) std::tie(o.initial_intervals, o.initial_order) = parse_mesh(a.initial_mesh);
  if (!a.quiet) o.log = [&err](const std::string& line) { err << line << '\n'; };
  o.validate();
  o.jump.validate();
  return o;
}

int exit_code(Termination t) { return t == Termination::kConverged ? kExitConverged : kExitNotMet; }

int run_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  const SolverOptions opts = options_from(a, err);
  const OcpDefinition ocp = resolve_problem(a.problem);
  const SolveReport report = solve_bbsoc(ocp, opts);
  const std::string json = report_json(report, opts);
  if (a.out.empty() || a.out == "-") {
    out << json << '\n';
  } else {
    write_text_file(a.out, json + "\n");
  }
  if (!a.trajectory_csv.empty()) {
    std::ostringstream csv;
    write_trajectory_csv(csv, report.solution);
    write_text_file(a.trajectory_csv, csv.str());
  }
  if (!a.structure_csv.empty()) write_text_file(a.structure_csv, report.structure_csv);
  err << report.problem << ": " << to_string(report.termination) << ", J = " << std::setprecision(12)
      << report.objective << ", domains = " << report.partition.num_domains() << '\n';
  if (!report.message.empty() && report.message != to_string(report.termination)) err << report.message << '\n';
  return exit_code(report.termination);
}

int run_verify(const std::vector<std::string>& names, std::ostream& out) {
  for (const std::string& name : names) {
    if (!has_acceptance_checks(name)) {
      throw Error(ErrorCode::kNotFound, "no acceptance checks for '" + name + "'");
    }
  }
  // Independent solves; run them side by side and report in order.
  std::vector<std::future<AcceptanceResult>> jobs;
  for (const std::string& name : names) {
    jobs.push_back(std::async(std::launch::async, [name] { return run_acceptance(name); }));
  }
  bool all = true;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const AcceptanceResult r = jobs[i].get();
    for (const AcceptanceCheck& c : r.checks) {
      out << (c.passed ? "PASS " : "FAIL ") << names[i] << ": " << c.name << " (" << c.detail << ")\n";
    }
    all = all && r.passed();
  }
  return all ? kExitConverged : kExitNotMet;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bang-bang and singular optimal control by multiple-domain LGR collocation", "bbsoc"};
  app.require_subcommand(1);

  SolveArgs solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve a built-in problem or a problem file");
  solve_cmd->add_option("problem", solve.problem, "Built-in problem name or path to a problem file")->required();
  solve_cmd->add_option("--nlp-tol", solve.nlp_tol, "NLP optimality tolerance (default 1e-8)");
  solve_cmd->add_option("--mesh-tol", solve.mesh_tol, "Mesh error tolerance (default 1e-6)");
  solve_cmd->add_option("--eta", solve.eta, "Jump detection threshold (default 0.1)");
  solve_cmd->add_option("--mu", solve.mu, "Bracket safety factor (default 1.5)");
  solve_cmd->add_option("--epsilon", solve.epsilon, "Singular-arc regularization weight (default: per problem)");
  solve_cmd->add_option("--sigma", solve.sigma, "Regularization convergence tolerance (default 1e-6)");
  solve_cmd->add_option("--max-iterations", solve.max_iterations, "Mesh iteration limit (default 25)");
  solve_cmd->add_option("--initial-mesh", solve.initial_mesh, "First mesh as KxN (default 10x4)");
  solve_cmd->add_option("--out", solve.out, "JSON report path (default: standard output)");
  solve_cmd->add_option("--trajectory-csv", solve.trajectory_csv, "Write the trajectory CSV here");
  solve_cmd->add_option("--debug-structure", solve.structure_csv,
                        "Write per-point structure diagnostics of the first mesh as CSV")
      ->expected(0, 1)
      ->default_str("structure.csv");
  solve_cmd->add_flag("-q,--quiet", solve.quiet, "Suppress per-iteration progress on standard error");

  CLI::App* list_cmd = app.add_subcommand("list", "List built-in problems");

  std::vector<std::string> verify_names;
  CLI::App* verify_cmd = app.add_subcommand("verify", "Run acceptance checks of built-in benchmarks");
  verify_cmd->add_option("problems", verify_names, "Benchmark names")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitConverged : kExitError;
  }

  try {
    if (*list_cmd) {
      for (const std::string& name : builtin_problem_names()) out << name << '\n';
      return kExitConverged;
    }
    if (*verify_cmd) return run_verify(verify_names, out);
    if (solve_cmd->count("--debug-structure") > 0 && solve.structure_csv.empty()) solve.structure_csv = "structure.csv";
    return run_solve(solve, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    if (e.code() == ErrorCode::kNotFound) err << "Run 'bbsoc list' for the built-in problems.\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace bbsoc
