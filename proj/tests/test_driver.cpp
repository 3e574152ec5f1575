#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bbsoc/driver.hpp"
#include "bbsoc/error.hpp"
#include "bbsoc/problems.hpp"
#include "bbsoc/report.hpp"
#include "bbsoc/verify.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace bbsoc;

namespace {

const SolveReport& robot_arm_report() {
  static const SolveReport r = solve_bbsoc(builtin_problem("robot_arm"));
  return r;
}

const SolveReport& jacobson_report() {
  static const SolveReport r = solve_bbsoc(builtin_problem("jacobson"));
  return r;
}

DomainPartition three_domains() {
  DomainPartition p;
  p.interfaces = {0.0, 3.0, 6.0, 10.0};
  p.lower = {0.0, 2.0, 5.0, 8.0};
  p.upper = {0.0, 4.0, 7.0, 12.0};
  for (int d = 0; d < 3; ++d) p.domains.push_back({{ControlArc::kRegular}, MeshLayout::uniform(2, 3)});
  return p;
}

TrajectorySolution with_interfaces(std::vector<double> interfaces) {
  TrajectorySolution sol;
  sol.interfaces = std::move(interfaces);
  return sol;
}

}  // namespace

TEST_CASE("termination names") {
  CHECK(std::string(to_string(Termination::kConverged)) == "converged");
  CHECK(std::string(to_string(Termination::kStalledRegularization)) == "stalled-regularization");
  CHECK(std::string(to_string(Termination::kMaxIterations)) == "max-iterations");
  CHECK(std::string(to_string(Termination::kNlpFailure)) == "nlp-failure");
}

TEST_CASE("solver option validation") {
  SolverOptions o;
  CHECK_NOTHROW(o.validate());
  o.mesh_tolerance = 0.0;
  CHECK_THROWS_AS(o.validate(), Error);
  o = {};
  o.epsilon = -1.0;
  CHECK_THROWS_AS(o.validate(), Error);
  o = {};
  o.max_iterations = 0;
  CHECK_THROWS_AS(o.validate(), Error);
  o = {};
  o.initial_order = 0;
  CHECK_THROWS_AS(o.validate(), Error);
  o = {};
  o.jump.mu = 0.9;
  CHECK_THROWS_AS(solve_bbsoc(builtin_problem("jacobson"), o), Error);
}

TEST_CASE("robot arm: bang-bang structure and iteration records") {
  const SolveReport& r = robot_arm_report();
  CHECK(r.termination == Termination::kConverged);
  CHECK(r.objective == doctest::Approx(9.140912).epsilon(1e-5));
  CHECK(r.discontinuities.size() == 5);
  CHECK(r.partition.num_domains() == 6);
  CHECK(r.interface_times().size() == 5);
  CHECK_FALSE(r.regularized());
  REQUIRE_FALSE(r.iterations.empty());
  CHECK(r.iterations.size() <= static_cast<std::size_t>(SolverOptions{}.max_iterations) + 1);
  CHECK(r.iterations.front().domains == 1);
  for (std::size_t k = 0; k < r.iterations.size(); ++k) {
    CHECK(r.iterations[k].mesh_iteration == static_cast<int>(k) + 1);
    CHECK(r.iterations[k].nlp_status == NlpStatus::kConverged);
    if (k > 0) CHECK(r.iterations[k].domains == 6);
  }
  CHECK(r.max_error <= SolverOptions{}.mesh_tolerance);
}

TEST_CASE("jacobson: singular domain is regularized") {
  const SolveReport& r = jacobson_report();
  CHECK(r.termination == Termination::kConverged);
  REQUIRE(r.partition.num_domains() == 2);
  CHECK(r.partition.domains[1].kind() == DomainKind::kSingular);
  CHECK(r.regularized());
  CHECK(r.epsilon == 1e-8);
  CHECK(r.delta <= SolverOptions{}.sigma);
  CHECK(r.objective == doctest::Approx(0.37699193).epsilon(1e-6));
  CHECK(r.interface_times()[0] == doctest::Approx(1.41376409).epsilon(1e-4));
  // p counts up by one per mesh iteration once regularization starts.
  for (std::size_t k = 1; k < r.iterations.size(); ++k) CHECK(r.iterations[k].p == static_cast<int>(k));
}

TEST_CASE("structure detection runs once") {
  const SolveReport& r = jacobson_report();
  std::set<int> counts;
  for (const IterationRecord& it : r.iterations) counts.insert(it.domains);
  CHECK(counts == std::set<int>{1, 2});
}

TEST_CASE("a smooth problem is never decomposed or regularized") {
  const SolveReport r = solve_bbsoc(builtin_problem("entry_vehicle"));
  CHECK(r.termination == Termination::kConverged);
  CHECK(r.discontinuities.empty());
  CHECK(r.partition.num_domains() == 1);
  CHECK_FALSE(r.regularized());
  for (const IterationRecord& it : r.iterations) {
    CHECK(it.domains == 1);
    CHECK(it.p == 0);
    CHECK(it.delta == 0.0);
  }
  for (bool linear : r.linear_components) CHECK_FALSE(linear);
}

TEST_CASE("options change the run") {
  SUBCASE("detection disabled keeps one domain") {
    SolverOptions o;
    o.detect_structure = false;
    o.max_iterations = 3;
    const SolveReport r = solve_bbsoc(builtin_problem("robot_arm"), o);
    CHECK(r.partition.num_domains() == 1);
    CHECK(r.discontinuities.empty());
  }
  SUBCASE("iteration cap") {
    SolverOptions o;
    o.max_iterations = 1;
    const SolveReport r = solve_bbsoc(builtin_problem("robot_arm"), o);
    CHECK(r.termination == Termination::kMaxIterations);
    CHECK(r.iterations.size() == 1);
    CHECK(r.solution.domains.size() == 1);
  }
  SUBCASE("NLP failure is reported") {
    SolverOptions o;
    o.nlp_max_iterations = 2;
    const SolveReport r = solve_bbsoc(builtin_problem("goddard_rocket"), o);
    CHECK(r.termination == Termination::kNlpFailure);
    CHECK(r.iterations.size() == 1);
    CHECK_FALSE(r.message.empty());
  }
  SUBCASE("log receives one line per iteration") {
    SolverOptions o;
    std::vector<std::string> lines;
    o.log = [&](const std::string& s) { lines.push_back(s); };
    const SolveReport r = solve_bbsoc(builtin_problem("jacobson"), o);
    CHECK(lines.size() == r.iterations.size());
    CHECK(lines.front().rfind("M=1 ", 0) == 0);
  }
}

TEST_CASE("solves are deterministic") {
  const SolveReport a = solve_bbsoc(builtin_problem("jacobson"));
  const SolveReport& b = jacobson_report();
  CHECK(a.objective == b.objective);
  CHECK(a.solution.interfaces == b.solution.interfaces);
  REQUIRE(a.solution.domains.size() == b.solution.domains.size());
  for (std::size_t d = 0; d < a.solution.domains.size(); ++d) {
    CHECK(a.solution.domains[d].states == b.solution.domains[d].states);
    CHECK(a.solution.domains[d].controls == b.solution.domains[d].controls);
  }
}

TEST_CASE("active brackets are widened without crossing neighbours") {
  SUBCASE("upper bound touched") {
    DomainPartition p = three_domains();
    CHECK(relax_active_brackets(p, with_interfaces({0.0, 4.0, 6.0, 10.0})) == 1);
    // Width 2 would reach 6, but the next bracket starts at 5.
    CHECK(p.upper[1] < 5.0);
    CHECK(p.upper[1] > 4.9);
    CHECK(p.lower[1] == 2.0);
    CHECK_NOTHROW(p.validate(1));
  }
  SUBCASE("lower bound touched") {
    DomainPartition p = three_domains();
    CHECK(relax_active_brackets(p, with_interfaces({0.0, 3.0, 5.0, 10.0})) == 1);
    // Width 2 would reach 3, but the previous bracket ends at 4.
    CHECK(p.lower[2] == doctest::Approx(4.0));
    CHECK_NOTHROW(p.validate(1));
  }
  SUBCASE("last interface with a free final time") {
    DomainPartition p = three_domains();
    CHECK(relax_active_brackets(p, with_interfaces({0.0, 3.0, 7.0, 10.0})) == 1);
    CHECK(p.upper[2] == doctest::Approx(9.0));
    CHECK(p.lower[3] > p.upper[2]);
    CHECK_NOTHROW(p.validate(1));
  }
  SUBCASE("interior solutions are left alone") {
    DomainPartition p = three_domains();
    CHECK(relax_active_brackets(p, with_interfaces({0.0, 3.0, 6.0, 10.0})) == 0);
  }
  SUBCASE("domain count must match") {
    DomainPartition p = three_domains();
    CHECK_THROWS_AS(relax_active_brackets(p, with_interfaces({0.0, 10.0})), Error);
  }
}

TEST_CASE("JSON report") {
  const SolveReport& r = robot_arm_report();
  const nlohmann::json doc = nlohmann::json::parse(report_json(r, SolverOptions{}));
  CHECK(doc["schema"] == kReportSchema);
  CHECK(doc["problem"] == "robot_arm");
  CHECK(doc["termination"] == "converged");
  CHECK(doc["objective"].get<double>() == r.objective);
  CHECK(doc["num_domains"] == 6);
  CHECK(doc["structure"]["num_discontinuities"] == 5);
  CHECK(doc["iterations"].size() == r.iterations.size());
  CHECK(doc["iterations"][0]["M"] == 1);
  CHECK(doc["iterations"][0]["K"] == 40);
  CHECK(doc["iterations"][0]["intervals"] == 10);
  const std::vector<double> ts = doc["interface_times"].get<std::vector<double>>();
  CHECK(ts == r.interface_times());
  const nlohmann::json& d0 = doc["domains"][0];
  CHECK(d0["kind"] == "bang");
  CHECK(d0["states"].size() == r.solution.domains[0].states.rows());
  CHECK(d0["states"][3][1].get<double>() == r.solution.domains[0].states(3, 1));
  CHECK(doc["options"]["eta"] == 0.1);
}

TEST_CASE("trajectory CSV") {
  const SolveReport& r = jacobson_report();
  std::ostringstream out;
  write_trajectory_csv(out, r.solution);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "domain,t,x1,x2,u1,lambda1,lambda2");
  int rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    ++rows;
    last = line;
  }
  int expected = 0;
  for (const DomainTrajectory& d : r.solution.domains) expected += d.num_collocation() + 1;
  CHECK(rows == expected);
  CHECK(last.rfind("1,5,", 0) == 0);
  CHECK(last.find(",,") != std::string::npos);
}

TEST_CASE("write_text_file reports I/O errors") {
  CHECK_THROWS_AS(write_text_file("/nonexistent-dir/x.json", "{}"), Error);
}

TEST_CASE("acceptance checks") {
  const std::vector<AcceptanceCheck> ok = acceptance_checks(robot_arm_report());
  CHECK(ok.size() == 9);
  for (const AcceptanceCheck& c : ok) {
    CAPTURE(c.name);
    CHECK(c.passed);
  }
  SolveReport tampered = robot_arm_report();
  tampered.objective += 1e-3;
  tampered.discontinuities.pop_back();
  int failed = 0;
  for (const AcceptanceCheck& c : acceptance_checks(tampered)) failed += c.passed ? 0 : 1;
  CHECK(failed == 2);

  SolveReport unknown;
  unknown.problem = "nope";
  CHECK_THROWS_AS(acceptance_checks(unknown), Error);
  CHECK_FALSE(has_acceptance_checks("nope"));
  CHECK_THROWS_AS(run_acceptance("nope"), Error);
  CHECK(acceptance_budget("goddard_rocket") == 120.0);
  CHECK(jacobson_singular_gap(robot_arm_report()) < 0.0);
  CHECK(jacobson_singular_gap(jacobson_report()) >= 0.0);
}
