#include "bbsoc/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "bbsoc/error.hpp"

namespace bbsoc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool has_singular_domain(const DomainPartition& p) {
  for (const DomainSpec& s : p.domains) {
    if (s.kind() == DomainKind::kSingular) return true;
  }
  return false;
}

void update_targets(RegularizationState& reg, const DomainPartition& part, const TrajectorySolution& sol) {
  for (int d = 0; d < part.num_domains(); ++d) {
    const DomainTrajectory& dom = sol.domains[d];
    const int n = dom.num_collocation();
    const std::span<const double> times(dom.time.data(), static_cast<std::size_t>(n));
    for (std::size_t j = 0; j < part.domains[d].arcs.size(); ++j) {
      if (part.domains[d].arcs[j] != ControlArc::kSingular) continue;
      std::vector<double> u(static_cast<std::size_t>(n));
      for (int l = 0; l < n; ++l) u[l] = dom.controls(l, static_cast<int>(j));
      reg.alpha[d][j] = update_alpha(times, u);
    }
  }
}

std::string format_record(const IterationRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "M=%d D=%d K=%d N=%d nlp=%s(%d) J=%.10g p=%d delta=%.3e e_max=%.3e %.2fs",
                r.mesh_iteration, r.domains, r.intervals, r.collocation_points, to_string(r.nlp_status),
                r.nlp_iterations, r.objective, r.p, r.delta, r.max_error, r.wall_seconds);
  return buf;
}

}  // namespace

int relax_active_brackets(DomainPartition& partition, const TrajectorySolution& sol) {
  const int nd = partition.num_domains();
  if (static_cast<int>(sol.interfaces.size()) != nd + 1) {
    throw Error(ErrorCode::kDimensionMismatch, "relax_active_brackets: solution has a different domain count");
  }
  const double span = sol.tf() - sol.t0();
  const double touch = 1e-6 * span;
  const double gap = 1e-6 * span;
  int moved = 0;
  for (int k = 1; k < nd; ++k) {
    const double t = sol.interfaces[k];
    const double width = partition.upper[k] - partition.lower[k];
    if (t - partition.lower[k] <= touch) {
      const double next = std::max(partition.lower[k] - width, partition.upper[k - 1] + gap);
      if (next < partition.lower[k]) {
        partition.lower[k] = next;
        ++moved;
      }
    }
    if (partition.upper[k] - t <= touch) {
      double ceiling = partition.lower[k + 1];
      // A free final time keeps its own bound clear of this bracket.
      if (k + 1 == nd && partition.lower[nd] < partition.upper[nd]) ceiling = std::min(sol.tf(), partition.upper[nd]);
      const double next = std::min(partition.upper[k] + width, ceiling - gap);
      if (next > partition.upper[k]) {
        partition.upper[k] = next;
        if (k + 1 == nd && partition.lower[nd] < partition.upper[nd]) {
          partition.lower[nd] = std::max(partition.lower[nd], next + gap);
        }
        ++moved;
      }
    }
  }
  return moved;
}

void SolverOptions::validate() const {
  if (!(nlp_tolerance > 0.0) || !(mesh_tolerance > 0.0) || !(sigma > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tolerances must be positive");
  }
  if (epsilon && !(*epsilon > 0.0)) throw Error(ErrorCode::kInvalidWeight, "regularization weight must be > 0");
  if (max_iterations < 1 || nlp_max_iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "iteration limits must be at least 1");
  }
  if (initial_intervals < 1 || initial_order < 1) throw Error(ErrorCode::kInvalidArgument, "bad initial mesh");
  jump.validate();
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::kConverged:
      return "converged";
    case Termination::kStalledRegularization:
      return "stalled-regularization";
    case Termination::kMaxIterations:
      return "max-iterations";
    case Termination::kNlpFailure:
      return "nlp-failure";
  }
  return "unknown";
}

std::vector<double> SolveReport::interface_times() const {
  if (solution.interfaces.size() < 2) return {};
  return std::vector<double>(solution.interfaces.begin() + 1, solution.interfaces.end() - 1);
}

SolveReport solve_bbsoc(const OcpDefinition& ocp, const SolverOptions& opts) {
  opts.validate();
  ocp.validate();
  const auto start = Clock::now();
  SolveReport rep;
  rep.problem = ocp.name;
  rep.epsilon = opts.epsilon.value_or(ocp.regularization_weight);

  NlpOptions nlp_opts;
  nlp_opts.tolerance = opts.nlp_tolerance;
  nlp_opts.max_iterations = opts.nlp_max_iterations;

  DomainPartition part =
      DomainPartition::single(ocp, MeshLayout::uniform(opts.initial_intervals, opts.initial_order));
  GuessFunction guess = default_guess(ocp);
  RegularizationState reg;
  reg.epsilon = rep.epsilon;
  bool singular = false;

  for (int m = 1;; ++m) {
    const auto iter_start = Clock::now();
    std::optional<RegularizationTerms> terms;
    if (singular) terms = augment(reg);
    const CollocationNlp nlp(ocp, part, terms, guess);
    const NlpSolution res = solve_nlp(nlp, nlp_opts);

    IterationRecord rec;
    rec.mesh_iteration = m;
    rec.p = singular ? reg.p : 0;
    rec.domains = part.num_domains();
    for (const DomainSpec& s : part.domains) {
      rec.intervals += s.mesh.num_intervals();
      rec.collocation_points += s.mesh.num_points();
    }
    rec.nlp_status = res.status;
    rec.nlp_iterations = res.iterations;
    rec.objective = res.objective;

    if (res.status != NlpStatus::kConverged) {
      rec.wall_seconds = seconds_since(iter_start);
      rep.iterations.push_back(rec);
      if (opts.log) opts.log(format_record(rec));
      rep.termination = Termination::kNlpFailure;
      rep.message = res.message;
      break;
    }

    TrajectorySolution sol = extract_solution(nlp, res.primal);
    estimate_costates(nlp, res.multipliers, sol);
    const ErrorEstimate est = estimate_error(sol, ocp);
    double delta = 0.0;
    if (singular) {
      reg.delta = nlp.penalties(res.primal);
      delta = std::accumulate(reg.delta.begin(), reg.delta.end(), 0.0);
      reg.history.push_back(delta);
    }
    rec.delta = delta;
    rec.max_error = est.max_error();
    rec.objective = sol.objective;
    rec.wall_seconds = seconds_since(iter_start);
    rep.iterations.push_back(rec);
    if (opts.log) opts.log(format_record(rec));

    rep.solution = sol;
    rep.partition = part;
    rep.objective = sol.objective;
    rep.delta = delta;
    rep.max_error = rec.max_error;
    rep.regularization_iterations = singular ? reg.p : 0;

    bool decomposed = false;
    if (m == 1 && opts.detect_structure) {
      const SwitchingData data = switching_data(sol, ocp);
      rep.linear_components = linear_components(data, opts.classification);
      const bool any_linear =
          std::find(rep.linear_components.begin(), rep.linear_components.end(), true) != rep.linear_components.end();
      if (any_linear) {
        rep.discontinuities = detect_discontinuities(sol, ocp, opts.jump, rep.linear_components);
        rep.classification = classify_intervals(sol, ocp, rep.discontinuities, opts.classification);
      }
      std::ostringstream csv;
      write_structure_csv(csv, sol, ocp, opts.jump);
      rep.structure_csv = csv.str();
      if (!rep.discontinuities.empty()) {
        part = decompose(rep.discontinuities, rep.classification, part, sol);
        decomposed = true;
        singular = has_singular_domain(part);
        if (singular) {
          reg.p = 1;
          reg.alpha.assign(static_cast<std::size_t>(part.num_domains()),
                           std::vector<std::optional<MonotoneCubicSpline>>(static_cast<std::size_t>(ocp.n_u)));
        }
      }
    }

    if (!decomposed) {
      const RegularizationStatus rs =
          singular ? check_convergence(reg, opts.sigma) : RegularizationStatus::kConverged;
      if (rs == RegularizationStatus::kConverged && rec.max_error <= opts.mesh_tolerance) {
        rep.termination = Termination::kConverged;
        break;
      }
      if (rs == RegularizationStatus::kStalled) {
        rep.termination = Termination::kStalledRegularization;
        break;
      }
    }
    if (m >= opts.max_iterations) {
      rep.termination = Termination::kMaxIterations;
      break;
    }

    guess = interpolating_guess(sol);
    if (!decomposed && opts.relax_active_brackets && part.num_domains() > 1) {
      rep.iterations.back().relaxed_brackets = relax_active_brackets(part, sol);
    }
    if (!decomposed) {
      for (int k = 0; k <= part.num_domains(); ++k) {
        part.interfaces[k] = std::clamp(sol.interfaces[k], part.lower[k], part.upper[k]);
      }
    }
    if (!decomposed) {
      if (singular) {
        update_targets(reg, part, sol);
        ++reg.p;
      }
      if (rec.max_error > opts.mesh_tolerance) part = refine(part, est, opts.mesh_tolerance, opts.limits);
    }
  }
  rep.wall_seconds = seconds_since(start);
  if (rep.message.empty()) rep.message = to_string(rep.termination);
  return rep;
}

}  // namespace bbsoc
