#include "bbsoc/report.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>

#include "bbsoc/error.hpp"
#include "json.hpp"

namespace bbsoc {

namespace {

using nlohmann::json;

json matrix_rows(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json options_json(const SolverOptions& o) {
  return {{"nlp_tolerance", o.nlp_tolerance},
          {"nlp_max_iterations", o.nlp_max_iterations},
          {"mesh_tolerance", o.mesh_tolerance},
          {"eta", o.jump.eta},
          {"mu", o.jump.mu},
          {"jump_orders", o.jump.orders},
          {"sigma", o.sigma},
          {"max_iterations", o.max_iterations},
          {"initial_intervals", o.initial_intervals},
          {"initial_order", o.initial_order},
          {"min_order", o.limits.min_order},
          {"max_order", o.limits.max_order},
          {"detect_structure", o.detect_structure},
          {"relax_active_brackets", o.relax_active_brackets}};
}

json arcs_json(const std::vector<ControlArc>& arcs) {
  json out = json::array();
  for (ControlArc a : arcs) out.push_back(to_string(a));
  return out;
}

}  // namespace

std::string report_json(const SolveReport& r, const SolverOptions& options, int indent) {
  const TrajectorySolution& sol = r.solution;
  json doc;
  doc["schema"] = kReportSchema;
  doc["problem"] = r.problem;
  doc["termination"] = to_string(r.termination);
  doc["message"] = r.message;
  doc["objective"] = r.objective;
  doc["interface_times"] = r.interface_times();
  doc["t0"] = sol.interfaces.empty() ? 0.0 : sol.t0();
  doc["tf"] = sol.interfaces.empty() ? 0.0 : sol.tf();
  doc["epsilon"] = r.epsilon;
  doc["delta"] = r.delta;
  doc["regularization_iterations"] = r.regularization_iterations;
  doc["regularized"] = r.regularized();
  doc["max_error"] = r.max_error;
  doc["mesh_iterations"] = r.iterations.size();
  doc["wall_seconds"] = r.wall_seconds;
  doc["options"] = options_json(options);

  json structure;
  structure["num_discontinuities"] = r.discontinuities.size();
  structure["linear_components"] = r.linear_components;
  json jumps = json::array();
  for (const Discontinuity& d : r.discontinuities) {
    jumps.push_back({{"tau", d.location},
                     {"tau_lower", d.lower},
                     {"tau_upper", d.upper},
                     {"magnitude", d.magnitude},
                     {"component", d.component}});
  }
  structure["discontinuities"] = std::move(jumps);
  json classes = json::array();
  for (const IntervalClassification& c : r.classification) {
    json ev = json::array();
    for (const ArcEvidence& e : c.evidence) {
      ev.push_back({{"mean_abs_phi", e.mean_abs_phi},
                    {"max_abs_phi", e.max_abs_phi},
                    {"positive", e.positive},
                    {"negative", e.negative},
                    {"near_zero", e.near_zero},
                    {"max_abs_huu", e.max_abs_huu}});
    }
    classes.push_back({{"tau_a", c.tau_a}, {"tau_b", c.tau_b}, {"arcs", arcs_json(c.arcs)}, {"evidence", ev}});
  }
  structure["classification"] = std::move(classes);
  doc["structure"] = std::move(structure);

  json domains = json::array();
  for (int d = 0; d < r.partition.num_domains(); ++d) {
    const DomainSpec& spec = r.partition.domains[d];
    json dj{{"index", d},
            {"kind", to_string(spec.kind())},
            {"arcs", arcs_json(spec.arcs)},
            {"mesh_breaks", spec.mesh.breaks},
            {"mesh_orders", spec.mesh.orders},
            {"interface_lower", r.partition.lower[d + 1]},
            {"interface_upper", r.partition.upper[d + 1]}};
    if (d < static_cast<int>(sol.domains.size())) {
      const DomainTrajectory& dom = sol.domains[d];
      dj["t_start"] = dom.t_start;
      dj["t_end"] = dom.t_end;
      dj["time"] = dom.time;
      dj["states"] = matrix_rows(dom.states);
      dj["controls"] = matrix_rows(dom.controls);
      dj["costates"] = matrix_rows(dom.costates);
    }
    domains.push_back(std::move(dj));
  }
  doc["num_domains"] = r.partition.num_domains();
  doc["domains"] = std::move(domains);

  json iters = json::array();
  for (const IterationRecord& it : r.iterations) {
    iters.push_back({{"M", it.mesh_iteration},
                     {"p", it.p},
                     {"delta", it.delta},
                     {"max_error", it.max_error},
                     {"K", it.collocation_points},
                     {"intervals", it.intervals},
                     {"domains", it.domains},
                     {"relaxed_brackets", it.relaxed_brackets},
                     {"nlp_status", to_string(it.nlp_status)},
                     {"nlp_iterations", it.nlp_iterations},
                     {"objective", it.objective},
                     {"wall_seconds", it.wall_seconds}});
  }
  doc["iterations"] = std::move(iters);
  return doc.dump(indent);
}

void write_trajectory_csv(std::ostream& out, const TrajectorySolution& sol) {
  out << "domain,t";
  for (int i = 1; i <= sol.n_x; ++i) out << ",x" << i;
  for (int j = 1; j <= sol.n_u; ++j) out << ",u" << j;
  for (int i = 1; i <= sol.n_x; ++i) out << ",lambda" << i;
  out << '\n';
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t d = 0; d < sol.domains.size(); ++d) {
    const DomainTrajectory& dom = sol.domains[d];
    const int n = dom.num_collocation();
    const bool has_costates = dom.costates.rows() == n + 1;
    for (int l = 0; l <= n; ++l) {
      out << d << ',' << dom.time[l];
      for (int i = 0; i < sol.n_x; ++i) out << ',' << dom.states(l, i);
      for (int j = 0; j < sol.n_u; ++j) {
        out << ',';
        if (l < n) out << dom.controls(l, j);
      }
      for (int i = 0; i < sol.n_x; ++i) {
        out << ',';
        if (has_costates) out << dom.costates(l, i);
      }
      out << '\n';
    }
  }
  out.precision(old);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
  if (!f) throw Error(ErrorCode::kIo, "failed writing " + path);
}

}  // namespace bbsoc
