#include "bbsoc/lgr.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "bbsoc/error.hpp"

namespace bbsoc {

void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0;
  double p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  p = p1;
  // derivative from the standard identity, with the endpoint limits handled exactly
  if (std::abs(1.0 - x * x) < 1e-300) {
    const double sign = (x > 0.0 || n % 2 == 1) ? 1.0 : -1.0;
    dp = sign * 0.5 * n * (n + 1.0);
  } else {
    dp = n * (p0 - x * p1) / (1.0 - x * x);
  }
}

std::vector<double> QuadratureRule::support() const {
  std::vector<double> s = points;
  s.push_back(1.0);
  return s;
}

QuadratureRule lgr_rule(int n) {
  if (n < 1) throw Error(ErrorCode::kInvalidOrder, "LGR order must be >= 1, got " + std::to_string(n));
  QuadratureRule rule;
  rule.order = n;
  rule.points.assign(static_cast<std::size_t>(n), -1.0);
  rule.weights.assign(static_cast<std::size_t>(n), 2.0 / (static_cast<double>(n) * n));

  const int free_nodes = n - 1;
  if (free_nodes > 0) {
    // Gauss nodes for the weight (1 + tau): Jacobi(alpha = 0, beta = 1) recurrence.
    Eigen::VectorXd diag(free_nodes);
    Eigen::VectorXd sub(std::max(free_nodes - 1, 0));
    for (int k = 0; k < free_nodes; ++k) diag(k) = 1.0 / ((2.0 * k + 1.0) * (2.0 * k + 3.0));
    for (int k = 1; k < free_nodes; ++k) sub(k - 1) = std::sqrt(k * (k + 1.0)) / (2.0 * k + 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    Eigen::VectorXd roots = eig.eigenvalues();
    std::sort(roots.data(), roots.data() + roots.size());
    for (int k = 0; k < free_nodes; ++k) {
      double x = roots(k);
      // one Newton polish on P_{n-1} + P_n
      double pa, dpa, pb, dpb;
      legendre(n - 1, x, pa, dpa);
      legendre(n, x, pb, dpb);
      const double step = (pa + pb) / (dpa + dpb);
      if (std::isfinite(step) && std::abs(step) < 1e-6) x -= step;
      rule.points[static_cast<std::size_t>(k + 1)] = x;
      double p_nm1, dummy;
      legendre(n - 1, x, p_nm1, dummy);
      rule.weights[static_cast<std::size_t>(k + 1)] =
          (1.0 - x) / (static_cast<double>(n) * n * p_nm1 * p_nm1);
    }
  }
  rule.support_barycentric = barycentric_weights(rule.support());
  return rule;
}

const QuadratureRule& cached_lgr_rule(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<QuadratureRule>(lgr_rule(n));
  return *slot;
}

std::vector<double> barycentric_weights(std::span<const double> nodes) {
  const std::size_t n = nodes.size();
  std::vector<double> w(n, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i != j) w[j] *= nodes[j] - nodes[i];
    }
    w[j] = 1.0 / w[j];
  }
  return w;
}

DifferentiationMatrix differentiation_matrix(const QuadratureRule& rule) {
  if (rule.order < 1 || static_cast<int>(rule.points.size()) != rule.order) {
    throw Error(ErrorCode::kInvalidArgument, "differentiation_matrix: invalid quadrature rule");
  }
  const std::vector<double> s = rule.support();
  const std::vector<double>& b = rule.support_barycentric.empty() ? barycentric_weights(s)
                                                                  : rule.support_barycentric;
  DifferentiationMatrix dm;
  dm.rows = rule.order;
  dm.cols = rule.order + 1;
  dm.entries.assign(static_cast<std::size_t>(dm.rows) * dm.cols, 0.0);
  for (int l = 0; l < dm.rows; ++l) {
    double diag = 0.0;
    for (int j = 0; j < dm.cols; ++j) {
      if (j == l) continue;
      const double v = (b[j] / b[l]) / (s[l] - s[j]);
      dm(l, j) = v;
      diag -= v;
    }
    dm(l, l) = diag;
  }
  return dm;
}

double affine_map(double tau, double t_a, double t_b) {
  if (!(t_b > t_a)) throw Error(ErrorCode::kDegenerateDomain, "affine_map: t_b must exceed t_a");
  return 0.5 * (t_b - t_a) * tau + 0.5 * (t_b + t_a);
}

double affine_unmap(double t, double t_a, double t_b) {
  if (!(t_b > t_a)) throw Error(ErrorCode::kDegenerateDomain, "affine_unmap: t_b must exceed t_a");
  return 2.0 * (t - t_a) / (t_b - t_a) - 1.0;
}

double barycentric_interpolate(std::span<const double> nodes, std::span<const double> bary,
                               std::span<const double> values, double x) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const double diff = x - nodes[j];
    if (diff == 0.0) return values[j];
    const double c = bary[j] / diff;
    num += c * values[j];
    den += c;
  }
  return num / den;
}

double interpolate_state(std::span<const double> values, const QuadratureRule& rule,
                         double tau_eval) {
  if (tau_eval < -1.0 || tau_eval > 1.0) {
    throw Error(ErrorCode::kExtrapolation, "interpolate_state: tau outside [-1, 1]");
  }
  if (values.size() != rule.points.size() + 1) {
    throw Error(ErrorCode::kDimensionMismatch, "interpolate_state: expected N+1 support values");
  }
  const std::vector<double> s = rule.support();
  return barycentric_interpolate(s, rule.support_barycentric, values, tau_eval);
}

int MeshLayout::num_points() const {
  int total = 0;
  for (int n : orders) total += n;
  return total;
}

MeshLayout MeshLayout::uniform(int intervals, int order) {
  if (intervals < 1 || order < 1) {
    throw Error(ErrorCode::kInvalidArgument, "uniform mesh needs >= 1 interval and order >= 1");
  }
  MeshLayout m;
  m.breaks.resize(static_cast<std::size_t>(intervals) + 1);
  for (int k = 0; k <= intervals; ++k) m.breaks[k] = -1.0 + 2.0 * k / intervals;
  m.breaks.front() = -1.0;
  m.breaks.back() = 1.0;
  m.orders.assign(static_cast<std::size_t>(intervals), order);
  return m;
}

void MeshLayout::validate() const {
  if (orders.empty() || breaks.size() != orders.size() + 1) {
    throw Error(ErrorCode::kInvalidArgument, "mesh layout: breaks/orders size mismatch");
  }
  if (breaks.front() != -1.0 || breaks.back() != 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "mesh layout must span [-1, 1]");
  }
  for (std::size_t k = 0; k < orders.size(); ++k) {
    if (!(breaks[k + 1] > breaks[k])) {
      throw Error(ErrorCode::kInvalidArgument, "mesh layout breaks must be strictly increasing");
    }
    if (orders[k] < 1) throw Error(ErrorCode::kInvalidArgument, "mesh interval order must be >= 1");
  }
}

double DomainGrid::diff(int row, int col) const {
  const int k = interval_of_point[row];
  const int local_row = row - interval_offset[k];
  const int local_col = col - interval_offset[k];
  const DifferentiationMatrix& dm = interval_diff[k];
  if (local_col < 0 || local_col >= dm.cols) return 0.0;
  return dm(local_row, local_col);
}

DomainGrid build_domain_grid(const MeshLayout& mesh) {
  mesh.validate();
  DomainGrid g;
  g.mesh = mesh;
  const int k_count = mesh.num_intervals();
  g.interval_offset.reserve(k_count);
  int offset = 0;
  for (int k = 0; k < k_count; ++k) {
    const QuadratureRule& rule = cached_lgr_rule(mesh.orders[k]);
    const double lo = mesh.breaks[k];
    const double hi = mesh.breaks[k + 1];
    const double half = 0.5 * (hi - lo);
    g.interval_offset.push_back(offset);
    for (int i = 0; i < rule.order; ++i) {
      g.tau.push_back(lo + half * (rule.points[i] + 1.0));
      g.weights.push_back(half * rule.weights[i]);
      g.interval_of_point.push_back(k);
    }
    DifferentiationMatrix dm = differentiation_matrix(rule);
    for (double& e : dm.entries) e /= half;
    g.interval_diff.push_back(std::move(dm));
    offset += rule.order;
  }
  g.tau.push_back(1.0);
  return g;
}

}  // namespace bbsoc
