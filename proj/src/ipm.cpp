// Primal-dual interior point method for
//   min f(x)  s.t.  c(x) = 0,  lo <= x <= hi
// with a monotone barrier update, a filter line search with second-order
// corrections, inertia-corrected LDL^T factorization of a quasi-definite KKT
// matrix, and a Gauss-Newton feasibility restoration.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "bbsoc/error.hpp"
#include "bbsoc/nlp.hpp"

namespace bbsoc {

namespace {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

constexpr double kMachEps = std::numeric_limits<double>::epsilon();

// Algorithm constants.
constexpr double kKappaEps = 10.0;
constexpr double kKappaMu = 0.2;
constexpr double kThetaMu = 1.5;
constexpr double kTauMin = 0.99;
constexpr double kKappaSigma = 1e10;
constexpr double kKappaDamp = 1e-5;
constexpr double kBoundRelax = 1e-8;
constexpr double kSMax = 100.0;
constexpr double kGammaTheta = 1e-5;
constexpr double kGammaPhi = 1e-8;
constexpr double kEtaPhi = 1e-8;
constexpr double kDeltaSwitch = 1.0;
constexpr double kSTheta = 1.1;
constexpr double kSPhi = 2.3;
constexpr double kGammaAlpha = 0.05;
constexpr int kMaxSoc = 4;
constexpr double kKappaSoc = 0.99;
constexpr double kDeltaCBase = 1e-9;
constexpr double kDeltaW0 = 1e-4;
constexpr double kDeltaWMin = 1e-20;
constexpr double kDeltaWMax = 1e40;

double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }
double one_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.lpNorm<1>(); }

bool all_finite(const Vec& v) { return v.allFinite(); }

// The NLP with fixed variables removed and all quantities scaled.
class ReducedProblem {
 public:
  explicit ReducedProblem(const NlpProblem& nlp) : nlp_(nlp) {
    n_full_ = nlp.num_variables();
    m_ = nlp.num_constraints();
    lo_full_.resize(static_cast<std::size_t>(n_full_));
    hi_full_.resize(static_cast<std::size_t>(n_full_));
    nlp.bounds(lo_full_, hi_full_);
    std::vector<double> scale = nlp.variable_scaling();
    if (scale.empty()) scale.assign(static_cast<std::size_t>(n_full_), 1.0);
    if (static_cast<int>(scale.size()) != n_full_) {
      throw Error(ErrorCode::kDimensionMismatch, "variable_scaling has wrong length");
    }
    to_free_.assign(static_cast<std::size_t>(n_full_), -1);
    for (int i = 0; i < n_full_; ++i) {
      if (lo_full_[i] > hi_full_[i]) {
        throw Error(ErrorCode::kInvalidArgument, "NLP bounds cross at variable " + std::to_string(i));
      }
      if (lo_full_[i] == hi_full_[i]) continue;
      to_free_[i] = static_cast<int>(free_.size());
      free_.push_back(i);
      const double s = scale[i];
      sx_.push_back(std::isfinite(s) && s > 0.0 ? s : 1.0);
    }
    cs_.assign(static_cast<std::size_t>(m_), 1.0);

    jac_pattern_ = nlp.jacobian_pattern();
    for (std::size_t e = 0; e < jac_pattern_.size(); ++e) {
      const int col = to_free_[jac_pattern_.cols[e]];
      if (col < 0) continue;
      jac_keep_.push_back(static_cast<int>(e));
      jac_entries_.emplace_back(jac_pattern_.rows[e], col);
    }
    hess_pattern_ = nlp.hessian_pattern();
    for (std::size_t e = 0; e < hess_pattern_.size(); ++e) {
      int r = to_free_[hess_pattern_.rows[e]];
      int c = to_free_[hess_pattern_.cols[e]];
      if (r < 0 || c < 0) continue;
      if (r < c) std::swap(r, c);
      hess_keep_.push_back(static_cast<int>(e));
      hess_entries_.emplace_back(r, c);
    }
  }

  int n() const { return static_cast<int>(free_.size()); }
  int m() const { return m_; }
  int n_full() const { return n_full_; }
  double obj_scale() const { return obj_scale_; }
  const std::vector<std::pair<int, int>>& jac_entries() const { return jac_entries_; }
  const std::vector<std::pair<int, int>>& hess_entries() const { return hess_entries_; }

  void scaled_bounds(Vec& lo, Vec& hi) const {
    lo.resize(n());
    hi.resize(n());
    for (int k = 0; k < n(); ++k) {
      lo(k) = lo_full_[free_[k]] / sx_[k];
      hi(k) = hi_full_[free_[k]] / sx_[k];
    }
  }

  Vec to_scaled(std::span<const double> x_full) const {
    Vec xs(n());
    for (int k = 0; k < n(); ++k) xs(k) = x_full[free_[k]] / sx_[k];
    return xs;
  }

  std::vector<double> to_full(const Vec& xs) const {
    std::vector<double> x(static_cast<std::size_t>(n_full_));
    for (int i = 0; i < n_full_; ++i) {
      if (to_free_[i] < 0) x[i] = lo_full_[i];
    }
    for (int k = 0; k < n(); ++k) x[free_[k]] = xs(k) * sx_[k];
    return x;
  }

  bool objective(const Vec& xs, double& f) const {
    f = obj_scale_ * nlp_.objective(to_full(xs));
    return std::isfinite(f);
  }

  bool gradient(const Vec& xs, Vec& g) const {
    std::vector<double> gf(static_cast<std::size_t>(n_full_));
    nlp_.gradient(to_full(xs), gf);
    g.resize(n());
    for (int k = 0; k < n(); ++k) g(k) = obj_scale_ * gf[free_[k]] * sx_[k];
    return all_finite(g);
  }

  bool constraints(const Vec& xs, Vec& c) const {
    std::vector<double> cf(static_cast<std::size_t>(m_));
    nlp_.constraints(to_full(xs), cf);
    c.resize(m_);
    for (int j = 0; j < m_; ++j) c(j) = cs_[j] * cf[j];
    return all_finite(c);
  }

  bool jacobian(const Vec& xs, std::vector<double>& values) const {
    std::vector<double> vf(jac_pattern_.size());
    nlp_.jacobian_values(to_full(xs), vf);
    values.resize(jac_keep_.size());
    for (std::size_t e = 0; e < jac_keep_.size(); ++e) {
      const auto [r, c] = jac_entries_[e];
      values[e] = cs_[r] * vf[jac_keep_[e]] * sx_[c];
      if (!std::isfinite(values[e])) return false;
    }
    return true;
  }

  bool hessian(const Vec& xs, double obj_factor, const Vec& ys, std::vector<double>& values) const {
    std::vector<double> yf(static_cast<std::size_t>(m_));
    for (int j = 0; j < m_; ++j) yf[j] = cs_[j] * ys(j);
    std::vector<double> vf(hess_pattern_.size());
    nlp_.hessian_values(to_full(xs), obj_scale_ * obj_factor, yf, vf);
    values.resize(hess_keep_.size());
    for (std::size_t e = 0; e < hess_keep_.size(); ++e) {
      const auto [r, c] = hess_entries_[e];
      values[e] = vf[hess_keep_[e]] * sx_[r] * sx_[c];
      if (!std::isfinite(values[e])) return false;
    }
    return true;
  }

  // Gradient-based scaling at the starting point.
  void compute_scaling(const Vec& xs) {
    Vec g;
    if (gradient(xs, g) && g.size() > 0) {
      const double gmax = inf_norm(g);
      obj_scale_ = gmax > kSMax ? kSMax / gmax : 1.0;
    }
    std::vector<double> jv;
    if (jacobian(xs, jv)) {
      std::vector<double> row_max(static_cast<std::size_t>(m_), 0.0);
      for (std::size_t e = 0; e < jv.size(); ++e) {
        const int r = jac_entries_[e].first;
        row_max[r] = std::max(row_max[r], std::abs(jv[e]));
      }
      for (int j = 0; j < m_; ++j) cs_[j] = row_max[j] > kSMax ? kSMax / row_max[j] : 1.0;
    }
  }

  // Maps scaled multipliers back to the original problem.
  void unscale(const Vec& ys, const Vec& zl, const Vec& zu, NlpSolution& sol) const {
    sol.multipliers.resize(static_cast<std::size_t>(m_));
    for (int j = 0; j < m_; ++j) sol.multipliers[j] = cs_[j] * ys(j) / obj_scale_;
    sol.bound_lower.assign(static_cast<std::size_t>(n_full_), 0.0);
    sol.bound_upper.assign(static_cast<std::size_t>(n_full_), 0.0);
    for (int k = 0; k < n(); ++k) {
      sol.bound_lower[free_[k]] = zl(k) / (sx_[k] * obj_scale_);
      sol.bound_upper[free_[k]] = zu(k) / (sx_[k] * obj_scale_);
    }
    if (static_cast<int>(free_.size()) == n_full_) return;
    // Fixed variables: the bound multiplier absorbs the stationarity residual.
    std::vector<double> r(static_cast<std::size_t>(n_full_));
    nlp_.gradient(sol.primal, r);
    std::vector<double> jv(jac_pattern_.size());
    nlp_.jacobian_values(sol.primal, jv);
    for (std::size_t e = 0; e < jv.size(); ++e) {
      r[jac_pattern_.cols[e]] += jv[e] * sol.multipliers[jac_pattern_.rows[e]];
    }
    for (int i = 0; i < n_full_; ++i) {
      if (to_free_[i] >= 0) continue;
      if (r[i] >= 0.0) {
        sol.bound_lower[i] = r[i];
      } else {
        sol.bound_upper[i] = -r[i];
      }
    }
  }

  const std::vector<double>& lo_full() const { return lo_full_; }
  const std::vector<double>& hi_full() const { return hi_full_; }

 private:
  const NlpProblem& nlp_;
  int n_full_ = 0;
  int m_ = 0;
  std::vector<double> lo_full_, hi_full_;
  std::vector<int> free_;
  std::vector<int> to_free_;
  std::vector<double> sx_;
  std::vector<double> cs_;
  double obj_scale_ = 1.0;
  SparsityPattern jac_pattern_, hess_pattern_;
  std::vector<int> jac_keep_, hess_keep_;
  std::vector<std::pair<int, int>> jac_entries_, hess_entries_;
};

// [H + diag, J^T; J, -delta_c I], lower triangle, fixed pattern.
class KktSystem {
 public:
  KktSystem(int n, int m, const std::vector<std::pair<int, int>>& hess,
            const std::vector<std::pair<int, int>>& jac)
      : n_(n), m_(m) {
    const int dim = n + m;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(dim) + hess.size() + jac.size());
    for (int k = 0; k < dim; ++k) trip.emplace_back(k, k, 0.0);
    for (const auto& [r, c] : hess) trip.emplace_back(r, c, 0.0);
    for (const auto& [r, c] : jac) trip.emplace_back(n + r, c, 0.0);
    k_.resize(dim, dim);
    k_.setFromTriplets(trip.begin(), trip.end());
    k_.makeCompressed();
    diag_pos_.resize(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k) diag_pos_[k] = position(k, k);
    for (const auto& [r, c] : hess) hess_pos_.push_back(position(r, c));
    for (const auto& [r, c] : jac) jac_pos_.push_back(position(n + r, c));
  }

  void assemble(const Vec& diag_x, std::span<const double> hess, std::span<const double> jac,
                double delta_c) {
    double* v = k_.valuePtr();
    std::fill(v, v + k_.nonZeros(), 0.0);
    for (int k = 0; k < n_; ++k) v[diag_pos_[k]] += diag_x(k);
    for (int j = 0; j < m_; ++j) v[diag_pos_[n_ + j]] -= delta_c;
    for (std::size_t e = 0; e < hess.size(); ++e) v[hess_pos_[e]] += hess[e];
    for (std::size_t e = 0; e < jac.size(); ++e) v[jac_pos_[e]] += jac[e];
    delta_c_ = delta_c;
  }

  // Returns false on a zero pivot; otherwise reports the inertia.
  bool factor(int& positive, int& negative) {
    if (!analyzed_) {
      ldlt_.analyzePattern(k_);
      analyzed_ = true;
    }
    ldlt_.factorize(k_);
    if (ldlt_.info() != Eigen::Success) return false;
    const Vec& d = ldlt_.vectorD();
    positive = 0;
    negative = 0;
    for (int i = 0; i < d.size(); ++i) {
      if (!std::isfinite(d(i))) return false;
      if (d(i) > 0.0) {
        ++positive;
      } else if (d(i) < 0.0) {
        ++negative;
      } else {
        return false;
      }
    }
    return true;
  }

  // Solves the system with constraint regularization `delta_c_target`,
  // using the factorized (possibly more regularized) matrix with refinement.
  Vec solve(const Vec& rhs, double delta_c_target) const {
    Vec sol = ldlt_.solve(rhs);
    const double rhs_norm = inf_norm(rhs);
    for (int it = 0; it < 10; ++it) {
      Vec r = rhs - apply(sol, delta_c_target);
      const double rn = inf_norm(r);
      if (!std::isfinite(rn) || rn <= 1e-12 * (1.0 + rhs_norm)) break;
      sol += ldlt_.solve(r);
    }
    return sol;
  }

  int n() const { return n_; }
  int m() const { return m_; }

 private:
  int position(int r, int c) const {
    const int* outer = k_.outerIndexPtr();
    const int* inner = k_.innerIndexPtr();
    const int* first = inner + outer[c];
    const int* last = inner + outer[c + 1];
    const int* it = std::lower_bound(first, last, r);
    return static_cast<int>(it - inner);
  }

  Vec apply(const Vec& v, double delta_c_target) const {
    Vec out = k_.selfadjointView<Eigen::Lower>() * v;
    if (m_ > 0) out.tail(m_) += (delta_c_ - delta_c_target) * v.tail(m_);
    return out;
  }

  int n_, m_;
  SpMat k_;
  std::vector<int> diag_pos_, hess_pos_, jac_pos_;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt_;
  bool analyzed_ = false;
  double delta_c_ = 0.0;
};

struct FilterEntry {
  double theta;
  double phi;
};

class InteriorPointRun {
 public:
  InteriorPointRun(const NlpProblem& nlp, const NlpOptions& opt)
      : opt_(opt), prob_(nlp), kkt_(prob_.n(), prob_.m(), prob_.hess_entries(), prob_.jac_entries()) {}

  NlpSolution run();

 private:
  bool evaluate_at(const Vec& x, double& f, Vec& c) const {
    return prob_.objective(x, f) && prob_.constraints(x, c);
  }
  bool evaluate_derivatives();
  void initialize_bounds_and_point();
  void init_multipliers();
  double barrier_value(const Vec& x, double f) const;
  Vec barrier_gradient() const;
  double error(double mu) const;
  double dual_infeasibility() const;
  bool factor_with_inertia_correction(const Vec& sigma);
  double fraction_to_boundary_x(const Vec& x, const Vec& dx, double tau) const;
  static double fraction_to_boundary_z(const Vec& z, const Vec& dz, const Vec& mask, double tau);
  bool in_filter(double theta, double phi) const;
  bool restoration();
  Vec least_squares_multipliers();
  NlpSolution finish(NlpStatus status, const std::string& message);
  void log_iteration(double alpha_primal, double alpha_dual, char kind) const;

  NlpOptions opt_;
  ReducedProblem prob_;
  KktSystem kkt_;

  Vec lo_, hi_, has_lo_, has_hi_, lo_only_, hi_only_;
  Vec x_, y_, zl_, zu_;
  double f_ = 0.0;
  Vec c_, g_;
  std::vector<double> jac_, hess_;
  double mu_ = 0.1;
  double theta_max_ = 0.0;
  double theta_min_ = 0.0;
  std::vector<FilterEntry> filter_;
  double delta_w_last_ = 0.0;
  double delta_c_extra_ = 0.0;
  int iter_ = 0;
  int n_restorations_ = 0;
};

bool InteriorPointRun::evaluate_derivatives() {
  return prob_.gradient(x_, g_) && prob_.jacobian(x_, jac_);
}

void InteriorPointRun::initialize_bounds_and_point() {
  const int n = prob_.n();
  prob_.scaled_bounds(lo_, hi_);
  has_lo_ = Vec::Zero(n);
  has_hi_ = Vec::Zero(n);
  for (int k = 0; k < n; ++k) {
    if (std::isfinite(lo_(k))) {
      has_lo_(k) = 1.0;
      lo_(k) -= kBoundRelax * std::max(1.0, std::abs(lo_(k)));
    }
    if (std::isfinite(hi_(k))) {
      has_hi_(k) = 1.0;
      hi_(k) += kBoundRelax * std::max(1.0, std::abs(hi_(k)));
    }
  }
  lo_only_ = has_lo_.cwiseProduct(Vec::Ones(n) - has_hi_);
  hi_only_ = has_hi_.cwiseProduct(Vec::Ones(n) - has_lo_);

  std::vector<double> x0 = opt_.initial_point.empty() ? std::vector<double>() : opt_.initial_point;
  if (x0.empty()) {
    // Problem-supplied start; fixed variables come from the bounds.
    x0 = prob_.to_full(Vec::Zero(n));
  }
  if (static_cast<int>(x0.size()) != prob_.n_full()) {
    throw Error(ErrorCode::kDimensionMismatch, "initial point has wrong length");
  }
  x_ = prob_.to_scaled(x0);
  const double k1 = opt_.bound_push;
  const double k2 = opt_.bound_push;
  for (int k = 0; k < n; ++k) {
    if (!std::isfinite(x_(k))) x_(k) = 0.0;
    const bool bl = has_lo_(k) > 0.0;
    const bool bu = has_hi_(k) > 0.0;
    if (bl && bu) {
      const double range = hi_(k) - lo_(k);
      const double pl = std::min(k1 * std::max(1.0, std::abs(lo_(k))), k2 * range);
      const double pu = std::min(k1 * std::max(1.0, std::abs(hi_(k))), k2 * range);
      x_(k) = std::clamp(x_(k), lo_(k) + pl, hi_(k) - pu);
    } else if (bl) {
      x_(k) = std::max(x_(k), lo_(k) + k1 * std::max(1.0, std::abs(lo_(k))));
    } else if (bu) {
      x_(k) = std::min(x_(k), hi_(k) - k1 * std::max(1.0, std::abs(hi_(k))));
    }
  }
}

double InteriorPointRun::barrier_value(const Vec& x, double f) const {
  double phi = f;
  for (int k = 0; k < x.size(); ++k) {
    if (has_lo_(k) > 0.0) {
      const double s = x(k) - lo_(k);
      phi -= mu_ * std::log(s);
      if (lo_only_(k) > 0.0) phi += kKappaDamp * mu_ * s;
    }
    if (has_hi_(k) > 0.0) {
      const double s = hi_(k) - x(k);
      phi -= mu_ * std::log(s);
      if (hi_only_(k) > 0.0) phi += kKappaDamp * mu_ * s;
    }
  }
  return phi;
}

Vec InteriorPointRun::barrier_gradient() const {
  Vec gphi = g_;
  for (int k = 0; k < x_.size(); ++k) {
    if (has_lo_(k) > 0.0) {
      gphi(k) -= mu_ / (x_(k) - lo_(k));
      if (lo_only_(k) > 0.0) gphi(k) += kKappaDamp * mu_;
    }
    if (has_hi_(k) > 0.0) {
      gphi(k) += mu_ / (hi_(k) - x_(k));
      if (hi_only_(k) > 0.0) gphi(k) -= kKappaDamp * mu_;
    }
  }
  return gphi;
}

Vec jt_times(int n, const std::vector<std::pair<int, int>>& entries, const std::vector<double>& values,
             const Vec& y) {
  Vec out = Vec::Zero(n);
  for (std::size_t e = 0; e < values.size(); ++e) out(entries[e].second) += values[e] * y(entries[e].first);
  return out;
}

double InteriorPointRun::dual_infeasibility() const {
  const Vec r = g_ + jt_times(prob_.n(), prob_.jac_entries(), jac_, y_) - zl_ + zu_;
  return inf_norm(r);
}

double InteriorPointRun::error(double mu) const {
  const int n = prob_.n();
  const int m = prob_.m();
  const double zsum = one_norm(zl_) + one_norm(zu_);
  const double sd = std::max(kSMax, (one_norm(y_) + zsum) / std::max(1, m + 2 * n)) / kSMax;
  const double sc = std::max(kSMax, zsum / std::max(1, 2 * n)) / kSMax;
  double compl_err = 0.0;
  for (int k = 0; k < n; ++k) {
    if (has_lo_(k) > 0.0) compl_err = std::max(compl_err, std::abs((x_(k) - lo_(k)) * zl_(k) - mu));
    if (has_hi_(k) > 0.0) compl_err = std::max(compl_err, std::abs((hi_(k) - x_(k)) * zu_(k) - mu));
  }
  return std::max({dual_infeasibility() / sd, inf_norm(c_), compl_err / sc});
}

bool InteriorPointRun::factor_with_inertia_correction(const Vec& sigma) {
  const int n = prob_.n();
  const int m = prob_.m();
  double delta_c = kDeltaCBase + delta_c_extra_;
  auto attempt = [&](double dw, bool& singular) {
    kkt_.assemble(sigma + Vec::Constant(n, dw), hess_, jac_, delta_c);
    int pos = 0;
    int neg = 0;
    if (!kkt_.factor(pos, neg)) {
      singular = true;
      return false;
    }
    singular = false;
    return pos == n && neg == m;
  };
  bool singular = false;
  if (attempt(0.0, singular)) return true;
  if (singular) {
    delta_c_extra_ = std::max(delta_c_extra_, 1e-8 * std::pow(mu_, 0.25));
    delta_c = kDeltaCBase + delta_c_extra_;
    if (attempt(0.0, singular)) return true;
  }
  double dw = delta_w_last_ == 0.0 ? kDeltaW0 : std::max(kDeltaWMin, delta_w_last_ / 3.0);
  while (dw <= kDeltaWMax) {
    if (attempt(dw, singular)) {
      delta_w_last_ = dw;
      return true;
    }
    dw *= delta_w_last_ == 0.0 ? 100.0 : 8.0;
  }
  return false;
}

double InteriorPointRun::fraction_to_boundary_x(const Vec& x, const Vec& dx, double tau) const {
  double alpha = 1.0;
  for (int k = 0; k < x.size(); ++k) {
    if (has_lo_(k) > 0.0 && dx(k) < 0.0) alpha = std::min(alpha, -tau * (x(k) - lo_(k)) / dx(k));
    if (has_hi_(k) > 0.0 && dx(k) > 0.0) alpha = std::min(alpha, tau * (hi_(k) - x(k)) / dx(k));
  }
  return alpha;
}

double InteriorPointRun::fraction_to_boundary_z(const Vec& z, const Vec& dz, const Vec& mask,
                                                double tau) {
  double alpha = 1.0;
  for (int k = 0; k < z.size(); ++k) {
    if (mask(k) > 0.0 && dz(k) < 0.0) alpha = std::min(alpha, -tau * z(k) / dz(k));
  }
  return alpha;
}

bool InteriorPointRun::in_filter(double theta, double phi) const {
  return std::any_of(filter_.begin(), filter_.end(), [&](const FilterEntry& e) {
    return theta >= e.theta && phi >= e.phi;
  });
}

Vec InteriorPointRun::least_squares_multipliers() {
  const int n = prob_.n();
  const int m = prob_.m();
  if (m == 0) return Vec();
  std::vector<double> zero_hess(hess_.size(), 0.0);
  kkt_.assemble(Vec::Ones(n), zero_hess, jac_, kDeltaCBase);
  int pos = 0;
  int neg = 0;
  if (!kkt_.factor(pos, neg)) return Vec::Zero(m);
  Vec rhs = Vec::Zero(n + m);
  rhs.head(n) = -(g_ - zl_ + zu_);
  const Vec sol = kkt_.solve(rhs, 0.0);
  Vec y = sol.tail(m);
  if (!all_finite(y) || inf_norm(y) > 1e3) y.setZero();
  return y;
}

// Gauss-Newton steps on 0.5 |c|^2 with a proximal term, kept interior.
bool InteriorPointRun::restoration() {
  const int n = prob_.n();
  const int m = prob_.m();
  ++n_restorations_;
  const double theta_start = one_norm(c_);
  filter_.push_back({(1.0 - kGammaTheta) * theta_start,
                     barrier_value(x_, f_) - kGammaPhi * theta_start});
  double rho = 1e-4;
  std::vector<double> zero_hess(hess_.size(), 0.0);
  for (int it = 0; it < 500; ++it) {
    const double theta = one_norm(c_);
    if (theta <= 0.9 * theta_start) {
      const double phi = barrier_value(x_, f_);
      if (!in_filter(theta, phi) && theta < theta_max_) return true;
    }
    Vec diag(n);
    Vec gb = Vec::Zero(n);
    for (int k = 0; k < n; ++k) {
      diag(k) = rho;
      if (has_lo_(k) > 0.0) {
        const double s = x_(k) - lo_(k);
        diag(k) += mu_ / (s * s);
        gb(k) += mu_ / s;
      }
      if (has_hi_(k) > 0.0) {
        const double s = hi_(k) - x_(k);
        diag(k) += mu_ / (s * s);
        gb(k) -= mu_ / s;
      }
    }
    kkt_.assemble(diag, zero_hess, jac_, 1.0);
    int pos = 0;
    int neg = 0;
    if (!kkt_.factor(pos, neg)) return false;
    Vec rhs(n + m);
    rhs.head(n) = gb;
    rhs.tail(m) = -c_;
    const Vec sol = kkt_.solve(rhs, 1.0);
    const Vec d = sol.head(n);
    if (!all_finite(d)) return false;
    const Vec jtc = jt_times(n, prob_.jac_entries(), jac_, c_);
    if (inf_norm(jtc) <= 1e-12 * std::max(1.0, inf_norm(c_)) && inf_norm(c_) > opt_.tolerance) {
      return false;  // stationary point of the infeasibility
    }
    double alpha = fraction_to_boundary_x(x_, d, std::max(kTauMin, 1.0 - mu_));
    const double c2 = c_.squaredNorm();
    bool accepted = false;
    for (int ls = 0; ls < 6 && !accepted; ++ls, alpha *= 0.5) {
      const Vec xt = x_ + alpha * d;
      double ft = 0.0;
      Vec ct;
      if (!evaluate_at(xt, ft, ct)) continue;
      if (ct.squaredNorm() < (1.0 - 1e-4 * alpha) * c2) {
        x_ = xt;
        f_ = ft;
        c_ = ct;
        accepted = true;
      }
    }
    if (accepted) {
      rho = std::max(rho / 4.0, 1e-12);
      if (!evaluate_derivatives()) return false;
    } else {
      rho *= 10.0;
      if (rho > 1e20) return false;
    }
  }
  return false;
}

void InteriorPointRun::log_iteration(double alpha_primal, double alpha_dual, char kind) const {
  if (opt_.print_level < 2) return;
  std::fprintf(stderr, "%5d %+.8e %.2e %.2e %.1e %.2e %.2e %c\n", iter_, f_ / prob_.obj_scale(),
               inf_norm(c_), dual_infeasibility(), mu_, alpha_primal, alpha_dual, kind);
}

NlpSolution InteriorPointRun::finish(NlpStatus status, const std::string& message) {
  NlpSolution sol;
  sol.primal = prob_.to_full(x_);
  // The relaxed bounds may leave roundoff-sized violations.
  for (int i = 0; i < prob_.n_full(); ++i) {
    sol.primal[i] = std::clamp(sol.primal[i], prob_.lo_full()[i], prob_.hi_full()[i]);
  }
  prob_.unscale(y_, zl_, zu_, sol);
  sol.status = status;
  sol.objective = f_ / prob_.obj_scale();
  sol.kkt_residual = error(0.0);
  sol.constraint_violation = inf_norm(c_);
  sol.iterations = iter_;
  sol.message = message;
  if (opt_.print_level >= 1) {
    std::fprintf(stderr, "ipm: %s after %d iterations, f = %.10g, kkt = %.3e\n", to_string(status),
                 iter_, sol.objective, sol.kkt_residual);
  }
  return sol;
}

NlpSolution InteriorPointRun::run() {
  const int n = prob_.n();
  const int m = prob_.m();
  initialize_bounds_and_point();
  prob_.compute_scaling(x_);
  mu_ = opt_.mu_init;
  zl_ = has_lo_;
  zu_ = has_hi_;
  y_ = Vec::Zero(m);
  if (!evaluate_at(x_, f_, c_) || !evaluate_derivatives()) {
    return finish(NlpStatus::kNumericalFailure, "evaluation failed at the initial point");
  }
  y_ = least_squares_multipliers();

  const double theta0 = one_norm(c_);
  theta_max_ = 1e4 * std::max(1.0, theta0);
  theta_min_ = 1e-4 * std::max(1.0, theta0);
  int stalls = 0;

  for (;;) {
    if (error(0.0) <= opt_.tolerance) return finish(NlpStatus::kConverged, "optimal solution found");
    while (mu_ > opt_.tolerance / 10.0 && error(mu_) <= kKappaEps * mu_) {
      mu_ = std::max(opt_.tolerance / 10.0, std::min(kKappaMu * mu_, std::pow(mu_, kThetaMu)));
      filter_.clear();
    }
    if (iter_ >= opt_.max_iterations) return finish(NlpStatus::kMaxIterations, "iteration limit reached");

    if (!prob_.hessian(x_, 1.0, y_, hess_)) {
      return finish(NlpStatus::kNumericalFailure, "non-finite Hessian");
    }
    Vec sigma_l = Vec::Zero(n);
    Vec sigma_u = Vec::Zero(n);
    for (int k = 0; k < n; ++k) {
      if (has_lo_(k) > 0.0) sigma_l(k) = zl_(k) / (x_(k) - lo_(k));
      if (has_hi_(k) > 0.0) sigma_u(k) = zu_(k) / (hi_(k) - x_(k));
    }
    if (!factor_with_inertia_correction(sigma_l + sigma_u)) {
      return finish(NlpStatus::kNumericalFailure, "KKT factorization failed");
    }
    const double delta_c_target = delta_c_extra_;

    const Vec gphi = barrier_gradient();
    const Vec jty = jt_times(n, prob_.jac_entries(), jac_, y_);
    Vec rhs(n + m);
    rhs.head(n) = -(gphi + jty);
    rhs.tail(m) = -c_;
    Vec sol = kkt_.solve(rhs, delta_c_target);
    if (!all_finite(sol)) return finish(NlpStatus::kNumericalFailure, "non-finite search direction");
    Vec dx = sol.head(n);
    Vec dy = sol.tail(m);

    const double tau = std::max(kTauMin, 1.0 - mu_);
    const double theta = one_norm(c_);
    const double phi = barrier_value(x_, f_);

    double max_rel = 0.0;
    for (int k = 0; k < n; ++k) max_rel = std::max(max_rel, std::abs(dx(k)) / (1.0 + std::abs(x_(k))));
    const bool tiny = max_rel < 10.0 * kMachEps && theta <= opt_.tolerance;

    double alpha = fraction_to_boundary_x(x_, dx, tau);
    Vec x_new;
    double f_new = 0.0;
    Vec c_new;
    char kind = 'h';
    bool accepted = false;

    if (tiny) {
      x_new = x_ + alpha * dx;
      accepted = evaluate_at(x_new, f_new, c_new);
      kind = 't';
    } else {
      const double gd = gphi.dot(dx);
      double alpha_min = kGammaTheta;
      if (gd < 0.0) {
        alpha_min = std::min(kGammaTheta, kGammaPhi * theta / -gd);
        if (theta <= theta_min_) {
          alpha_min = std::min(alpha_min, kDeltaSwitch * std::pow(theta, kSTheta) / std::pow(-gd, kSPhi));
        }
      }
      alpha_min *= kGammaAlpha;

      // Acceptance test; sets `augment` when the filter must be extended.
      auto acceptable = [&](double a, double theta_t, double phi_t, double gd_step, bool& augment) {
        if (!std::isfinite(phi_t) || theta_t > theta_max_ || in_filter(theta_t, phi_t)) return false;
        const double slack = 10.0 * kMachEps * std::abs(phi);
        const bool switching =
            gd_step < 0.0 && a * std::pow(-gd_step, kSPhi) > kDeltaSwitch * std::pow(theta, kSTheta);
        if (theta <= theta_min_ && switching) {
          augment = false;
          return phi_t - phi <= kEtaPhi * a * gd_step + slack;
        }
        augment = true;
        return theta_t <= (1.0 - kGammaTheta) * theta || phi_t - (phi - kGammaPhi * theta) <= slack;
      };

      bool augment = true;
      for (int ls = 0; alpha >= alpha_min && alpha > 1e-16; ++ls, alpha *= 0.5) {
        x_new = x_ + alpha * dx;
        if (!evaluate_at(x_new, f_new, c_new)) continue;
        const double theta_t = one_norm(c_new);
        const double phi_t = barrier_value(x_new, f_new);
        if (acceptable(alpha, theta_t, phi_t, gd, augment)) {
          accepted = true;
          break;
        }
        if (ls == 0 && theta_t >= theta && m > 0) {
          // Second-order correction.
          Vec c_soc = alpha * c_ + c_new;
          double theta_old = theta;
          for (int p = 0; p < kMaxSoc; ++p) {
            Vec rhs_soc(n + m);
            rhs_soc.head(n) = -(gphi + jty);
            rhs_soc.tail(m) = -c_soc;
            const Vec s = kkt_.solve(rhs_soc, delta_c_target);
            const Vec dx_soc = s.head(n);
            if (!all_finite(dx_soc)) break;
            const double a_soc = fraction_to_boundary_x(x_, dx_soc, tau);
            Vec x_soc = x_ + a_soc * dx_soc;
            double f_soc = 0.0;
            Vec c_soc_eval;
            if (!evaluate_at(x_soc, f_soc, c_soc_eval)) break;
            const double theta_soc = one_norm(c_soc_eval);
            const double phi_soc = barrier_value(x_soc, f_soc);
            if (acceptable(alpha, theta_soc, phi_soc, gd, augment)) {
              x_new = x_soc;
              f_new = f_soc;
              c_new = c_soc_eval;
              dy = s.tail(m);
              dx = dx_soc;
              alpha = a_soc;
              accepted = true;
              kind = 's';
              break;
            }
            if (theta_soc > kKappaSoc * theta_old) break;
            theta_old = theta_soc;
            c_soc = a_soc * c_soc + c_soc_eval;
          }
          if (accepted) break;
        }
      }
      if (accepted && augment) {
        filter_.push_back({(1.0 - kGammaTheta) * theta, phi - kGammaPhi * theta});
      }
      if (accepted && !augment) kind = 'f';
    }

    if (!accepted) {
      if (theta <= opt_.tolerance) {
        // Line search failure at a feasible point: take a short step and reset.
        if (++stalls > 5) return finish(NlpStatus::kNumericalFailure, "line search failed repeatedly");
        alpha = std::min(fraction_to_boundary_x(x_, dx, tau), 1e-2);
        x_new = x_ + alpha * dx;
        if (!evaluate_at(x_new, f_new, c_new)) {
          return finish(NlpStatus::kNumericalFailure, "evaluation failed");
        }
        filter_.clear();
        accepted = true;
        kind = 'w';
      } else {
        if (!restoration()) {
          const bool stationary_infeasible = one_norm(c_) > opt_.tolerance;
          return finish(stationary_infeasible ? NlpStatus::kInfeasible : NlpStatus::kNumericalFailure,
                        "restoration phase failed");
        }
        for (int k = 0; k < n; ++k) {
          zl_(k) = has_lo_(k) > 0.0 ? std::min(1e3, mu_ / (x_(k) - lo_(k))) : 0.0;
          zu_(k) = has_hi_(k) > 0.0 ? std::min(1e3, mu_ / (hi_(k) - x_(k))) : 0.0;
        }
        y_ = least_squares_multipliers();
        ++iter_;
        log_iteration(0.0, 0.0, 'r');
        continue;
      }
    } else {
      stalls = 0;
    }

    // Bound multiplier step.
    Vec dzl = Vec::Zero(n);
    Vec dzu = Vec::Zero(n);
    for (int k = 0; k < n; ++k) {
      if (has_lo_(k) > 0.0) {
        const double s = x_(k) - lo_(k);
        dzl(k) = mu_ / s - zl_(k) - zl_(k) / s * dx(k);
      }
      if (has_hi_(k) > 0.0) {
        const double s = hi_(k) - x_(k);
        dzu(k) = mu_ / s - zu_(k) + zu_(k) / s * dx(k);
      }
    }
    const double alpha_z = std::min(fraction_to_boundary_z(zl_, dzl, has_lo_, tau),
                                    fraction_to_boundary_z(zu_, dzu, has_hi_, tau));
    x_ = x_new;
    f_ = f_new;
    c_ = c_new;
    if (m > 0) y_ += alpha * dy;
    zl_ += alpha_z * dzl;
    zu_ += alpha_z * dzu;
    for (int k = 0; k < n; ++k) {
      if (has_lo_(k) > 0.0) {
        const double s = x_(k) - lo_(k);
        zl_(k) = std::clamp(zl_(k), mu_ / (kKappaSigma * s), kKappaSigma * mu_ / s);
      }
      if (has_hi_(k) > 0.0) {
        const double s = hi_(k) - x_(k);
        zu_(k) = std::clamp(zu_(k), mu_ / (kKappaSigma * s), kKappaSigma * mu_ / s);
      }
    }
    if (!evaluate_derivatives()) return finish(NlpStatus::kNumericalFailure, "non-finite derivatives");
    ++iter_;
    log_iteration(alpha, alpha_z, kind);
  }
}

}  // namespace

NlpSolution InteriorPointSolver::solve(const NlpProblem& nlp, const NlpOptions& options) const {
  if (!(options.tolerance > 0.0) || options.max_iterations < 0) {
    throw Error(ErrorCode::kInvalidArgument, "NLP options: tolerance must be > 0");
  }
  std::vector<double> start = options.initial_point.empty() ? nlp.initial_point() : options.initial_point;
  NlpOptions opt = options;
  opt.initial_point = std::move(start);
  InteriorPointRun run(nlp, opt);
  return run.run();
}

}  // namespace bbsoc
