#pragma once

// Quadratic proximity regularization of singular arcs.

#include <algorithm>
#include <optional>
#include <span>
#include <vector>

#include "bbsoc/ad.hpp"
#include "bbsoc/lgr.hpp"

namespace bbsoc {

/// Monotonicity-preserving piecewise cubic Hermite interpolant (Fritsch-Carlson
/// slope limiting). Constant extension outside the knot range.
class MonotoneCubicSpline {
 public:
  MonotoneCubicSpline() = default;
  /// Knots must be strictly increasing; at least one sample is required.
  MonotoneCubicSpline(std::vector<double> knots, std::vector<double> values);

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& slopes() const { return slopes_; }
  bool empty() const { return knots_.empty(); }

  template <class T>
  T operator()(const T& t) const {
    if (knots_.empty()) return T(0.0);
    const double tv = ad::value(t);
    if (knots_.size() == 1 || tv <= knots_.front()) return T(values_.front());
    if (tv >= knots_.back()) return T(values_.back());
    const std::size_t k =
        static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), tv) - knots_.begin()) - 1;
    const double h = knots_[k + 1] - knots_[k];
    const T s = (t - knots_[k]) / h;
    const T s2 = s * s;
    const T s3 = s2 * s;
    const T h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const T h10 = s3 - 2.0 * s2 + s;
    const T h01 = -2.0 * s3 + 3.0 * s2;
    const T h11 = s3 - s2;
    return h00 * values_[k] + h10 * (h * slopes_[k]) + h01 * values_[k + 1] + h11 * (h * slopes_[k + 1]);
  }

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
  std::vector<double> slopes_;
};

/// Target function alpha for each domain and control component; nullopt means alpha = 0.
using AlphaTable = std::vector<std::vector<std::optional<MonotoneCubicSpline>>>;

/// What the transcription adds to the objective on Singular domains.
struct RegularizationTerms {
  double epsilon = 1e-6;
  AlphaTable alpha;
};

struct RegularizationState {
  int p = 1;
  double epsilon = 1e-6;
  AlphaTable alpha;                 ///< per domain, per control component
  std::vector<double> delta;        ///< last penalty value per domain
  std::vector<double> history;      ///< total penalty per iteration
};

enum class RegularizationStatus { kContinue, kConverged, kStalled };

const char* to_string(RegularizationStatus s);

/// (eps / 2) * (width / 2) * sum_j w_j (u_j - alpha(t_j))^2 for weights on [-1, 1].
/// A null alpha means alpha = 0. Throws ErrorCode::kInvalidWeight if eps <= 0.
double penalty_value(std::span<const double> u, std::span<const double> times,
                     std::span<const double> weights, const MonotoneCubicSpline* alpha, double epsilon,
                     double width);

/// Same, on a single LGR rule mapped onto [t_a, t_b].
double penalty_value(std::span<const double> u, const QuadratureRule& rule, double t_a, double t_b,
                     const MonotoneCubicSpline* alpha, double epsilon);

/// Terms for the transcription: alpha from `state` (zero on the first pass).
RegularizationTerms augment(const RegularizationState& state);

/// alpha_{p+1}: spline through the previous control samples.
MonotoneCubicSpline update_alpha(std::span<const double> times, std::span<const double> controls);

/// Converged if the last total penalty <= sigma; stalled if the last three agree to 1e-12 relative.
RegularizationStatus check_convergence(const RegularizationState& state, double sigma);

}  // namespace bbsoc
