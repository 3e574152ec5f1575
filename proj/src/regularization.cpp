#include "bbsoc/regularization.hpp"

#include <cmath>

#include "bbsoc/error.hpp"

namespace bbsoc {

MonotoneCubicSpline::MonotoneCubicSpline(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  if (knots_.size() != values_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "spline: knots and values differ in length");
  }
  if (knots_.empty()) throw Error(ErrorCode::kInvalidArgument, "spline: no samples");
  const std::size_t n = knots_.size();
  for (std::size_t k = 1; k < n; ++k) {
    if (!(knots_[k] > knots_[k - 1])) {
      throw Error(ErrorCode::kInvalidArgument, "spline: knots must be strictly increasing");
    }
  }
  slopes_.assign(n, 0.0);
  if (n == 1) return;
  std::vector<double> secant(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    secant[k] = (values_[k + 1] - values_[k]) / (knots_[k + 1] - knots_[k]);
  }
  slopes_.front() = secant.front();
  slopes_.back() = secant.back();
  for (std::size_t k = 1; k + 1 < n; ++k) {
    slopes_[k] = secant[k - 1] * secant[k] <= 0.0 ? 0.0 : 0.5 * (secant[k - 1] + secant[k]);
  }
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (secant[k] == 0.0) {
      slopes_[k] = 0.0;
      slopes_[k + 1] = 0.0;
      continue;
    }
    const double a = slopes_[k] / secant[k];
    const double b = slopes_[k + 1] / secant[k];
    // Endpoint slopes may oppose the secant after neighbouring zeroing.
    if (a < 0.0) slopes_[k] = 0.0;
    if (b < 0.0) slopes_[k + 1] = 0.0;
    const double r = a * a + b * b;
    if (r > 9.0) {
      const double tau = 3.0 / std::sqrt(r);
      slopes_[k] = tau * a * secant[k];
      slopes_[k + 1] = tau * b * secant[k];
    }
  }
}

const char* to_string(RegularizationStatus s) {
  switch (s) {
    case RegularizationStatus::kContinue:
      return "continue";
    case RegularizationStatus::kConverged:
      return "converged";
    case RegularizationStatus::kStalled:
      return "stalled";
  }
  return "unknown";
}

double penalty_value(std::span<const double> u, std::span<const double> times,
                     std::span<const double> weights, const MonotoneCubicSpline* alpha, double epsilon,
                     double width) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kInvalidWeight, "regularization weight must be > 0");
  if (u.size() != times.size() || u.size() != weights.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "penalty_value: sample counts differ");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double target = alpha ? (*alpha)(times[j]) : 0.0;
    const double e = u[j] - target;
    sum += weights[j] * e * e;
  }
  return 0.5 * epsilon * 0.5 * width * sum;
}

double penalty_value(std::span<const double> u, const QuadratureRule& rule, double t_a, double t_b,
                     const MonotoneCubicSpline* alpha, double epsilon) {
  std::vector<double> times(rule.points.size());
  for (std::size_t j = 0; j < times.size(); ++j) times[j] = affine_map(rule.points[j], t_a, t_b);
  return penalty_value(u, times, rule.weights, alpha, epsilon, t_b - t_a);
}

RegularizationTerms augment(const RegularizationState& state) {
  if (!(state.epsilon > 0.0)) throw Error(ErrorCode::kInvalidWeight, "regularization weight must be > 0");
  RegularizationTerms terms;
  terms.epsilon = state.epsilon;
  terms.alpha = state.alpha;
  return terms;
}

MonotoneCubicSpline update_alpha(std::span<const double> times, std::span<const double> controls) {
  return MonotoneCubicSpline(std::vector<double>(times.begin(), times.end()),
                             std::vector<double>(controls.begin(), controls.end()));
}

RegularizationStatus check_convergence(const RegularizationState& state, double sigma) {
  const std::vector<double>& h = state.history;
  if (h.empty()) return RegularizationStatus::kContinue;
  if (h.back() <= sigma) return RegularizationStatus::kConverged;
  if (h.size() >= 3) {
    const double a = h[h.size() - 1];
    const double b = h[h.size() - 2];
    const double c = h[h.size() - 3];
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
    if (std::abs(a - b) <= 1e-12 * scale && std::abs(b - c) <= 1e-12 * scale) {
      return RegularizationStatus::kStalled;
    }
  }
  return RegularizationStatus::kContinue;
}

}  // namespace bbsoc
