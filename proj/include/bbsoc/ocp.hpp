#pragma once

// Continuous Bolza optimal control problems.
//
// A problem supplies its functions once as a functor with templated members;
// make_ocp_functions() instantiates them for plain doubles and for the dual
// types the transcription differentiates with.

#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bbsoc/ad.hpp"

namespace bbsoc {

/// Directions available at one collocation point: states, controls and the two domain ends.
inline constexpr int kPointDirections = 12;
/// Directions available for endpoint functions: x0, t0, xf, tf.
inline constexpr int kEndpointDirections = 24;

using PointDual = ad::Dual<double, kPointDirections>;
using PointDual2 = ad::Dual<PointDual, kPointDirections>;
using EndpointDual = ad::Dual<double, kEndpointDirections>;
using EndpointDual2 = ad::Dual<EndpointDual, kEndpointDirections>;

#define BBSOC_OCP_POINT_METHODS(T)                                                            \
  virtual void dynamics(std::span<const T> x, std::span<const T> u, const T& t,              \
                        std::span<T> out) const = 0;                                          \
  virtual T lagrange(std::span<const T> x, std::span<const T> u, const T& t) const = 0;

#define BBSOC_OCP_ENDPOINT_METHODS(T)                                                         \
  virtual T mayer(std::span<const T> x0, const T& t0, std::span<const T> xf, const T& tf)     \
      const = 0;                                                                              \
  virtual void boundary(std::span<const T> x0, const T& t0, std::span<const T> xf,           \
                        const T& tf, std::span<T> out) const = 0;

/// Type-erased problem functions.
class OcpFunctions {
 public:
  virtual ~OcpFunctions() = default;

  BBSOC_OCP_POINT_METHODS(double)
  BBSOC_OCP_POINT_METHODS(PointDual)
  BBSOC_OCP_POINT_METHODS(PointDual2)
  BBSOC_OCP_ENDPOINT_METHODS(double)
  BBSOC_OCP_ENDPOINT_METHODS(EndpointDual)
  BBSOC_OCP_ENDPOINT_METHODS(EndpointDual2)

  /// Control-affine decomposition a = g(x) + h(x) u; `input` is row-major n_x by n_u.
  /// Returns false when the problem does not declare one.
  virtual bool affine_split(std::span<const double> x, std::span<double> drift,
                            std::span<double> input) const = 0;
};

#undef BBSOC_OCP_POINT_METHODS
#undef BBSOC_OCP_ENDPOINT_METHODS

namespace detail {

template <class F>
concept HasLagrange = requires(const F& f, std::span<const double> s, const double& t) {
  { f.lagrange(s, s, t) };
};
template <class F>
concept HasMayer = requires(const F& f, std::span<const double> s, const double& t) {
  { f.mayer(s, t, s, t) };
};
template <class F>
concept HasBoundary =
    requires(const F& f, std::span<const double> s, const double& t, std::span<double> o) {
  f.boundary(s, t, s, t, o);
};
template <class F>
concept HasAffine =
    requires(const F& f, std::span<const double> s, std::span<double> o) {
  f.affine(s, o, o);
};

template <class F>
class FunctorOcp final : public OcpFunctions {
 public:
  explicit FunctorOcp(F f) : f_(std::move(f)) {}

#define BBSOC_FORWARD_POINT(T)                                                               \
  void dynamics(std::span<const T> x, std::span<const T> u, const T& t, std::span<T> out)     \
      const override {                                                                        \
    f_.template dynamics<T>(x, u, t, out);                                                    \
  }                                                                                           \
  T lagrange(std::span<const T> x, std::span<const T> u, const T& t) const override {         \
    if constexpr (HasLagrange<F>) {                                                           \
      return f_.template lagrange<T>(x, u, t);                                                \
    } else {                                                                                  \
      return T(0.0);                                                                          \
    }                                                                                         \
  }
#define BBSOC_FORWARD_ENDPOINT(T)                                                            \
  T mayer(std::span<const T> x0, const T& t0, std::span<const T> xf, const T& tf)             \
      const override {                                                                        \
    if constexpr (HasMayer<F>) {                                                              \
      return f_.template mayer<T>(x0, t0, xf, tf);                                            \
    } else {                                                                                  \
      return T(0.0);                                                                          \
    }                                                                                         \
  }                                                                                           \
  void boundary(std::span<const T> x0, const T& t0, std::span<const T> xf, const T& tf,       \
                std::span<T> out) const override {                                            \
    if constexpr (HasBoundary<F>) f_.template boundary<T>(x0, t0, xf, tf, out);               \
  }

  BBSOC_FORWARD_POINT(double)
  BBSOC_FORWARD_POINT(PointDual)
  BBSOC_FORWARD_POINT(PointDual2)
  BBSOC_FORWARD_ENDPOINT(double)
  BBSOC_FORWARD_ENDPOINT(EndpointDual)
  BBSOC_FORWARD_ENDPOINT(EndpointDual2)
#undef BBSOC_FORWARD_POINT
#undef BBSOC_FORWARD_ENDPOINT

  bool affine_split(std::span<const double> x, std::span<double> drift,
                    std::span<double> input) const override {
    if constexpr (HasAffine<F>) {
      f_.affine(x, drift, input);
      return true;
    } else {
      return false;
    }
  }

 private:
  F f_;
};

}  // namespace detail

/// Wraps a functor providing `template <class T> dynamics(x, u, t, out)` and
/// optionally `lagrange`, `mayer`, `boundary` and a double-only `affine(x, g, h)`.
template <class F>
std::shared_ptr<const OcpFunctions> make_ocp_functions(F f) {
  return std::make_shared<detail::FunctorOcp<F>>(std::move(f));
}

/// Fixed or free endpoint time.
struct TimeSpec {
  double value = 0.0;  ///< fixed value, or the initial guess when free
  bool free = false;
  double lower = 0.0;
  double upper = 0.0;

  static TimeSpec fixed(double v) { return {v, false, v, v}; }
  static TimeSpec free_in(double guess, double lo, double hi) { return {guess, true, lo, hi}; }
};

struct OcpDefinition {
  std::string name;
  int n_x = 0;
  int n_u = 0;
  int n_b = 0;  ///< number of general boundary conditions b(x0, t0, xf, tf) = 0
  std::vector<std::string> state_names;
  std::vector<std::string> control_names;
  std::vector<double> u_min;
  std::vector<double> u_max;
  /// Optional state box; empty means unbounded.
  std::vector<double> x_min;
  std::vector<double> x_max;
  /// Simple boundary conditions: fixed endpoint values (nullopt = free).
  std::vector<std::optional<double>> initial_state;
  std::vector<std::optional<double>> final_state;
  TimeSpec t0 = TimeSpec::fixed(0.0);
  TimeSpec tf = TimeSpec::fixed(1.0);
  /// Typical magnitudes for NLP variable scaling; empty selects automatic scaling.
  std::vector<double> state_scale;
  std::vector<double> control_scale;
  /// Constant control used by the first-mesh guess; empty means mid-bound (or zero).
  std::vector<double> control_guess;
  /// Guesses for states without fixed boundary values; nullopt means use the fixed end.
  std::vector<std::optional<double>> state_guess;
  /// Singular-arc regularization weight used unless the caller overrides it.
  double regularization_weight = 1e-6;
  bool has_lagrange = false;
  bool has_mayer = false;
  std::shared_ptr<const OcpFunctions> functions;

  void validate() const;

  /// Control-affine consistency probe: max |a - g - h u| at `probes` random points.
  /// Returns nullopt when no split is declared.
  std::optional<double> affine_split_residual(int probes, unsigned seed) const;

  std::vector<double> dynamics(std::span<const double> x, std::span<const double> u,
                               double t) const;
  double lagrange(std::span<const double> x, std::span<const double> u, double t) const;
};

/// H = L(x, u, t) + lambda^T a(x, u, t).
double hamiltonian(const OcpDefinition& ocp, std::span<const double> x,
                   std::span<const double> u, std::span<const double> lambda, double t);

/// Switching data of one control component: H_u and H_uu at (x, u, lambda, t).
struct ControlSensitivity {
  std::vector<double> h_u;   ///< dH/du_j
  std::vector<double> h_uu;  ///< d^2H/du_j^2
};
ControlSensitivity hamiltonian_control_derivatives(const OcpDefinition& ocp,
                                                   std::span<const double> x,
                                                   std::span<const double> u,
                                                   std::span<const double> lambda, double t);

}  // namespace bbsoc
