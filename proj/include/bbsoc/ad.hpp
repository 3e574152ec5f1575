#pragma once

// Forward-mode automatic differentiation with dual numbers.
//
// Dual<T, N> carries a value and N directional derivatives. Nesting
// Dual<Dual<double, N>, N> gives exact second derivatives (forward over
// forward): seeding both levels with the same directions makes
// x.d[i].d[j] the (i, j) Hessian entry.

#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <type_traits>

namespace bbsoc::ad {

template <typename T, int N>
struct Dual {
  using value_type = T;
  static constexpr int kDirections = N;

  T v{};
  std::array<T, N> d{};

  constexpr Dual() = default;
  constexpr Dual(double value) : v(value) {}  // NOLINT(google-explicit-constructor)
  template <typename U = T, typename = std::enable_if_t<!std::is_same_v<U, double>>>
  constexpr Dual(const T& value) : v(value) {}  // NOLINT(google-explicit-constructor)

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (int i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const T inv = T(1.0) / o.v;
    v *= inv;
    for (int i = 0; i < N; ++i) d[i] = (d[i] - v * o.d[i]) * inv;
    return *this;
  }
  Dual& operator+=(double s) {
    v += s;
    return *this;
  }
  Dual& operator-=(double s) {
    v -= s;
    return *this;
  }
  Dual& operator*=(double s) {
    v *= s;
    for (auto& di : d) di *= s;
    return *this;
  }
  Dual& operator/=(double s) { return *this *= (1.0 / s); }
};

template <typename T>
struct is_dual : std::false_type {};
template <typename T, int N>
struct is_dual<Dual<T, N>> : std::true_type {};
template <typename T>
inline constexpr bool is_dual_v = is_dual<T>::value;

/// Innermost double value of a (possibly nested) dual.
inline double value(double x) { return x; }
template <typename T, int N>
double value(const Dual<T, N>& x) {
  return value(x.v);
}

/// Builds a value seeded in direction `dir` at every nesting level.
template <typename S>
S variable(double x, int dir) {
  if constexpr (is_dual_v<S>) {
    S out;
    out.v = variable<typename S::value_type>(x, dir);
    out.d[dir] = typename S::value_type(1.0);
    return out;
  } else {
    (void)dir;
    return x;
  }
}

// Arithmetic -----------------------------------------------------------------

template <typename T, int N>
Dual<T, N> operator-(const Dual<T, N>& a) {
  Dual<T, N> r;
  r.v = -a.v;
  for (int i = 0; i < N; ++i) r.d[i] = -a.d[i];
  return r;
}
template <typename T, int N>
Dual<T, N> operator+(const Dual<T, N>& a) {
  return a;
}

template <typename T, int N>
Dual<T, N> operator+(Dual<T, N> a, const Dual<T, N>& b) {
  return a += b;
}
template <typename T, int N>
Dual<T, N> operator-(Dual<T, N> a, const Dual<T, N>& b) {
  return a -= b;
}
template <typename T, int N>
Dual<T, N> operator*(Dual<T, N> a, const Dual<T, N>& b) {
  return a *= b;
}
template <typename T, int N>
Dual<T, N> operator/(Dual<T, N> a, const Dual<T, N>& b) {
  return a /= b;
}

template <typename T, int N>
Dual<T, N> operator+(Dual<T, N> a, double s) {
  return a += s;
}
template <typename T, int N>
Dual<T, N> operator+(double s, Dual<T, N> a) {
  return a += s;
}
template <typename T, int N>
Dual<T, N> operator-(Dual<T, N> a, double s) {
  return a -= s;
}
template <typename T, int N>
Dual<T, N> operator-(double s, const Dual<T, N>& a) {
  Dual<T, N> r = -a;
  return r += s;
}
template <typename T, int N>
Dual<T, N> operator*(Dual<T, N> a, double s) {
  return a *= s;
}
template <typename T, int N>
Dual<T, N> operator*(double s, Dual<T, N> a) {
  return a *= s;
}
template <typename T, int N>
Dual<T, N> operator/(Dual<T, N> a, double s) {
  return a /= s;
}
template <typename T, int N>
Dual<T, N> operator/(double s, const Dual<T, N>& a) {
  Dual<T, N> r(s);
  return r /= a;
}

// Comparisons act on the innermost value so control flow is the same at
// every differentiation level.
#define BBSOC_AD_COMPARE(op)                                                       \
  template <typename T, int N>                                                     \
  bool operator op(const Dual<T, N>& a, const Dual<T, N>& b) {                     \
    return value(a) op value(b);                                                   \
  }                                                                                \
  template <typename T, int N>                                                     \
  bool operator op(const Dual<T, N>& a, double b) {                                \
    return value(a) op b;                                                          \
  }                                                                                \
  template <typename T, int N>                                                     \
  bool operator op(double a, const Dual<T, N>& b) {                                \
    return a op value(b);                                                          \
  }
BBSOC_AD_COMPARE(<)
BBSOC_AD_COMPARE(<=)
BBSOC_AD_COMPARE(>)
BBSOC_AD_COMPARE(>=)
BBSOC_AD_COMPARE(==)
BBSOC_AD_COMPARE(!=)
#undef BBSOC_AD_COMPARE

// Elementary functions: f(a) with f'(a) applied to every direction. -----------

namespace detail {
template <typename T, int N>
Dual<T, N> chain(const Dual<T, N>& a, const T& f, const T& df) {
  Dual<T, N> r;
  r.v = f;
  for (int i = 0; i < N; ++i) r.d[i] = df * a.d[i];
  return r;
}
}  // namespace detail

using std::acos;
using std::asin;
using std::atan;
using std::atan2;
using std::cos;
using std::cosh;
using std::exp;
using std::log;
using std::pow;
using std::sin;
using std::sinh;
using std::sqrt;
using std::tan;
using std::tanh;

template <typename T, int N>
Dual<T, N> sin(const Dual<T, N>& a) {
  return detail::chain(a, T(sin(a.v)), T(cos(a.v)));
}
template <typename T, int N>
Dual<T, N> cos(const Dual<T, N>& a) {
  return detail::chain(a, T(cos(a.v)), T(-sin(a.v)));
}
template <typename T, int N>
Dual<T, N> tan(const Dual<T, N>& a) {
  const T t = tan(a.v);
  return detail::chain(a, t, T(1.0 + t * t));
}
template <typename T, int N>
Dual<T, N> exp(const Dual<T, N>& a) {
  const T e = exp(a.v);
  return detail::chain(a, e, e);
}
template <typename T, int N>
Dual<T, N> log(const Dual<T, N>& a) {
  return detail::chain(a, T(log(a.v)), T(1.0 / a.v));
}
template <typename T, int N>
Dual<T, N> sqrt(const Dual<T, N>& a) {
  const T s = sqrt(a.v);
  return detail::chain(a, s, T(0.5 / s));
}
template <typename T, int N>
Dual<T, N> sinh(const Dual<T, N>& a) {
  return detail::chain(a, T(sinh(a.v)), T(cosh(a.v)));
}
template <typename T, int N>
Dual<T, N> cosh(const Dual<T, N>& a) {
  return detail::chain(a, T(cosh(a.v)), T(sinh(a.v)));
}
template <typename T, int N>
Dual<T, N> tanh(const Dual<T, N>& a) {
  const T t = tanh(a.v);
  return detail::chain(a, t, T(1.0 - t * t));
}
template <typename T, int N>
Dual<T, N> atan(const Dual<T, N>& a) {
  return detail::chain(a, T(atan(a.v)), T(1.0 / (1.0 + a.v * a.v)));
}
template <typename T, int N>
Dual<T, N> asin(const Dual<T, N>& a) {
  return detail::chain(a, T(asin(a.v)), T(1.0 / sqrt(1.0 - a.v * a.v)));
}
template <typename T, int N>
Dual<T, N> acos(const Dual<T, N>& a) {
  return detail::chain(a, T(acos(a.v)), T(-1.0 / sqrt(1.0 - a.v * a.v)));
}
template <typename T, int N>
Dual<T, N> atan2(const Dual<T, N>& y, const Dual<T, N>& x) {
  const T r2 = x.v * x.v + y.v * y.v;
  Dual<T, N> r;
  r.v = atan2(y.v, x.v);
  for (int i = 0; i < N; ++i) r.d[i] = (x.v * y.d[i] - y.v * x.d[i]) / r2;
  return r;
}
template <typename T, int N>
Dual<T, N> pow(const Dual<T, N>& a, double p) {
  if (p == 0.0) return Dual<T, N>(1.0);
  if (p == 1.0) return a;
  if (p == 2.0) return a * a;
  return detail::chain(a, T(pow(a.v, p)), T(p * pow(a.v, p - 1.0)));
}
template <typename T, int N>
Dual<T, N> pow(const Dual<T, N>& a, const Dual<T, N>& p) {
  return exp(p * log(a));
}
template <typename T, int N>
Dual<T, N> pow(double a, const Dual<T, N>& p) {
  return exp(p * std::log(a));
}

/// |a|; the derivative at exactly zero is undefined and is reported as NaN.
template <typename T, int N>
Dual<T, N> abs(const Dual<T, N>& a) {
  const double x = value(a);
  if (x > 0.0) return a;
  if (x < 0.0) return -a;
  return detail::chain(a, T(0.0), T(std::numeric_limits<double>::quiet_NaN()));
}
template <typename T, int N>
Dual<T, N> fabs(const Dual<T, N>& a) {
  return abs(a);
}
inline double abs(double a) { return std::fabs(a); }

template <typename T, int N>
std::ostream& operator<<(std::ostream& os, const Dual<T, N>& a) {
  return os << value(a);
}

}  // namespace bbsoc::ad
