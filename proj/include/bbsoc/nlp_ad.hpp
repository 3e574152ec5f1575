#pragma once

// Small dense NLPs whose derivatives come from forward-mode AD.

#include <functional>
#include <utility>
#include <vector>

#include "bbsoc/ad.hpp"
#include "bbsoc/error.hpp"
#include "bbsoc/nlp.hpp"

namespace bbsoc {

/// `F` provides `template <class T> T objective(std::span<const T>) const` and
/// `template <class T> void constraints(std::span<const T>, std::span<T>) const`.
/// N is the (compile-time) number of variables.
template <int N, class F>
class DenseAdNlp final : public NlpProblem {
 public:
  using D1 = ad::Dual<double, N>;
  using D2 = ad::Dual<D1, N>;

  DenseAdNlp(F fn, int m, std::vector<double> lo, std::vector<double> hi, std::vector<double> x0)
      : fn_(std::move(fn)), m_(m), lo_(std::move(lo)), hi_(std::move(hi)), x0_(std::move(x0)) {
    if (static_cast<int>(lo_.size()) != N || static_cast<int>(hi_.size()) != N ||
        static_cast<int>(x0_.size()) != N) {
      throw Error(ErrorCode::kDimensionMismatch, "DenseAdNlp: bounds and start need N entries");
    }
  }

  int num_variables() const override { return N; }
  int num_constraints() const override { return m_; }
  void bounds(std::span<double> lo, std::span<double> hi) const override {
    std::copy(lo_.begin(), lo_.end(), lo.begin());
    std::copy(hi_.begin(), hi_.end(), hi.begin());
  }
  std::vector<double> initial_point() const override { return x0_; }

  double objective(std::span<const double> x) const override { return fn_.template objective<double>(x); }

  void gradient(std::span<const double> x, std::span<double> grad) const override {
    const std::vector<D1> xd = seed<D1>(x);
    const D1 f = fn_.template objective<D1>(std::span<const D1>(xd));
    for (int i = 0; i < N; ++i) grad[i] = f.d[i];
  }

  void constraints(std::span<const double> x, std::span<double> c) const override {
    if (m_ > 0) fn_.template constraints<double>(x, c);
  }

  SparsityPattern jacobian_pattern() const override {
    SparsityPattern p;
    for (int j = 0; j < m_; ++j) {
      for (int i = 0; i < N; ++i) {
        p.rows.push_back(j);
        p.cols.push_back(i);
      }
    }
    return p;
  }

  void jacobian_values(std::span<const double> x, std::span<double> values) const override {
    if (m_ == 0) return;
    const std::vector<D1> xd = seed<D1>(x);
    std::vector<D1> c(static_cast<std::size_t>(m_));
    fn_.template constraints<D1>(std::span<const D1>(xd), std::span<D1>(c));
    for (int j = 0; j < m_; ++j) {
      for (int i = 0; i < N; ++i) values[static_cast<std::size_t>(j) * N + i] = c[j].d[i];
    }
  }

  SparsityPattern hessian_pattern() const override {
    SparsityPattern p;
    for (int r = 0; r < N; ++r) {
      for (int c = 0; c <= r; ++c) {
        p.rows.push_back(r);
        p.cols.push_back(c);
      }
    }
    return p;
  }

  void hessian_values(std::span<const double> x, double obj_factor, std::span<const double> y,
                      std::span<double> values) const override {
    const std::vector<D2> xd = seed<D2>(x);
    D2 lag = fn_.template objective<D2>(std::span<const D2>(xd)) * obj_factor;
    if (m_ > 0) {
      std::vector<D2> c(static_cast<std::size_t>(m_));
      fn_.template constraints<D2>(std::span<const D2>(xd), std::span<D2>(c));
      for (int j = 0; j < m_; ++j) lag += c[j] * y[j];
    }
    std::size_t e = 0;
    for (int r = 0; r < N; ++r) {
      for (int c = 0; c <= r; ++c) values[e++] = lag.d[r].d[c];
    }
  }

 private:
  template <class T>
  static std::vector<T> seed(std::span<const double> x) {
    std::vector<T> out(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) out[i] = ad::variable<T>(x[i], i);
    return out;
  }

  F fn_;
  int m_;
  std::vector<double> lo_, hi_, x0_;
};

template <int N, class F>
DenseAdNlp<N, F> make_dense_ad_nlp(F fn, int m, std::vector<double> lo, std::vector<double> hi,
                                   std::vector<double> x0) {
  return DenseAdNlp<N, F>(std::move(fn), m, std::move(lo), std::move(hi), std::move(x0));
}

}  // namespace bbsoc
