#pragma once

// Dense univariate polynomials with coefficients stored lowest degree first.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "tandemq/error.hpp"

namespace tandemq {

template <class T = std::complex<double>>
class Polynomial {
 public:
  Polynomial() : c_{T{}} {}
  explicit Polynomial(std::vector<T> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) c_.push_back(T{});
  }
  Polynomial(std::initializer_list<T> coeffs) : Polynomial(std::vector<T>(coeffs)) {}

  static Polynomial monomial(int degree, T coeff = T(1)) {
    std::vector<T> c(static_cast<std::size_t>(degree) + 1, T{});
    c.back() = coeff;
    return Polynomial(std::move(c));
  }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<T>& coeffs() const { return c_; }
  const T& operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }

  // Drops trailing coefficients with |c| <= tol * max|c|.
  Polynomial trimmed(double tol = 0.0) const {
    double scale = 0;
    for (const T& v : c_) scale = std::max(scale, static_cast<double>(std::abs(v)));
    std::vector<T> c = c_;
    while (c.size() > 1 && std::abs(c.back()) <= tol * scale) c.pop_back();
    return Polynomial(std::move(c));
  }

  // Horner evaluation; works for any argument type closed under +, * with T.
  template <class U>
  auto operator()(const U& x) const {
    auto r = x * T{} + c_.back();
    for (std::size_t i = c_.size() - 1; i-- > 0;) r = r * x + c_[i];
    return r;
  }

  Polynomial derivative() const {
    if (c_.size() == 1) return Polynomial();
    std::vector<T> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<double>(i);
    return Polynomial(std::move(d));
  }

  // Synthetic division by (x - root); the remainder is discarded.
  Polynomial deflated(const T& root) const {
    if (c_.size() == 1) return Polynomial();
    std::vector<T> q(c_.size() - 1);
    T carry = c_.back();
    for (std::size_t i = c_.size() - 1; i-- > 0;) {
      q[i] = carry;
      carry = c_[i] + carry * root;
    }
    return Polynomial(std::move(q));
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<T> c(std::max(a.c_.size(), b.c_.size()), T{});
    for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
    return Polynomial(std::move(c));
  }
  friend Polynomial operator-(const Polynomial& a) {
    Polynomial r = a;
    for (T& v : r.c_) v = -v;
    return r;
  }
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    std::vector<T> c(a.c_.size() + b.c_.size() - 1, T{});
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(c));
  }
  friend Polynomial operator*(const Polynomial& a, const T& s) {
    Polynomial r = a;
    for (T& v : r.c_) v *= s;
    return r;
  }
  friend Polynomial operator*(const T& s, const Polynomial& a) { return a * s; }
  friend Polynomial operator+(const Polynomial& a, const T& s) { return a + Polynomial{s}; }
  friend Polynomial operator+(const T& s, const Polynomial& a) { return a + Polynomial{s}; }
  friend Polynomial operator-(const Polynomial& a, const T& s) { return a + Polynomial{-s}; }
  friend Polynomial operator-(const T& s, const Polynomial& a) { return Polynomial{s} - a; }

 private:
  std::vector<T> c_;
};

using RealPoly = Polynomial<double>;
using ComplexPoly = Polynomial<std::complex<double>>;

template <class T>
ComplexPoly to_complex(const Polynomial<T>& p) {
  std::vector<std::complex<double>> c;
  for (const T& v : p.coeffs()) c.emplace_back(v);
  return ComplexPoly(std::move(c));
}

// All roots via eigenvalues of the companion matrix, each polished by a few
// Newton steps on the original polynomial.
template <class T>
std::vector<std::complex<double>> polynomial_roots(const Polynomial<T>& poly_in) {
  const ComplexPoly p = to_complex(poly_in).trimmed(1e-300);
  const int n = p.degree();
  if (n < 1) return {};
  if (n == 1) return {-p[0] / p[1]};
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -p[i] / p[n];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  if (es.info() != Eigen::Success) throw NumericalError("polynomial_roots: eigenvalue solver failed");
  const ComplexPoly dp = p.derivative();
  std::vector<std::complex<double>> roots(es.eigenvalues().data(), es.eigenvalues().data() + n);
  for (auto& r : roots) {
    for (int it = 0; it < 8; ++it) {
      const auto d = dp(r);
      if (std::abs(d) == 0.0) break;
      const auto step = p(r) / d;
      const auto cand = r - step;
      if (!(std::abs(p(cand)) < std::abs(p(r)))) break;
      r = cand;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(r))) break;
    }
  }
  std::sort(roots.begin(), roots.end(),
            [](const auto& a, const auto& b) { return std::abs(a) < std::abs(b); });
  return roots;
}

// Number of zeros inside |x| < radius by the argument principle: the total
// change of arg p along the circle, accumulated in small steps.
template <class T>
int winding_count(const Polynomial<T>& poly, double radius, int samples = 4096) {
  const ComplexPoly p = to_complex(poly);
  double total = 0.0;
  std::complex<double> prev = p(std::complex<double>(radius, 0.0));
  if (std::abs(prev) == 0.0) throw NumericalError("winding_count: zero on the circle");
  for (int k = 1; k <= samples; ++k) {
    const double t = 2.0 * std::numbers::pi * k / samples;
    const auto cur = p(std::polar(radius, t));
    if (std::abs(cur) == 0.0) throw NumericalError("winding_count: zero on the circle");
    const double step = std::arg(cur / prev);
    if (std::abs(step) > 1.0) {
      if (samples >= (1 << 20)) throw NumericalError("winding_count: phase not resolved");
      return winding_count(poly, radius, samples * 4);
    }
    total += step;
    prev = cur;
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

}  // namespace tandemq
