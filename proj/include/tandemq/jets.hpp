#pragma once

// Truncated Taylor series ("jets") in one and two variables about an arbitrary
// complex center, with exact handling of removable singularities.
//
// A Jet1 of order K at center x0 stores c[0..K] representing
//   sum_i c[i] (x - x0)^i + O((x - x0)^(K+1)).
// A TaylorJet2 of orders (Kx, Ky) at (x0, y0) stores c[i][j] for i <= Kx,
// j <= Ky. Orders are per axis, not total degree. Binary operations require
// identical centers and truncate to the smaller order on each axis.

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "tandemq/error.hpp"

namespace tandemq {

using cplx = std::complex<double>;

// Relative threshold below which leading coefficients count as cancelled.
inline constexpr double kDefaultEpsCancel = 1e-9;

namespace detail {

template <class T>
double magnitude(const T& v) {
  return std::abs(v);
}

inline double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

template <class S>
void require_same_center(const S& a, const S& b, const char* op) {
  if (a != b) throw std::invalid_argument(std::string(op) + ": jet centers differ");
}

}  // namespace detail

template <class T>
concept RealArithmetic = std::is_arithmetic_v<T>;

// ---------------------------------------------------------------------------
// Jet1
// ---------------------------------------------------------------------------

template <class S = cplx>
class Jet1 {
 public:
  using value_type = S;

  Jet1() : center_{}, c_(1, S{}) {}
  Jet1(S center, int order) : center_(center), c_(static_cast<std::size_t>(check_order(order)) + 1, S{}) {}
  Jet1(S center, std::vector<S> coeffs) : center_(center), c_(std::move(coeffs)) {
    if (c_.empty()) throw std::invalid_argument("Jet1: empty coefficient list");
  }

  static Jet1 constant(S value, S center, int order) {
    Jet1 j(center, order);
    j.c_[0] = value;
    return j;
  }

  // The identity function x, expanded about `center`.
  static Jet1 variable(S center, int order) {
    Jet1 j(center, order);
    j.c_[0] = center;
    if (order >= 1) j.c_[1] = S(1);
    return j;
  }

  int order() const { return static_cast<int>(c_.size()) - 1; }
  const S& center() const { return center_; }
  const S& operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  S& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }
  std::span<const S> coeffs() const { return c_; }
  S value() const { return c_[0]; }

  double max_abs() const {
    double m = 0;
    for (const S& v : c_) m = std::max(m, detail::magnitude(v));
    return m;
  }

  // k-th derivative at the center.
  S derivative(int k) const {
    if (k < 0 || k > order()) throw std::out_of_range("Jet1::derivative: order overflow");
    return S(detail::factorial(k)) * c_[static_cast<std::size_t>(k)];
  }

  // Evaluates the truncated series at x = center + offset.
  S evaluate_offset(S offset) const {
    S r{};
    for (int i = order(); i >= 0; --i) r = r * offset + c_[static_cast<std::size_t>(i)];
    return r;
  }

  Jet1 truncated(int order) const {
    if (order > this->order()) throw std::invalid_argument("Jet1::truncated: order larger than available");
    return Jet1(center_, std::vector<S>(c_.begin(), c_.begin() + order + 1));
  }

  Jet1& operator+=(const Jet1& o) { return *this = *this + o; }
  Jet1& operator-=(const Jet1& o) { return *this = *this - o; }
  Jet1& operator*=(const Jet1& o) { return *this = *this * o; }

  friend Jet1 operator+(const Jet1& a, const Jet1& b) {
    detail::require_same_center(a.center_, b.center_, "Jet1 +");
    Jet1 r(a.center_, std::min(a.order(), b.order()));
    for (int i = 0; i <= r.order(); ++i) r[i] = a[i] + b[i];
    return r;
  }
  friend Jet1 operator-(const Jet1& a, const Jet1& b) {
    detail::require_same_center(a.center_, b.center_, "Jet1 -");
    Jet1 r(a.center_, std::min(a.order(), b.order()));
    for (int i = 0; i <= r.order(); ++i) r[i] = a[i] - b[i];
    return r;
  }
  friend Jet1 operator-(const Jet1& a) {
    Jet1 r = a;
    for (S& v : r.c_) v = -v;
    return r;
  }
  friend Jet1 operator*(const Jet1& a, const Jet1& b) {
    detail::require_same_center(a.center_, b.center_, "Jet1 *");
    Jet1 r(a.center_, std::min(a.order(), b.order()));
    for (int i = 0; i <= r.order(); ++i) {
      S s{};
      for (int k = 0; k <= i; ++k) s += a[k] * b[i - k];
      r[i] = s;
    }
    return r;
  }
  friend Jet1 operator/(const Jet1& a, const Jet1& b) { return jet_div(a, b); }

  friend Jet1 operator+(const Jet1& a, const S& s) {
    Jet1 r = a;
    r[0] += s;
    return r;
  }
  friend Jet1 operator+(const S& s, const Jet1& a) { return a + s; }
  friend Jet1 operator-(const Jet1& a, const S& s) { return a + (-s); }
  friend Jet1 operator-(const S& s, const Jet1& a) { return (-a) + s; }
  friend Jet1 operator*(const Jet1& a, const S& s) {
    Jet1 r = a;
    for (S& v : r.c_) v *= s;
    return r;
  }
  friend Jet1 operator*(const S& s, const Jet1& a) { return a * s; }
  friend Jet1 operator/(const Jet1& a, const S& s) { return a * (S(1) / s); }
  friend Jet1 operator/(const S& s, const Jet1& a) { return jet_div(Jet1::constant(s, a.center_, a.order()), a); }

  template <RealArithmetic T>
  friend Jet1 operator+(const Jet1& a, T s) { return a + S(s); }
  template <RealArithmetic T>
  friend Jet1 operator+(T s, const Jet1& a) { return a + S(s); }
  template <RealArithmetic T>
  friend Jet1 operator-(const Jet1& a, T s) { return a - S(s); }
  template <RealArithmetic T>
  friend Jet1 operator-(T s, const Jet1& a) { return S(s) - a; }
  template <RealArithmetic T>
  friend Jet1 operator*(const Jet1& a, T s) { return a * S(s); }
  template <RealArithmetic T>
  friend Jet1 operator*(T s, const Jet1& a) { return a * S(s); }
  template <RealArithmetic T>
  friend Jet1 operator/(const Jet1& a, T s) { return a / S(s); }
  template <RealArithmetic T>
  friend Jet1 operator/(T s, const Jet1& a) { return S(s) / a; }

  // Regular division; the divisor needs a nonzero constant term.
  friend Jet1 jet_div(const Jet1& a, const Jet1& b) {
    detail::require_same_center(a.center_, b.center_, "jet_div");
    const double scale = b.max_abs();
    if (detail::magnitude(b[0]) <= 1e-14 * scale || scale == 0.0) {
      throw NumericalError("jet_div: divisor has zero constant term; use jet_cancel_div");
    }
    Jet1 r(a.center_, std::min(a.order(), b.order()));
    for (int i = 0; i <= r.order(); ++i) {
      S s = a[i];
      for (int k = 1; k <= i; ++k) s -= r[i - k] * b[k];
      r[i] = s / b[0];
    }
    return r;
  }

  // Divides by (x - center)^k. The first k coefficients must vanish relative
  // to the largest coefficient; the result has order reduced by k.
  friend Jet1 jet_cancel_div(const Jet1& a, int k, double eps = kDefaultEpsCancel) {
    if (k < 0) throw std::invalid_argument("jet_cancel_div: negative power");
    if (k > a.order()) throw NumericalError("jet_cancel_div: order budget exhausted; increase order budget");
    const double scale = std::max(a.max_abs(), 1e-300);
    double residual = 0;
    for (int i = 0; i < k; ++i) residual = std::max(residual, detail::magnitude(a[i]) / scale);
    if (residual > eps) throw CancellationError("singularity not removable at requested order", residual);
    return Jet1(a.center_, std::vector<S>(a.c_.begin() + k, a.c_.end()));
  }

 private:
  static int check_order(int order) {
    if (order < 0) throw std::invalid_argument("jet order must be non-negative");
    return order;
  }

  S center_;
  std::vector<S> c_;
};

// num/den where both may vanish at the center: strips the leading zeros of den
// (up to max_k of them) from both before dividing.
template <class S>
Jet1<S> cancel_ratio(const Jet1<S>& num, const Jet1<S>& den, int max_k = 2, double eps = kDefaultEpsCancel) {
  const double scale = std::max(den.max_abs(), 1e-300);
  int k = 0;
  while (k < max_k && k < den.order() && detail::magnitude(den[k]) <= eps * scale) ++k;
  if (k == 0) return jet_div(num, den);
  return jet_div(jet_cancel_div(num, k, eps), jet_cancel_div(den, k, eps));
}

// Composition f(g(x)) where f is given by its Taylor coefficients about g(x0).
template <class S>
Jet1<S> compose(std::span<const S> f_coeffs, const Jet1<S>& g) {
  Jet1<S> delta = g - g.value();
  Jet1<S> r = Jet1<S>::constant(S{}, g.center(), g.order());
  for (std::size_t i = f_coeffs.size(); i-- > 0;) r = r * delta + f_coeffs[i];
  return r;
}

// Taylor expansion of the polynomial sum_n a[n] x^n about x0, order K.
template <class S>
Jet1<S> polynomial_jet(std::span<const S> a, S x0, int order) {
  Jet1<S> x = Jet1<S>::variable(x0, order);
  Jet1<S> r = Jet1<S>::constant(S{}, x0, order);
  for (std::size_t n = a.size(); n-- > 0;) r = r * x + a[n];
  return r;
}

// ---------------------------------------------------------------------------
// TaylorJet2
// ---------------------------------------------------------------------------

enum class Axis { x, y };

template <class S = cplx>
class TaylorJet2 {
 public:
  using value_type = S;
  using Center = std::pair<S, S>;

  TaylorJet2() : TaylorJet2(Center{}, 0, 0) {}
  TaylorJet2(Center center, int kx, int ky)
      : center_(std::move(center)), kx_(kx), ky_(ky) {
    if (kx < 0 || ky < 0) throw std::invalid_argument("TaylorJet2: negative order");
    c_.assign(static_cast<std::size_t>((kx + 1) * (ky + 1)), S{});
  }

  static TaylorJet2 constant(S value, Center center, int kx, int ky) {
    TaylorJet2 j(center, kx, ky);
    j(0, 0) = value;
    return j;
  }
  static TaylorJet2 variable_x(Center center, int kx, int ky) {
    TaylorJet2 j(center, kx, ky);
    j(0, 0) = center.first;
    if (kx >= 1) j(1, 0) = S(1);
    return j;
  }
  static TaylorJet2 variable_y(Center center, int kx, int ky) {
    TaylorJet2 j(center, kx, ky);
    j(0, 0) = center.second;
    if (ky >= 1) j(0, 1) = S(1);
    return j;
  }
  // Lifts a function of x alone; its expansion center supplies x0.
  static TaylorJet2 from_x(const Jet1<S>& a, S y0, int ky) {
    TaylorJet2 j({a.center(), y0}, a.order(), ky);
    for (int i = 0; i <= a.order(); ++i) j(i, 0) = a[i];
    return j;
  }
  static TaylorJet2 from_y(const Jet1<S>& b, S x0, int kx) {
    TaylorJet2 j({x0, b.center()}, kx, b.order());
    for (int k = 0; k <= b.order(); ++k) j(0, k) = b[k];
    return j;
  }

  const Center& center() const { return center_; }
  int order_x() const { return kx_; }
  int order_y() const { return ky_; }
  const S& operator()(int i, int j) const { return c_[index(i, j)]; }
  S& operator()(int i, int j) { return c_[index(i, j)]; }

  double max_abs() const {
    double m = 0;
    for (const S& v : c_) m = std::max(m, detail::magnitude(v));
    return m;
  }

  // Evaluates the truncated series at (x0 + du, y0 + dv).
  S evaluate_offset(S du, S dv) const {
    S r{};
    for (int i = kx_; i >= 0; --i) {
      S row{};
      for (int j = ky_; j >= 0; --j) row = row * dv + (*this)(i, j);
      r = r * du + row;
    }
    return r;
  }

  // Slice at y = y0 as a jet in x.
  Jet1<S> x_slice() const {
    Jet1<S> r(center_.first, kx_);
    for (int i = 0; i <= kx_; ++i) r[i] = (*this)(i, 0);
    return r;
  }

  TaylorJet2 truncated(int kx, int ky) const {
    if (kx > kx_ || ky > ky_) throw std::invalid_argument("TaylorJet2::truncated: order larger than available");
    TaylorJet2 r(center_, kx, ky);
    for (int i = 0; i <= kx; ++i)
      for (int j = 0; j <= ky; ++j) r(i, j) = (*this)(i, j);
    return r;
  }

  // Re-expands about y = y1. Exact when the jet is a polynomial of degree
  // <= Ky in y (which is how the PSA coefficient functions are stored).
  TaylorJet2 recentered_y(S y1) const {
    TaylorJet2 r({center_.first, y1}, kx_, ky_);
    const S shift = y1 - center_.second;
    for (int i = 0; i <= kx_; ++i) {
      for (int j = 0; j <= ky_; ++j) {
        // (v + shift)^j = sum_l C(j,l) v^l shift^(j-l)
        S pw(1);
        for (int l = j; l >= 0; --l) {
          r(i, l) += (*this)(i, j) * S(detail::binomial(j, l)) * pw;
          pw *= shift;
        }
      }
    }
    return r;
  }

  friend TaylorJet2 operator+(const TaylorJet2& a, const TaylorJet2& b) {
    require_same(a, b, "TaylorJet2 +");
    TaylorJet2 r(a.center_, std::min(a.kx_, b.kx_), std::min(a.ky_, b.ky_));
    for (int i = 0; i <= r.kx_; ++i)
      for (int j = 0; j <= r.ky_; ++j) r(i, j) = a(i, j) + b(i, j);
    return r;
  }
  friend TaylorJet2 operator-(const TaylorJet2& a, const TaylorJet2& b) { return a + (-b); }
  friend TaylorJet2 operator-(const TaylorJet2& a) {
    TaylorJet2 r = a;
    for (S& v : r.c_) v = -v;
    return r;
  }
  friend TaylorJet2 operator*(const TaylorJet2& a, const TaylorJet2& b) {
    require_same(a, b, "TaylorJet2 *");
    TaylorJet2 r(a.center_, std::min(a.kx_, b.kx_), std::min(a.ky_, b.ky_));
    for (int i = 0; i <= r.kx_; ++i)
      for (int j = 0; j <= r.ky_; ++j) {
        S s{};
        for (int k = 0; k <= i; ++k)
          for (int l = 0; l <= j; ++l) s += a(k, l) * b(i - k, j - l);
        r(i, j) = s;
      }
    return r;
  }
  friend TaylorJet2 operator/(const TaylorJet2& a, const TaylorJet2& b) { return jet_div(a, b); }

  friend TaylorJet2 operator+(const TaylorJet2& a, const S& s) {
    TaylorJet2 r = a;
    r(0, 0) += s;
    return r;
  }
  friend TaylorJet2 operator+(const S& s, const TaylorJet2& a) { return a + s; }
  friend TaylorJet2 operator-(const TaylorJet2& a, const S& s) { return a + (-s); }
  friend TaylorJet2 operator-(const S& s, const TaylorJet2& a) { return (-a) + s; }
  friend TaylorJet2 operator*(const TaylorJet2& a, const S& s) {
    TaylorJet2 r = a;
    for (S& v : r.c_) v *= s;
    return r;
  }
  friend TaylorJet2 operator*(const S& s, const TaylorJet2& a) { return a * s; }
  friend TaylorJet2 operator/(const TaylorJet2& a, const S& s) { return a * (S(1) / s); }
  friend TaylorJet2 operator/(const S& s, const TaylorJet2& a) {
    return jet_div(TaylorJet2::constant(s, a.center_, a.kx_, a.ky_), a);
  }

  template <RealArithmetic T>
  friend TaylorJet2 operator+(const TaylorJet2& a, T s) { return a + S(s); }
  template <RealArithmetic T>
  friend TaylorJet2 operator+(T s, const TaylorJet2& a) { return a + S(s); }
  template <RealArithmetic T>
  friend TaylorJet2 operator-(const TaylorJet2& a, T s) { return a - S(s); }
  template <RealArithmetic T>
  friend TaylorJet2 operator-(T s, const TaylorJet2& a) { return S(s) - a; }
  template <RealArithmetic T>
  friend TaylorJet2 operator*(const TaylorJet2& a, T s) { return a * S(s); }
  template <RealArithmetic T>
  friend TaylorJet2 operator*(T s, const TaylorJet2& a) { return a * S(s); }
  template <RealArithmetic T>
  friend TaylorJet2 operator/(const TaylorJet2& a, T s) { return a / S(s); }
  template <RealArithmetic T>
  friend TaylorJet2 operator/(T s, const TaylorJet2& a) { return S(s) / a; }

  friend TaylorJet2 jet_div(const TaylorJet2& a, const TaylorJet2& b) {
    require_same(a, b, "jet_div");
    const double scale = b.max_abs();
    if (detail::magnitude(b(0, 0)) <= 1e-14 * scale || scale == 0.0) {
      throw NumericalError("jet_div: divisor has zero constant term; use jet_cancel_div");
    }
    TaylorJet2 r(a.center_, std::min(a.kx_, b.kx_), std::min(a.ky_, b.ky_));
    for (int i = 0; i <= r.kx_; ++i)
      for (int j = 0; j <= r.ky_; ++j) {
        S s = a(i, j);
        for (int k = 0; k <= i; ++k)
          for (int l = 0; l <= j; ++l) {
            if (k == 0 && l == 0) continue;
            s -= r(i - k, j - l) * b(k, l);
          }
        r(i, j) = s / b(0, 0);
      }
    return r;
  }

  // Divides by (x - x0)^k or (y - y0)^k; the first k slices along the axis
  // must vanish relative to max|a|. The order along the axis drops by k.
  friend TaylorJet2 jet_cancel_div(const TaylorJet2& a, Axis axis, int k, double eps = kDefaultEpsCancel) {
    const int avail = axis == Axis::x ? a.kx_ : a.ky_;
    if (k < 0) throw std::invalid_argument("jet_cancel_div: negative power");
    if (k > avail) throw NumericalError("jet_cancel_div: order budget exhausted; increase order budget");
    const double scale = std::max(a.max_abs(), 1e-300);
    double residual = 0;
    for (int s = 0; s < k; ++s) {
      double slice = 0;
      if (axis == Axis::x) {
        for (int j = 0; j <= a.ky_; ++j) slice = std::max(slice, detail::magnitude(a(s, j)));
      } else {
        for (int i = 0; i <= a.kx_; ++i) slice = std::max(slice, detail::magnitude(a(i, s)));
      }
      residual = std::max(residual, slice / scale);
    }
    if (residual > eps) throw CancellationError("singularity not removable at requested order", residual);
    TaylorJet2 r(a.center_, axis == Axis::x ? a.kx_ - k : a.kx_, axis == Axis::y ? a.ky_ - k : a.ky_);
    for (int i = 0; i <= r.kx_; ++i)
      for (int j = 0; j <= r.ky_; ++j) r(i, j) = axis == Axis::x ? a(i + k, j) : a(i, j + k);
    return r;
  }

  // x -> f(x, g(x)) as a jet in x of order Kx. g must be centered at x0 with
  // g(x0) = y0. Exact through order min(Kx, Ky), and through Kx whenever f is
  // a polynomial of degree <= Ky in y.
  friend Jet1<S> jet_compose_y(const TaylorJet2& f, const Jet1<S>& g, double tol = 1e-10) {
    detail::require_same_center(f.center_.first, g.center(), "jet_compose_y");
    const double scale = std::max({1.0, detail::magnitude(f.center_.second), detail::magnitude(g.value())});
    if (detail::magnitude(g.value() - f.center_.second) > tol * scale) {
      throw NumericalError("jet_compose_y: g(x0) does not match the y-center of f");
    }
    const int K = std::min(f.kx_, g.order());
    const Jet1<S> delta = g.truncated(K) - g.value();
    Jet1<S> r = Jet1<S>::constant(S{}, g.center(), K);
    for (int j = f.ky_; j >= 0; --j) {
      Jet1<S> slice(g.center(), K);
      for (int i = 0; i <= K; ++i) slice[i] = f(i, j);
      r = r * delta + slice;
    }
    return r;
  }

  // dx! dy! c[dx][dy], i.e. the mixed partial derivative at the center.
  friend S jet_eval_deriv(const TaylorJet2& f, int dx, int dy) {
    if (dx < 0 || dy < 0 || dx > f.kx_ || dy > f.ky_) {
      throw std::out_of_range("jet_eval_deriv: derivative order exceeds jet order");
    }
    return S(detail::factorial(dx) * detail::factorial(dy)) * f(dx, dy);
  }

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i * (ky_ + 1) + j);
  }
  static void require_same(const TaylorJet2& a, const TaylorJet2& b, const char* op) {
    if (a.center_ != b.center_) throw std::invalid_argument(std::string(op) + ": jet centers differ");
  }

  Center center_;
  int kx_ = 0;
  int ky_ = 0;
  std::vector<S> c_;
};

}  // namespace tandemq
