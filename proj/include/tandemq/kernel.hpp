#pragma once

// Polynomial families of the functional equation
//   H(x,y) Pi0(x,y) = D(x) [A Pi0(x,0) + B Pi0(0,y) + C Pi0(0,0)],
// the roots of the kernel H in each variable, the branch points of the
// y-roots and the closed contour L traced by the in-disk y-root over [0, x2].

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>
#include <utility>
#include <vector>

#include "tandemq/error.hpp"
#include "tandemq/jets.hpp"
#include "tandemq/model.hpp"
#include "tandemq/polynomial.hpp"

namespace tandemq {

// Evaluators work for double, complex<double>, Jet1 and TaylorJet2 arguments
// (x and y must share a type).
struct KernelFunctions {
  ModelParams m;

  explicit KernelFunctions(const ModelParams& params) : m(params) {}

  template <class T>
  T D(const T& x) const {
    return m.lambda1 * (1.0 - x) + m.tau;
  }
  template <class T>
  T R(const T& x, const T& y) const {
    return x * y * (m.lambda0 * (1.0 - x) + m.gamma) + m.nu1 * m.p * y * (x - y) +
           m.nu2 * (1.0 - m.p) * x * (y - 1.0);
  }
  // A / (1 - p); defined directly so that it stays meaningful at p = 1.
  template <class T>
  T F(const T& x, const T& y) const {
    return m.nu2 * x * (y - 1.0) + m.nu1 * y * (y - x);
  }
  template <class T>
  T A(const T& x, const T& y) const {
    return (1.0 - m.p) * F(x, y);
  }
  template <class T>
  T B(const T& x, const T& y) const {
    return -m.p * F(x, y);
  }
  template <class T>
  T C(const T& x, const T& y) const {
    return m.nu1 * (1.0 - m.p) * y * (x - y) + m.nu2 * m.p * x * (y - 1.0);
  }
  template <class T>
  T H(const T& x, const T& y) const {
    return D(x) * R(x, y) - m.tau * m.gamma * x * y;
  }

  // Pieces of the equation rewritten around p = 0:
  //   G Pi0 - G10 Pi0(x,0) - G00 Pi0(0,0) = p G10 [Pi0 - Pi0(x,0) - Pi0(0,y) + Pi0(0,0)].
  template <class T>
  T G(const T& x, const T& y) const {
    return D(x) * (m.lambda0 * y * (1.0 - x) + m.nu2 * (y - 1.0)) + m.lambda1 * m.gamma * y * (1.0 - x);
  }
  // x * G10 and x * G00, which are polynomials.
  template <class T>
  T xG10(const T& x, const T& y) const {
    return D(x) * (m.nu2 * x * (y - 1.0) - m.nu1 * y * (x - y));
  }
  template <class T>
  T xG00(const T& x, const T& y) const {
    return D(x) * (m.nu1 * y * (x - y));
  }
  template <class T>
  T G10(const T& x, const T& y) const {
    return xG10(x, y) / x;
  }
  template <class T>
  T G00(const T& x, const T& y) const {
    return xG00(x, y) / x;
  }
  // G is linear in y: G = g1(x) (y - Ytilde(x)) with g1 the coefficient below.
  template <class T>
  T g1(const T& x) const {
    return D(x) * (m.lambda0 * (1.0 - x) + m.nu2) + m.lambda1 * m.gamma * (1.0 - x);
  }

  // Kernel of the p = 1 equation (multiplies y Pi0(x,y)).
  template <class T>
  T K1(const T& x, const T& y) const {
    return D(x) * (m.lambda0 * x * (1.0 - x) + m.nu1 * (x - y)) + m.lambda1 * m.gamma * x * (1.0 - x);
  }

  // Coefficients of H as a quadratic a y^2 + b y + c.
  template <class T>
  T quad_a(const T& x) const {
    return -m.p * m.nu1 * D(x);
  }
  template <class T>
  T quad_b(const T& x) const {
    return x * (D(x) * (m.lambda0 * (1.0 - x) + m.gamma + m.p * m.nu1 + (1.0 - m.p) * m.nu2) -
                m.tau * m.gamma);
  }
  template <class T>
  T quad_c(const T& x) const {
    return -(1.0 - m.p) * m.nu2 * D(x) * x;
  }

  // H(x,y) as a cubic polynomial in x for fixed y.
  ComplexPoly h_in_x(cplx y) const {
    const ComplexPoly d{cplx(m.lambda1 + m.tau), cplx(-m.lambda1)};
    const ComplexPoly r{-m.nu1 * m.p * y * y,
                        y * (m.lambda0 + m.gamma) + m.nu1 * m.p * y + m.nu2 * (1.0 - m.p) * (y - 1.0),
                        -m.lambda0 * y};
    return d * r - ComplexPoly{0.0, m.tau * m.gamma * y};
  }
  ComplexPoly k1_in_x(cplx y) const {
    const ComplexPoly d{cplx(m.lambda1 + m.tau), cplx(-m.lambda1)};
    const ComplexPoly inner{-m.nu1 * y, cplx(m.lambda0 + m.nu1), cplx(-m.lambda0)};
    const ComplexPoly extra{0.0, m.lambda1 * m.gamma, -m.lambda1 * m.gamma};
    return d * inner + extra;
  }
};

template <class T>
T y_tilde(const T& x, const ModelParams& m) {
  const KernelFunctions k(m);
  return m.nu2 * k.D(x) / k.g1(x);
}

// The x at which the coupling terms A and B vanish for a given y.
inline cplx s_of_y(cplx y, const ModelParams& m) { return m.nu1 * y * y / (m.nu1 * y + m.nu2 * (1.0 - y)); }

inline constexpr double kDiskTol = 1e-9;

namespace detail {

inline std::string roots_text(const std::vector<cplx>& r) {
  std::ostringstream os;
  os.precision(12);
  for (const cplx& v : r) os << " " << v;
  return os.str();
}

inline cplx unique_in_disk(const std::vector<cplx>& roots, const char* what) {
  int count = 0;
  cplx pick{};
  for (const cplx& r : roots) {
    if (std::abs(r) <= 1.0 + kDiskTol) {
      ++count;
      pick = r;
    }
  }
  if (count != 1) {
    std::ostringstream os;
    os << what << ": " << count << " roots in the closed unit disk (expected 1); roots:" << roots_text(roots);
    throw RootCountError(os.str());
  }
  return pick;
}

}  // namespace detail

// Unique root of D(x)(lambda0 x(1-x) + nu1(x-y)) + lambda1 gamma x(1-x) in the unit disk.
inline cplx u_of_y(cplx y, const ModelParams& m) {
  return detail::unique_in_disk(polynomial_roots(KernelFunctions(m).k1_in_x(y)), "u(y)");
}

// Both y-roots of H(x, .) ordered by modulus; the second is infinite when the
// quadratic degenerates (p = 0).
inline std::pair<cplx, cplx> y_roots(cplx x, const ModelParams& m) {
  const KernelFunctions k(m);
  const cplx a = k.quad_a(x), b = k.quad_b(x), c = k.quad_c(x);
  if (std::abs(a) <= 1e-14 * std::max(std::abs(b), std::abs(c))) {
    return {-c / b, cplx(INFINITY, 0.0)};
  }
  const cplx sq = std::sqrt(b * b - 4.0 * a * c);
  // cancellation-free pair
  const cplx q = -0.5 * (b + (std::real(std::conj(b) * sq) >= 0 ? sq : -sq));
  cplx r1 = q / a, r2 = (q == cplx{}) ? cplx{} : c / q;
  if (std::abs(r2) < std::abs(r1)) std::swap(r1, r2);
  return {r1, r2};
}

// The three x-roots of H(., y) ordered by modulus (X0, X1, X2).
inline std::vector<cplx> x_roots(cplx y, const ModelParams& m) {
  return polynomial_roots(KernelFunctions(m).h_in_x(y));
}

// In-disk roots; exactly one is expected on each unit circle.
inline cplx y_root_in_disk(cplx x, const ModelParams& m) {
  const auto [r1, r2] = y_roots(x, m);
  return detail::unique_in_disk({r1, r2}, "Y0(x)");
}
inline cplx x_root_in_disk(cplx y, const ModelParams& m) {
  return detail::unique_in_disk(x_roots(y, m), "X0(y)");
}

// ---------------------------------------------------------------------------
// Branch points
// ---------------------------------------------------------------------------

struct BranchData {
  double x1 = 0.0;
  double x2 = 0.0;
  double x2_companion = 0.0;  // same root from the companion-matrix solve
  RealPoly delta_poly;        // discriminant of H in y, as a polynomial in x
  RealPoly f_part, g_part;    // delta = x (f + g)
  RealPoly x_star_quadratic;  // zeros of the bracket of g other than 0, 1
  std::pair<cplx, cplx> x_star;
  double max_delta_on_slit = 0.0;  // sup of delta over interior samples of (x1, x2)
};

inline RealPoly discriminant_f(const ModelParams& m) {
  const RealPoly x{0.0, 1.0};
  const RealPoly d{m.lambda1 + m.tau, -m.lambda1};
  const RealPoly t{m.lambda0 + m.p * m.nu1 + (1 - m.p) * m.nu2, -m.lambda0};
  return d * d * (x * t * t - RealPoly{4.0 * m.p * (1 - m.p) * m.nu1 * m.nu2});
}

inline RealPoly discriminant_g(const ModelParams& m) {
  const RealPoly d{m.lambda1 + m.tau, -m.lambda1};
  const RealPoly t{m.lambda0 + m.p * m.nu1 + (1 - m.p) * m.nu2, -m.lambda0};
  const RealPoly w{m.lambda1 * m.gamma, -m.lambda1 * m.gamma};  // lambda1 gamma (1 - x)
  return RealPoly{0.0, 1.0} * w * (w + 2.0 * d * t);
}

inline RealPoly discriminant(const ModelParams& m) {
  return RealPoly{0.0, 1.0} * (discriminant_f(m) + discriminant_g(m));
}

// The factor of g besides x (1 - x), up to the constant lambda1 gamma.
inline RealPoly x_star_quadratic(const ModelParams& m) {
  const double s = m.p * m.nu1 + (1 - m.p) * m.nu2;
  return RealPoly{2 * (m.tau + m.lambda1) * (m.lambda0 + s) + m.lambda1 * m.gamma,
                  -(2 * m.lambda0 * (2 * m.lambda1 + m.tau) + m.lambda1 * (m.gamma + 2 * s)),
                  2 * m.lambda0 * m.lambda1};
}

inline BranchData branch_points(const ModelParams& m) {
  m.validate();
  if (!(m.p > 0.0 && m.p < 1.0)) throw ConfigError("branch points need 0 < p < 1");
  require_stable(m);
  BranchData b;
  b.f_part = discriminant_f(m);
  b.g_part = discriminant_g(m);
  b.delta_poly = discriminant(m);
  b.x_star_quadratic = x_star_quadratic(m);
  if (m.lambda0 > 0 && m.lambda1 > 0) {
    const auto r = polynomial_roots(b.x_star_quadratic);
    b.x_star = {r[0], r[1]};
  }

  const RealPoly& delta = b.delta_poly;
  // sign changes on a fine grid of (0, 1)
  const int grid = 4000;
  const double lo_edge = 1e-9, hi_edge = 1.0 - 1e-9;
  std::vector<std::pair<double, double>> brackets;
  double xa = lo_edge, fa = delta(xa);
  for (int i = 1; i <= grid; ++i) {
    const double xb = lo_edge + (hi_edge - lo_edge) * i / grid;
    const double fb = delta(xb);
    if ((fa < 0) != (fb < 0)) brackets.emplace_back(xa, xb);
    xa = xb;
    fa = fb;
  }
  auto describe = [&] {
    std::ostringstream os;
    os.precision(17);
    os << " discriminant coefficients:";
    for (double c : delta.coeffs()) os << " " << c;
    return os.str();
  };
  if (brackets.size() != 1 || !(delta(lo_edge) < 0)) {
    throw RootCountError("branch_points: expected exactly one discriminant zero in (0,1), found " +
                         std::to_string(brackets.size()) + ";" + describe());
  }
  auto [lo, hi] = brackets.front();
  const bool neg_lo = delta(lo) < 0;
  for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((delta(mid) < 0) == neg_lo) lo = mid;
    else hi = mid;
  }
  b.x2 = 0.5 * (lo + hi);

  double best = INFINITY;
  for (const cplx& r : polynomial_roots(delta)) {
    if (std::abs(r.imag()) < 1e-8 && std::abs(r.real() - b.x2) < best) {
      best = std::abs(r.real() - b.x2);
      b.x2_companion = r.real();
    }
  }

  b.max_delta_on_slit = -INFINITY;
  for (int i = 1; i < 400; ++i) {
    const double x = b.x2 * i / 400.0;
    b.max_delta_on_slit = std::max(b.max_delta_on_slit, delta(x));
  }
  if (!(b.max_delta_on_slit < 0)) {
    throw NumericalError("branch_points: discriminant not negative on (x1, x2);" + describe());
  }
  return b;
}

// ---------------------------------------------------------------------------
// Contour L
// ---------------------------------------------------------------------------

// Closed curve, star-shaped about the real point `center`. Polar data is
// relative to that center: y = center + rho(phi) e^{i phi}.
struct ContourL {
  int n = 0;
  double center = 0.0;
  std::vector<cplx> points;        // n + 1 samples along the slit traversal, closed
  std::vector<double> x_of_point;  // slit pre-image of each sample
  std::vector<double> phi;         // n uniform angles on [0, 2 pi)
  std::vector<double> rho;
  std::function<double(double)> radius;  // exact rho at any angle
  std::function<double(cplx)> preimage;  // x on the slit for a point of L
  double max_modulus = 0.0;

  cplx point_at(double angle) const { return center + std::polar(radius(angle), angle); }

  // True when y lies strictly inside the curve.
  bool contains(cplx y) const {
    const cplx d = y - center;
    if (std::abs(d) == 0.0) return true;
    return std::abs(d) < radius(std::arg(d));
  }

  // Contour given directly in polar form (used for tests of the mapping code).
  static ContourL from_polar(std::function<double(double)> r, double center, int n) {
    ContourL c;
    c.n = n;
    c.center = center;
    c.radius = std::move(r);
    c.preimage = [](cplx) { return 0.0; };
    for (int k = 0; k < n; ++k) {
      const double a = 2.0 * std::numbers::pi * k / n;
      c.phi.push_back(a);
      c.rho.push_back(c.radius(a));
      c.points.push_back(c.point_at(a));
      c.x_of_point.push_back(0.0);
      c.max_modulus = std::max(c.max_modulus, std::abs(c.points.back()));
    }
    c.points.push_back(c.points.front());
    c.x_of_point.push_back(0.0);
    return c;
  }

  void write_csv(std::ostream& os) const {
    os << "phi,re_y,im_y,rho,x_preimage\n";
    os.precision(17);
    for (int k = 0; k < n; ++k) {
      const cplx y = center + std::polar(rho[k], phi[k]);
      os << phi[k] << "," << y.real() << "," << y.imag() << "," << rho[k] << "," << preimage(y) << "\n";
    }
  }
};

// Pre-image on the slit from the modulus relation |y|^2 = ((1-p) nu2 / (p nu1)) x.
inline double slit_preimage(cplx y, const ModelParams& m) {
  return std::norm(y) * m.p * m.nu1 / ((1.0 - m.p) * m.nu2);
}

namespace detail {

// Smooth parametrization of L by t in [0, 2 pi]: x = x2 (1 - cos t)/2 runs
// over the slit and back; t in [0, pi] gives the lower half, so the curve is
// counterclockwise and starts at Y0(0) = 0.
struct SlitParametrization {
  ModelParams m;
  double x2;
  RealPoly reduced;  // discriminant / (x (x - x2)), positive on (0, x2)

  SlitParametrization(const ModelParams& params, const BranchData& b) : m(params), x2(b.x2) {
    reduced = (b.f_part + b.g_part).deflated(b.x2);
  }

  std::pair<cplx, double> operator()(double t) const {
    const KernelFunctions k(m);
    const double x = 0.5 * x2 * (1.0 - std::cos(t));
    const double a = k.quad_a(x), b = k.quad_b(x);
    const double re = -b / (2.0 * a);
    const double r = std::max(reduced(x), 0.0);
    const double im = -(0.5 * x2) * std::sin(t) * std::sqrt(r) / (2.0 * std::abs(a));
    return {cplx(re, im), x};
  }
};

}  // namespace detail

inline ContourL contour_L(const ModelParams& m, int n = 512) {
  const BranchData b = branch_points(m);
  auto par = std::make_shared<detail::SlitParametrization>(m, b);
  const double right = (*par)(std::numbers::pi).first.real();  // Y0(x2)
  const double center = 0.5 * right;

  // On the upper half (t in [pi, 2 pi]) the polar angle must rise from 0 to pi.
  const int checks = 4000;
  double prev_angle = 0.0;
  for (int i = 0; i <= checks; ++i) {
    const double t = std::numbers::pi * (1.0 + static_cast<double>(i) / checks);
    const double ang = std::arg((*par)(t).first - center);
    const double a = i == 0 ? 0.0 : (i == checks ? std::numbers::pi : ang);
    if (i > 0 && !(a > prev_angle)) {
      throw NumericalError("contour_L: polar angle not monotone; contour is not star-shaped about its center");
    }
    prev_angle = a;
  }

  ContourL c;
  c.n = n;
  c.center = center;
  c.radius = [par, center](double angle) {
    double a = std::remainder(angle, 2.0 * std::numbers::pi);  // (-pi, pi]
    const double target = std::abs(a);
    // on t in [pi, 2 pi] the angle rises from 0 to pi
    double lo = std::numbers::pi, hi = 2.0 * std::numbers::pi;
    for (int it = 0; it < 100 && hi - lo > 1e-16; ++it) {
      const double mid = 0.5 * (lo + hi);
      double ang = std::arg((*par)(mid).first - center);
      if (ang < 0) ang = mid < 1.5 * std::numbers::pi ? 0.0 : std::numbers::pi;
      if (ang < target) lo = mid;
      else hi = mid;
    }
    return std::abs((*par)(0.5 * (lo + hi)).first - center);
  };
  c.preimage = [m](cplx y) { return slit_preimage(y, m); };

  for (int k = 0; k <= n; ++k) {
    const auto [y, x] = (*par)(2.0 * std::numbers::pi * k / n);
    c.points.push_back(k == n ? c.points.front() : y);
    c.x_of_point.push_back(k == n ? c.x_of_point.front() : x);
    c.max_modulus = std::max(c.max_modulus, std::abs(y));
  }
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * std::numbers::pi * k / n;
    c.phi.push_back(a);
    c.rho.push_back(c.radius(a));
  }
  return c;
}

}  // namespace tandemq
