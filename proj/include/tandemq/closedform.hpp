#pragma once

// Generating functions at the two ends of the coupling range.
//   p = 0: station 2 has preemptive priority.
//   p = 1: a single server works on station 1 whenever it is non-empty.
// Both are built from the functional equation: pick the kernel root that
// kills the left-hand side, solve for the boundary function, substitute back.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>

#include "tandemq/error.hpp"
#include "tandemq/kernel.hpp"
#include "tandemq/model.hpp"

namespace tandemq {

enum class Endpoint { p0, p1 };

struct PgfPair {
  cplx pi0, pi1;
};

namespace detail {

// Value of an analytic function at (x0, y0) from a circle on the complex line
// (x0 + r z, y0 + r z), |z| = 1. Used at removable 0/0 points of the formulas.
inline cplx circle_mean(const std::function<cplx(cplx, cplx)>& f, cplx x0, cplx y0, double r = 1e-2,
                        int n = 32) {
  cplx s{};
  for (int k = 0; k < n; ++k) {
    const cplx z = std::polar(1.0, 2.0 * std::numbers::pi * (k + 0.5) / n);
    s += f(x0 + r * z, y0 + r * z);
  }
  return s / static_cast<double>(n);
}

inline bool near_zero(cplx v, double scale, double rel = 1e-6) { return std::abs(v) <= rel * scale; }

// Root of K1(., y) continuing the in-disk root: the smallest in modulus.
inline cplx u_continued(cplx y, const ModelParams& m) {
  return polynomial_roots(KernelFunctions(m).k1_in_x(y)).front();
}

// Richardson-extrapolated central difference of f at t0 (three levels).
inline double richardson_derivative(const std::function<double(double)>& f, double t0, double h) {
  std::array<double, 3> d{};
  for (int i = 0; i < 3; ++i) {
    const double hi = h / std::pow(2.0, i);
    d[static_cast<std::size_t>(i)] = (f(t0 + hi) - f(t0 - hi)) / (2.0 * hi);
  }
  // eliminate h^2 then h^4
  const double e1 = (4.0 * d[1] - d[0]) / 3.0;
  const double e2 = (4.0 * d[2] - d[1]) / 3.0;
  return (16.0 * e2 - e1) / 15.0;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// p = 0
// ---------------------------------------------------------------------------

// y-root of G(x, .): the priority system's counterpart of the kernel root.
inline cplx xi_of_x(cplx x, const ModelParams& m) { return y_tilde(x, m); }

// Pi0(x,0) / Pi0(0,0) for p = 0.
inline cplx p0_boundary_ratio(cplx x, const ModelParams& m) {
  const KernelFunctions k(m);
  const cplx xi = xi_of_x(x, m);
  return -k.xG00(x, xi) / k.xG10(x, xi);
}

inline PgfPair p0_solution(cplx x, cplx y, const ModelParams& in) {
  ModelParams m = in;
  m.p = 0.0;
  const double v00 = empty_probability(m);
  const KernelFunctions k(m);
  auto direct = [&](cplx xx, cplx yy) {
    const cplx xi = xi_of_x(xx, m);
    const cplx h = -k.xG00(xx, xi) / k.xG10(xx, xi);
    return v00 * (k.xG10(xx, yy) * h + k.xG00(xx, yy)) / (xx * k.G(xx, yy));
  };
  const double scale = 1.0 + std::abs(k.g1(x));
  const cplx xi = xi_of_x(x, m);
  cplx pi0;
  if (detail::near_zero(x, 1.0) || detail::near_zero(k.G(x, y), scale) ||
      detail::near_zero(k.xG10(x, xi), scale)) {
    pi0 = detail::circle_mean(direct, x, y);
  } else {
    pi0 = direct(x, y);
  }
  return {pi0, m.gamma * pi0 / k.D(x)};
}

// The p = 0 formula exactly as printed alongside its derivation, for
// comparison only.
inline cplx p0_printed_formula(cplx x, cplx y, const ModelParams& in) {
  ModelParams m = in;
  m.p = 0.0;
  const KernelFunctions k(m);
  const cplx xi = xi_of_x(x, m);
  const cplx num = xi * (y - 1.0) * (xi - x) + y * (x - y) * m.nu2 * (xi - 1.0);
  const cplx den = m.nu2 * x * (xi - 1.0) + m.nu1 * xi * (x - xi);
  return empty_probability(m) * k.D(x) * m.nu1 * m.nu2 / k.G(x, y) * num / den;
}

// The same function written out after eliminating Pi0(x,0) by hand.
inline cplx p0_explicit_formula(cplx x, cplx y, const ModelParams& in) {
  ModelParams m = in;
  m.p = 0.0;
  const KernelFunctions k(m);
  const cplx xi = xi_of_x(x, m);
  const cplx num = xi * (y - 1.0) * (xi - x) + y * (x - y) * (xi - 1.0);
  const cplx den = m.nu2 * x * (xi - 1.0) - m.nu1 * xi * (x - xi);
  return empty_probability(m) * k.D(x) * m.nu1 * m.nu2 / k.G(x, y) * num / den;
}

// ---------------------------------------------------------------------------
// p = 1
// ---------------------------------------------------------------------------

// Pi0(0,y) for p = 1, from the requirement that the right-hand side vanishes
// at x = u(y).
inline cplx p1_boundary(cplx y, const ModelParams& in) {
  ModelParams m = in;
  m.p = 1.0;
  const double v00 = empty_probability(m);
  auto direct = [&](cplx, cplx yy) {
    const cplx u = detail::u_continued(yy, m);
    const cplx a = m.nu2 * u * (1.0 - yy);
    return v00 * a / (a + m.nu1 * yy * (u - yy));
  };
  if (std::abs(y) < 1e-6 || std::abs(1.0 - y) < 1e-6) return detail::circle_mean(direct, 0.0, y);
  return direct(0.0, y);
}

inline PgfPair p1_solution(cplx x, cplx y, const ModelParams& in) {
  ModelParams m = in;
  m.p = 1.0;
  const KernelFunctions k(m);
  auto direct = [&](cplx xx, cplx yy) {
    const cplx u = detail::u_continued(yy, m);
    const double v00 = empty_probability(m);
    const cplx a = m.nu2 * u * (1.0 - yy);
    const cplx edge = v00 * a / (a + m.nu1 * yy * (u - yy));
    return k.D(xx) * m.nu1 * yy * (xx - u) * edge / (u * k.K1(xx, yy));
  };
  const cplx u = std::abs(y) < 1e-6 ? cplx{} : detail::u_continued(y, m);
  const double scale = 1.0 + std::abs(k.D(x)) * (m.nu1 + m.lambda0);
  cplx pi0;
  if (std::abs(y) < 1e-6 || std::abs(1.0 - y) < 1e-6 || detail::near_zero(k.K1(x, y), scale) ||
      std::abs(u) < 1e-6) {
    pi0 = detail::circle_mean(direct, x, y);
  } else {
    pi0 = direct(x, y);
  }
  return {pi0, m.gamma * pi0 / k.D(x)};
}

// Pi0(0,y) as obtained from the printed relation for Pi0(0,0) (comparison only).
inline cplx p1_printed_boundary(cplx y, const ModelParams& in) {
  ModelParams m = in;
  m.p = 1.0;
  const cplx u = detail::u_continued(y, m);
  return empty_probability(m) / (1.0 - m.nu1 * y * (u - y) / (m.nu2 * u * (1.0 - y)));
}

// ---------------------------------------------------------------------------
// Means
// ---------------------------------------------------------------------------

struct EndpointSolution {
  Endpoint which = Endpoint::p0;
  ModelParams params;
  double EQ1 = 0, EQ2 = 0;

  PgfPair operator()(cplx x, cplx y) const {
    return which == Endpoint::p0 ? p0_solution(x, y, params) : p1_solution(x, y, params);
  }
};

// Derivatives of Pi0 + Pi1 at (1,1) by Richardson-extrapolated central
// differences along each axis.
inline EndpointSolution closedform_metrics(Endpoint which, const ModelParams& in, double h = 0.01) {
  in.validate();
  EndpointSolution s;
  s.which = which;
  s.params = in;
  s.params.p = which == Endpoint::p0 ? 0.0 : 1.0;
  require_stable(s.params);
  auto total = [&](cplx x, cplx y) {
    const PgfPair v = s(x, y);
    return (v.pi0 + v.pi1).real();
  };
  s.EQ1 = detail::richardson_derivative([&](double t) { return total(t, 1.0); }, 1.0, h);
  s.EQ2 = detail::richardson_derivative([&](double t) { return total(1.0, t); }, 1.0, h);
  if (!std::isfinite(s.EQ1) || !std::isfinite(s.EQ2)) {
    throw NumericalError("closedform_metrics: differentiation produced a non-finite value");
  }
  return s;
}

}  // namespace tandemq
