#pragma once

// Boundary-value route for 0 < p < 1.
//
// The in-disk y-root of the kernel maps the slit [0, x2] onto the closed
// contour L. On L the unknown Pi0(0,y) satisfies Im Pi0(0,y) = c(y)/p, with
// c computed from known quantities. A conformal map gamma0 from the unit disk
// onto the interior of L (Theodorsen's method) turns this into a Dirichlet
// problem on the disk, solved by a Schwarz series. Pi0(x,0) and Pi0(0,y) on
// the unit circles then follow from the kernel relation, and everything else
// from the functional equation.

#include <unsupported/Eigen/FFT>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <vector>

#include "tandemq/error.hpp"
#include "tandemq/jets.hpp"
#include "tandemq/kernel.hpp"
#include "tandemq/model.hpp"

namespace tandemq {

namespace detail {

inline std::vector<cplx> fft_forward(const std::vector<cplx>& in) {
  Eigen::FFT<double> fft;
  std::vector<cplx> out;
  fft.fwd(out, in);
  return out;
}

inline std::vector<cplx> fft_inverse(const std::vector<cplx>& in) {
  Eigen::FFT<double> fft;
  std::vector<cplx> out;
  fft.inv(out, in);
  return out;
}

// Conjugate-function operator on a periodic grid function: multiplies the
// k-th Fourier mode by -i sign(k).
inline std::vector<double> conjugate_function(const std::vector<double>& f) {
  const std::size_t n = f.size();
  std::vector<cplx> c(f.begin(), f.end());
  std::vector<cplx> F = fft_forward(c);
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 0 || 2 * k == n) F[k] = 0.0;
    else if (2 * k < n) F[k] *= cplx(0.0, -1.0);
    else F[k] *= cplx(0.0, 1.0);
  }
  const std::vector<cplx> g = fft_inverse(F);
  std::vector<double> r(n);
  for (std::size_t k = 0; k < n; ++k) r[k] = g[k].real();
  return r;
}

// Trigonometric interpolant of grid samples (coefficients from fft / n).
inline double trig_interpolate(const std::vector<cplx>& coef, double angle) {
  const std::size_t n = coef.size();
  double s = coef[0].real();
  const cplx step = std::polar(1.0, angle);
  cplx w = step;
  for (std::size_t k = 1; 2 * k < n; ++k) {
    s += 2.0 * (coef[k] * w).real();  // real data: coef[n-k] = conj(coef[k])
    w *= step;
  }
  if (n % 2 == 0) s += coef[n / 2].real() * std::cos(0.5 * static_cast<double>(n) * angle);
  return s;
}

// Power series sum a_k z^k and its derivative.
inline cplx horner(const std::vector<cplx>& a, cplx z) {
  cplx r{};
  for (std::size_t k = a.size(); k-- > 0;) r = r * z + a[k];
  return r;
}
inline cplx horner_derivative(const std::vector<cplx>& a, cplx z) {
  cplx r{};
  for (std::size_t k = a.size(); k-- > 1;) r = r * z + static_cast<double>(k) * a[k];
  return r;
}

// Coefficients of the analytic function in the disk whose real part on the
// circle has the given samples: a0 + 2 sum_{k>=1} a_k z^k.
inline std::vector<cplx> schwarz_series(const std::vector<double>& real_part) {
  const std::size_t n = real_part.size();
  std::vector<cplx> c(real_part.begin(), real_part.end());
  std::vector<cplx> F = fft_forward(c);
  std::vector<cplx> s(n / 2);
  s[0] = F[0] / static_cast<double>(n);
  for (std::size_t k = 1; k < n / 2; ++k) s[k] = 2.0 * F[k] / static_cast<double>(n);
  return s;
}

// Taylor coefficients from samples on the shifted grid e^{2 pi i (j + 1/2)/n};
// keeps the first n/2 coefficients.
inline std::vector<cplx> taylor_from_circle(const std::vector<cplx>& samples) {
  const std::size_t n = samples.size();
  const std::vector<cplx> F = fft_forward(samples);
  std::vector<cplx> a(n / 2);
  for (std::size_t m = 0; m < n / 2; ++m) {
    a[m] = F[m] / static_cast<double>(n) * std::polar(1.0, -std::numbers::pi * static_cast<double>(m) / n);
  }
  return a;
}

inline cplx shifted_node(std::size_t j, std::size_t n) {
  return std::polar(1.0, 2.0 * std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(n));
}

// Taylor jet about 1 of the power series sum a_n x^n.
inline Jet1<cplx> series_jet_at_one(const std::vector<cplx>& a, int order) {
  Jet1<cplx> j(cplx(1.0), order);
  for (int k = 0; k <= order; ++k) {
    cplx s{};
    for (std::size_t n = static_cast<std::size_t>(k); n < a.size(); ++n) {
      s += binomial(static_cast<int>(n), k) * a[n];
    }
    j[k] = s;
  }
  return j;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Conformal map
// ---------------------------------------------------------------------------

struct ConformalMap {
  ContourL contour;
  int n_grid = 0;
  double center = 0.0;
  std::vector<double> theta;    // uniform nodes on the circle
  std::vector<double> psi;      // boundary correspondence psi(theta)
  std::vector<double> log_rho;  // log rho(psi(theta)), exact radius
  std::vector<cplx> series;     // log(gamma0(z) - center) - log z = sum series_k z^k
  int iterations = 0;
  double last_change = 0.0;

  // Maps the unit disk onto the interior of the contour, 0 -> center.
  cplx gamma0(cplx z) const { return center + z * std::exp(detail::horner(series, z)); }

  cplx gamma0_derivative(cplx z) const {
    return std::exp(detail::horner(series, z)) * (1.0 + z * detail::horner_derivative(series, z));
  }

  // Inverse map by damped Newton iteration.
  cplx gamma(cplx y) const {
    const cplx d = y - center;
    const double r = std::abs(d) == 0.0 ? 1.0 : contour.radius(std::arg(d));
    std::vector<cplx> seeds = {d / r, 0.5 * d / r, cplx{}};
    for (const cplx& seed : seeds) {
      cplx z = seed;
      double res = std::abs(gamma0(z) - y);
      for (int it = 0; it < 100 && res > 1e-15 * (1.0 + std::abs(y)); ++it) {
        const cplx step = (gamma0(z) - y) / gamma0_derivative(z);
        double lambda = 1.0;
        bool improved = false;
        for (int half = 0; half < 30; ++half) {
          const cplx cand = z - lambda * step;
          const double cres = std::abs(gamma0(cand) - y);
          if (std::abs(cand) <= 1.0 + 1e-9 && cres < res) {
            z = cand;
            res = cres;
            improved = true;
            break;
          }
          lambda *= 0.5;
        }
        if (!improved) break;
      }
      if (res <= 1e-10 * (1.0 + std::abs(y))) return z;
    }
    std::ostringstream os;
    os << "inverse conformal map: Newton failed to converge at y = " << y;
    throw NumericalError(os.str());
  }

  // max_k |gamma0(e^{i theta_k}) - (center + rho(psi_k) e^{i psi_k})|
  double boundary_residual() const {
    double worst = 0.0;
    for (int k = 0; k < n_grid; ++k) {
      const cplx z = std::polar(1.0, theta[static_cast<std::size_t>(k)]);
      const cplx expected = center + std::polar(std::exp(log_rho[static_cast<std::size_t>(k)]),
                                                psi[static_cast<std::size_t>(k)]);
      worst = std::max(worst, std::abs(gamma0(z) - expected));
    }
    return worst;
  }

  void write_csv(std::ostream& os) const {
    os << "phi,psi,re_y,im_y\n";
    os.precision(17);
    for (int k = 0; k < n_grid; ++k) {
      const auto i = static_cast<std::size_t>(k);
      const cplx y = center + std::polar(std::exp(log_rho[i]), psi[i]);
      os << theta[i] << "," << psi[i] << "," << y.real() << "," << y.imag() << "\n";
    }
  }
};

// Fixed-point iteration psi = theta + K[log rho(psi)], K the conjugate-function
// operator evaluated spectrally on the uniform grid.
inline ConformalMap theodorsen_solve(const ContourL& contour, int n_grid = 512, double tol = 1e-12,
                                     int max_iter = 200) {
  if (n_grid < 8 || (n_grid & (n_grid - 1)) != 0) throw ConfigError("n_grid must be a power of two >= 8");
  ConformalMap map;
  map.contour = contour;
  map.n_grid = n_grid;
  map.center = contour.center;
  const auto n = static_cast<std::size_t>(n_grid);
  map.theta.resize(n);
  std::vector<cplx> samples(n);
  for (std::size_t k = 0; k < n; ++k) {
    map.theta[k] = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    samples[k] = std::log(contour.radius(map.theta[k]));
  }
  std::vector<cplx> coef = detail::fft_forward(samples);
  for (cplx& c : coef) c /= static_cast<double>(n);

  map.psi = map.theta;
  double prev_change = INFINITY, change = INFINITY;
  std::vector<double> vals(n);
  for (int it = 1; it <= max_iter; ++it) {
    for (std::size_t k = 0; k < n; ++k) vals[k] = detail::trig_interpolate(coef, map.psi[k]);
    const std::vector<double> conj = detail::conjugate_function(vals);
    change = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double next = map.theta[k] + conj[k];
      change = std::max(change, std::abs(next - map.psi[k]));
      map.psi[k] = next;
    }
    map.iterations = it;
    if (change <= tol) break;
    if (it == max_iter) {
      std::ostringstream os;
      os << "theodorsen_solve: no convergence after " << max_iter << " iterations; last change " << change
         << ", contraction estimate " << change / prev_change;
      throw NumericalError(os.str());
    }
    prev_change = change;
  }
  map.last_change = change;
  map.log_rho.resize(n);
  for (std::size_t k = 0; k < n; ++k) map.log_rho[k] = std::log(contour.radius(map.psi[k]));
  map.series = detail::schwarz_series(map.log_rho);
  return map;
}

// ---------------------------------------------------------------------------
// Boundary condition and solution
// ---------------------------------------------------------------------------

// c(y) = Im[Pi0(0,0) C(x,y)/F(x,y)] at the slit pre-image x of a point of L.
inline double boundary_value_c(cplx y, const ModelParams& m) {
  if (std::abs(y.imag()) <= 1e-14 * (1.0 + std::abs(y))) return 0.0;  // real points: value is real
  const KernelFunctions k(m);
  const double x = slit_preimage(y, m);
  const cplx f = k.F(cplx(x), y);
  if (std::abs(f) == 0.0) throw NumericalError("boundary_value_c: F vanishes at a boundary point");
  return (empty_probability(m) * k.C(cplx(x), y) / f).imag();
}

struct PgfValue {
  cplx pi0, pi1;
};

struct BvpSolution {
  ModelParams params;
  ConformalMap map;
  double v00 = 0.0;
  double K = 0.0;                   // real additive constant
  std::vector<double> boundary_c;   // c at the map nodes
  std::vector<cplx> dirichlet;      // Pi0(0, gamma0(z)) = K + sum dirichlet_k z^k
  std::vector<cplx> x_axis_series;  // Taylor coefficients of Pi0(x,0)
  std::vector<cplx> y_axis_series;  // Taylor coefficients of Pi0(0,y)
  int circle_points = 0;
  int y_nodes_inside_contour = 0;
  double min_abs_f_continuation = INFINITY;  // pole scan on |y| = 1 outside L

  // Pi0(0, gamma0(z)) for |z| <= 1.
  cplx on_disk(cplx z) const { return detail::horner(dirichlet, z) + K; }
};

// Pi0(0,y) for y inside or on L, from the solution of the Dirichlet problem.
inline cplx pi0_on_0y_contour(cplx y, const BvpSolution& s) { return s.on_disk(s.map.gamma(y)); }

// Pi0(x,0) for |x| <= 1.
inline cplx pi0_on_x0(cplx x, const BvpSolution& s) {
  if (std::abs(x) > 1.0 + 1e-12) throw NumericalError("pi0_on_x0: |x| > 1");
  return detail::horner(s.x_axis_series, x);
}

// Pi0(0,y): inside L via the conformal map, elsewhere in the unit disk via the
// in-disk x-root of the kernel.
inline cplx pi0_on_0y(cplx y, const BvpSolution& s) {
  const ModelParams& m = s.params;
  if (s.map.contour.contains(y)) return pi0_on_0y_contour(y, s);
  if (std::abs(y) > 1.0 + 1e-12) throw NumericalError("pi0_on_0y: y outside the unit disk and outside L");
  const KernelFunctions k(m);
  const cplx x = x_root_in_disk(y, m);
  const cplx f = k.F(x, y);
  if (std::abs(f) < 1e-8) {
    // (x, y) = (1, 1) is removable; anything else is a pole of the continuation
    if (std::abs(y - 1.0) < 1e-6 && !s.y_axis_series.empty()) return detail::horner(s.y_axis_series, y);
    throw NumericalError("pi0_on_0y: continuation pole (F vanishes at the kernel root)");
  }
  return ((1.0 - m.p) * pi0_on_x0(x, s) + k.C(x, y) / f * s.v00) / m.p;
}

inline BvpSolution solve_bvp(const ModelParams& m, int n_grid = 512, int circle_points = 256) {
  m.validate();
  if (!(m.p > 0.0 && m.p < 1.0)) throw ConfigError("the boundary-value route needs 0 < p < 1");
  require_stable(m);
  BvpSolution s;
  s.params = m;
  s.v00 = empty_probability(m);
  s.map = theodorsen_solve(contour_L(m, n_grid), n_grid);

  const auto n = static_cast<std::size_t>(n_grid);
  s.boundary_c.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const cplx y = s.map.center + std::polar(std::exp(s.map.log_rho[k]), s.map.psi[k]);
    s.boundary_c[k] = boundary_value_c(y, m);
  }
  // Im T = c/p on the circle: T = (i/p) S[c] + K
  const std::vector<cplx> sc = detail::schwarz_series(s.boundary_c);
  s.dirichlet.resize(sc.size());
  for (std::size_t k = 0; k < sc.size(); ++k) s.dirichlet[k] = cplx(0.0, 1.0 / m.p) * sc[k];
  // z = -1 is the boundary point mapped to y = 0
  s.K = s.v00 - detail::horner(s.dirichlet, cplx(-1.0)).real();

  const KernelFunctions k(m);
  s.circle_points = circle_points;
  const auto nc = static_cast<std::size_t>(circle_points);

  // Pi0(x,0) on |x| = 1 through the kernel root Y0(x), which lies inside L.
  std::vector<cplx> xs(nc);
  for (std::size_t j = 0; j < nc; ++j) {
    const cplx x = detail::shifted_node(j, nc);
    const auto [r1, r2] = y_roots(x, m);
    const bool in1 = s.map.contour.contains(r1), in2 = s.map.contour.contains(r2);
    if (in1 == in2) {
      std::ostringstream os;
      os << "solve_bvp: expected exactly one kernel root inside L at x = " << x;
      throw RootCountError(os.str());
    }
    const cplx y = in1 ? r1 : r2;
    xs[j] = (m.p * pi0_on_0y_contour(y, s) - k.C(x, y) / k.F(x, y) * s.v00) / (1.0 - m.p);
  }
  s.x_axis_series = detail::taylor_from_circle(xs);

  // Pi0(0,y) on |y| = 1
  std::vector<cplx> ys(nc);
  for (std::size_t j = 0; j < nc; ++j) {
    const cplx y = detail::shifted_node(j, nc);
    if (s.map.contour.contains(y)) {
      ++s.y_nodes_inside_contour;
      ys[j] = pi0_on_0y_contour(y, s);
    } else {
      const cplx x = x_root_in_disk(y, m);
      s.min_abs_f_continuation = std::min(s.min_abs_f_continuation, std::abs(k.F(x, y)));
      ys[j] = pi0_on_0y(y, s);
    }
  }
  s.y_axis_series = detail::taylor_from_circle(ys);
  return s;
}

inline constexpr double kKernelExclusion = 1e-4;

// Pi0 and Pi1 from the functional equation; refuses points within 1e-4
// (relative) of the kernel zero set, where bvp_pgf_limit should be used.
inline PgfValue bvp_pgf(cplx x, cplx y, const BvpSolution& s) {
  const ModelParams& m = s.params;
  const KernelFunctions k(m);
  if (std::abs(x) > 1.0 + 1e-12 || std::abs(y) > 1.0 + 1e-12) {
    throw NumericalError("bvp_pgf: point outside the closed unit bidisk");
  }
  const cplx h = k.H(x, y);
  const double scale = std::abs(k.D(x)) * (m.nu1 + m.nu2 + m.lambda0 + m.gamma);
  if (std::abs(h) < kKernelExclusion * scale) {
    throw NumericalError("bvp_pgf: too close to a kernel zero; use bvp_pgf_limit");
  }
  const cplx px0 = detail::horner(s.x_axis_series, x);
  const cplx p0y = detail::horner(s.y_axis_series, y);
  const cplx pi0 = k.D(x) * (k.A(x, y) * px0 + k.B(x, y) * p0y + k.C(x, y) * s.v00) / h;
  return {pi0, m.gamma * pi0 / k.D(x)};
}

// Same function near kernel zeros, from a small circle on the complex line
// through (x, y) (mean-value property of the analytic continuation).
inline PgfValue bvp_pgf_limit(cplx x, cplx y, const BvpSolution& s, double r = 1e-2, int n = 32) {
  const ModelParams& m = s.params;
  const KernelFunctions k(m);
  cplx acc{};
  for (int j = 0; j < n; ++j) {
    const cplx z = std::polar(1.0, 2.0 * std::numbers::pi * (j + 0.5) / n);
    const cplx xx = x + r * z, yy = y + r * z;
    const cplx px0 = detail::horner(s.x_axis_series, xx);
    const cplx p0y = detail::horner(s.y_axis_series, yy);
    acc += k.D(xx) * (k.A(xx, yy) * px0 + k.B(xx, yy) * p0y + k.C(xx, yy) * s.v00) / k.H(xx, yy);
  }
  const cplx pi0 = acc / static_cast<double>(n);
  return {pi0, m.gamma * pi0 / k.D(x)};
}

struct BvpMetrics {
  double EQ1 = 0, EQ2 = 0;
};

// Means from Taylor jets at 1 of Pi(x,1) and Pi(1,y); the simple zero of the
// kernel at (1,1) is removed by cancel-division.
inline BvpMetrics bvp_metrics(const BvpSolution& s, double eps = 1e-6) {
  const ModelParams& m = s.params;
  const KernelFunctions k(m);
  using J = Jet1<cplx>;
  const int order = 3;
  const J one = J::constant(cplx(1.0), cplx(1.0), order);
  const J var = J::variable(cplx(1.0), order);

  const J px0 = detail::series_jet_at_one(s.x_axis_series, order);
  const J p0y = detail::series_jet_at_one(s.y_axis_series, order);
  const cplx at_x1 = px0.value();  // Pi0(1,0)
  const cplx at_y1 = p0y.value();  // Pi0(0,1)

  BvpMetrics r;
  {
    const J x = var, y = one;
    const J num = k.D(x) * (k.A(x, y) * px0 + k.B(x, y) * at_y1 + k.C(x, y) * s.v00);
    const J pi0 = cancel_ratio(num, k.H(x, y), 2, eps);
    const J total = pi0 * (1.0 + m.gamma / k.D(x));
    r.EQ1 = total.derivative(1).real();
  }
  {
    const J x = one, y = var;
    const J num = k.D(x) * (k.A(x, y) * at_x1 + k.B(x, y) * p0y + k.C(x, y) * s.v00);
    const J pi0 = cancel_ratio(num, k.H(x, y), 2, eps);
    r.EQ2 = (pi0.derivative(1) * (1.0 + m.gamma / m.tau)).real();
  }
  return r;
}

}  // namespace tandemq
