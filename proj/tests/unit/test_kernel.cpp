#include <gtest/gtest.h>

#include <numbers>

#include "reference.hpp"
#include "tandemq/kernel.hpp"

using namespace tandemq;
using tandemq::testing::baseline_params;
using tandemq::testing::ParamSampler;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(KernelEval, VanishingAtOneOne) {
  ParamSampler s(21);
  for (int i = 0; i < 50; ++i) {
    const KernelFunctions k(s.next(-10.0));
    EXPECT_NEAR(std::abs(k.H(cplx(1.0), cplx(1.0))), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(k.G(cplx(1.0), cplx(1.0))), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(k.G10(cplx(1.0), cplx(1.0))), 0.0, 1e-12);
  }
}

TEST(KernelEval, ServiceTermsVanishOnCurveS) {
  const ModelParams m = baseline_params(0.5);
  const KernelFunctions k(m);
  const cplx y(0.5);
  const cplx x = s_of_y(y, m);
  EXPECT_NEAR(std::abs(k.A(x, y)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(k.B(x, y)), 0.0, 1e-14);
}

TEST(KernelEval, KernelFromRAndD) {
  ParamSampler s(22);
  for (int i = 0; i < 50; ++i) {
    const ModelParams m = s.next(-10.0);
    const KernelFunctions k(m);
    const cplx x = s.in_disk(), y = s.in_disk();
    EXPECT_NEAR(std::abs(k.H(x, y) - (k.D(x) * k.R(x, y) - m.tau * m.gamma * x * y)), 0.0, 1e-12);
  }
}

TEST(KernelEval, DegreesInEachVariable) {
  const ModelParams m = baseline_params(0.4);
  const KernelFunctions k(m);
  EXPECT_EQ(k.h_in_x(cplx(0.3, 0.2)).trimmed(1e-14).degree(), 3);
  // quadratic in y: the leading coefficient is quad_a
  const cplx x(0.6, -0.1);
  for (cplx y : {cplx(0.2), cplx(-0.4, 0.3)}) {
    const cplx q = k.quad_a(x) * y * y + k.quad_b(x) * y + k.quad_c(x);
    EXPECT_NEAR(std::abs(k.H(x, y) - q), 0.0, 1e-13);
  }
}

TEST(KernelProperties, CouplingTermsAreProportional) {
  ParamSampler s(23);
  for (int i = 0; i < 100; ++i) {
    const ModelParams m = s.next(-10.0);
    const KernelFunctions k(m);
    const cplx x = s.in_disk(2.0), y = s.in_disk(2.0);
    const cplx a = k.A(x, y), b = k.B(x, y);
    EXPECT_LE(std::abs(b + m.p / (1.0 - m.p) * a), 1e-12 * (1.0 + std::abs(a)));
  }
}

TEST(KernelProperties, FactorizationThroughU) {
  // H = x y (D u - gamma tau), u = lambda0(1-x) + nu1 p (1 - y/x) + nu2 (1-p)(1 - 1/y) + gamma
  ParamSampler s(24);
  for (int i = 0; i < 100; ++i) {
    const ModelParams m = s.next(-10.0);
    const KernelFunctions k(m);
    const cplx x = s.in_disk() + 0.05, y = s.in_disk() - 0.05;
    const cplx u = m.lambda0 * (1.0 - x) + m.nu1 * m.p * (1.0 - y / x) + m.nu2 * (1.0 - m.p) * (1.0 - 1.0 / y) +
                   m.gamma;
    const cplx rhs = x * y * (k.D(x) * u - m.gamma * m.tau);
    EXPECT_LE(std::abs(k.H(x, y) - rhs), 1e-11 * (1.0 + std::abs(rhs)));
  }
}

TEST(YTilde, ValuesAndBound) {
  ParamSampler s(25);
  for (int i = 0; i < 30; ++i) EXPECT_NEAR(std::abs(y_tilde(cplx(1.0), s.next(-10.0)) - 1.0), 0.0, 1e-14);
  const ModelParams m = baseline_params(0.5);
  EXPECT_NEAR(std::abs(y_tilde(cplx(0.0), m) - 22.5 / 28.0), 0.0, 1e-15);
  for (int j = 0; j < 64; ++j) {
    const cplx x = std::polar(1.0, 2.0 * kPi * (j + 0.5) / 64);
    EXPECT_LT(std::abs(y_tilde(x, m)), 1.0);
  }
  const KernelFunctions k(m);
  for (cplx x : {cplx(0.3), cplx(-0.5, 0.4), cplx(0.9, 0.1)}) {
    EXPECT_NEAR(std::abs(k.G(x, y_tilde(x, m))), 0.0, 1e-13);
  }
}

TEST(YTilde, VanishesAsJet) {
  const ModelParams m = baseline_params(0.5);
  const KernelFunctions k(m);
  for (double x0 : {0.0, 0.5, 1.0}) {
    const Jet1<cplx> x = Jet1<cplx>::variable(cplx(x0), 6);
    const Jet1<cplx> g = k.G(x, y_tilde(x, m));
    EXPECT_LE(g.max_abs(), 1e-11) << "center " << x0;
  }
}

TEST(CurveMaps, SAndU) {
  const ModelParams m = baseline_params(0.5);
  ParamSampler s(26);
  for (int i = 0; i < 20; ++i) EXPECT_NEAR(std::abs(s_of_y(cplx(1.0), s.next(-10.0)) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s_of_y(cplx(0.5), m) - 1.0 / 4.5), 0.0, 1e-15);
  // nu1 y^2 / (nu1 + nu2 (1 - y)) does not annihilate A
  const KernelFunctions kk(m);
  EXPECT_GT(std::abs(kk.A(cplx(1.0 / 6.5), cplx(0.5))), 0.1);
  for (cplx y : {cplx(0.3), cplx(-0.2, 0.5), cplx(0.9, 0.05)}) {
    EXPECT_NEAR(std::abs(kk.A(s_of_y(y, m), y)), 0.0, 1e-14);
  }

  // At y = 1 the cubic has the root x = 1; the quotient quadratic has no
  // root in the closed disk, so u(1) = 1.
  const KernelFunctions k(m);
  const ComplexPoly cubic = k.k1_in_x(cplx(1.0));
  EXPECT_NEAR(std::abs(cubic(cplx(1.0))), 0.0, 1e-13);
  const ComplexPoly q = cubic.deflated(cplx(1.0));
  const cplx disc = std::sqrt(q[1] * q[1] - 4.0 * q[2] * q[0]);
  EXPECT_GT(std::abs((-q[1] + disc) / (2.0 * q[2])), 1.0);
  EXPECT_GT(std::abs((-q[1] - disc) / (2.0 * q[2])), 1.0);
  EXPECT_NEAR(std::abs(u_of_y(cplx(1.0), m) - 1.0), 0.0, 1e-12);
  EXPECT_EQ(winding_count(cubic, 1.01), 1);
  for (cplx y : {cplx(0.5), cplx(-0.3, 0.6)}) {
    const cplx u = u_of_y(y, m);
    EXPECT_LT(std::abs(u), 1.0);
    EXPECT_NEAR(std::abs(k.K1(u, y)), 0.0, 1e-12);
    EXPECT_EQ(winding_count(k.k1_in_x(y), 1.0), 1);
  }
}

TEST(KernelRoots, UniqueXRootOnUnitCircle) {
  const ModelParams m = baseline_params(0.5);
  const KernelFunctions k(m);
  for (int j = 0; j < 32; ++j) {
    const cplx y = std::polar(1.0, 2.0 * kPi * (j + 0.5) / 32);
    const std::vector<cplx> r = x_roots(y, m);
    ASSERT_EQ(r.size(), 3u);
    int inside = 0;
    for (const cplx& x : r) {
      inside += std::abs(x) <= 1.0 + kDiskTol;
      EXPECT_LE(std::abs(k.H(x, y)), 1e-10);
    }
    EXPECT_EQ(inside, 1);
    EXPECT_EQ(winding_count(k.h_in_x(y), 1.0), 1);
    EXPECT_LE(std::abs(r[1]), std::abs(r[2]));
  }
}

TEST(KernelRoots, UniqueYRootOnUnitCircle) {
  ParamSampler s(27);
  for (int t = 0; t < 10; ++t) {
    const ModelParams m = s.next(0.1);
    for (int j = 0; j < 32; ++j) {
      const cplx x = std::polar(1.0, 2.0 * kPi * (j + 0.5) / 32);
      const auto [y0, y1] = y_roots(x, m);
      EXPECT_LE(std::abs(y0), 1.0 + kDiskTol);
      EXPECT_GT(std::abs(y1), 1.0 + kDiskTol);
    }
  }
}

TEST(KernelRoots, OneIsARootAtXEqualsOne) {
  const auto [a, b] = y_roots(cplx(1.0), baseline_params(0.5));
  EXPECT_LE(std::min(std::abs(a - 1.0), std::abs(b - 1.0)), 1e-13);
}

TEST(BranchPoints, DiscriminantMatchesQuadraticCoefficients) {
  ParamSampler s(28);
  for (int t = 0; t < 30; ++t) {
    const ModelParams m = s.next(0.05);
    const KernelFunctions k(m);
    const RealPoly d = discriminant(m);
    for (double x : {0.0, 0.13, 0.5, 0.87, 1.0, 1.7}) {
      const double a = k.quad_a(x), b = k.quad_b(x), c = k.quad_c(x);
      const double direct = b * b - 4.0 * a * c;
      EXPECT_LE(std::abs(d(x) - direct), 1e-10 * (1.0 + std::abs(direct)));
    }
  }
}

TEST(BranchPoints, ValuesAtZeroAndOne) {
  ParamSampler s(29);
  for (int t = 0; t < 20; ++t) {
    const ModelParams m = s.next(0.05);
    EXPECT_EQ(discriminant(m)(0.0), 0.0);
    const double f1 = discriminant_f(m)(1.0);
    const double w = m.p * m.nu1 - (1.0 - m.p) * m.nu2;
    EXPECT_NEAR(f1, m.tau * m.tau * w * w, 1e-10 * (1.0 + f1));
    EXPECT_NEAR(discriminant_g(m)(1.0), 0.0, 1e-12);
  }
}

TEST(BranchPoints, FigureParametersTwoRootFinders) {
  const ModelParams m = baseline_params(0.5);
  const BranchData b = branch_points(m);
  const KernelFunctions k(m);
  const double bis = tandemq::testing::bisect(
      [&](double x) { return k.quad_b(x) * k.quad_b(x) - 4.0 * k.quad_a(x) * k.quad_c(x); }, 1e-9, 1.0 - 1e-9);
  EXPECT_EQ(b.x1, 0.0);
  EXPECT_NEAR(b.x2, bis, 1e-10);
  EXPECT_NEAR(b.x2, b.x2_companion, 1e-10);
  // frozen from the two solves above
  EXPECT_NEAR(b.x2, 0.973030736869, 1e-11);
  EXPECT_LT(b.max_delta_on_slit, 0.0);
  for (int i = 1; i < 200; ++i) EXPECT_LT(b.delta_poly(b.x2 * i / 200.0), 0.0);
}

TEST(BranchPoints, DoubleRootAtBranchPoint) {
  const ModelParams m = baseline_params(0.5);
  const BranchData b = branch_points(m);
  const KernelFunctions k(m);
  const double bb = k.quad_b(b.x2);
  const double disc = bb * bb - 4.0 * k.quad_a(b.x2) * k.quad_c(b.x2);
  EXPECT_LE(std::abs(disc) / (bb * bb), 1e-7);
  const auto [y0, y1] = y_roots(cplx(b.x2), m);
  EXPECT_LE(std::abs(y0 - y1), 1e-5);
  EXPECT_LE(std::abs(y0.imag()), 1e-5);
}

TEST(BranchPoints, AuxiliaryQuadraticRoots) {
  ParamSampler s(30);
  for (int t = 0; t < 100; ++t) {
    const ModelParams m = s.next(0.05);
    if (m.lambda1 == 0.0) continue;
    const BranchData b = branch_points(m);
    const cplx prod = b.x_star.first * b.x_star.second, sum = b.x_star.first + b.x_star.second;
    EXPECT_GT(prod.real(), 1.0);
    EXPECT_GT(sum.real(), 2.0);
  }
}

TEST(BranchPoints, RejectsEndpoints) {
  EXPECT_THROW(branch_points(baseline_params(0.0)), ConfigError);
  EXPECT_THROW(branch_points(baseline_params(1.0)), ConfigError);
}

TEST(ContourL, ModulusRelation) {
  const ModelParams m = baseline_params(0.5);
  const ContourL c = contour_L(m, 512);
  const double ratio = (1.0 - m.p) * m.nu2 / (m.p * m.nu1);
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    EXPECT_LE(std::abs(std::norm(c.points[i]) - ratio * c.x_of_point[i]), 1e-10);
  }
}

TEST(ContourL, ClosedAndConjugateSymmetric) {
  const ContourL c = contour_L(baseline_params(0.5), 256);
  ASSERT_EQ(c.points.size(), 257u);
  EXPECT_EQ(c.points.front(), c.points.back());
  for (int k = 0; k <= 256; ++k) EXPECT_LE(std::abs(c.points[k] - std::conj(c.points[256 - k])), 1e-13);
  for (int k = 1; k < 256; ++k) EXPECT_NEAR(c.rho[k], c.rho[256 - k], 1e-12);
}

TEST(ContourL, PolarFormReproducesPoints) {
  const ModelParams m = baseline_params(0.5);
  const ContourL c = contour_L(m, 128);
  const double ratio = (1.0 - m.p) * m.nu2 / (m.p * m.nu1);
  for (int k = 0; k < c.n; ++k) {
    const cplx y = c.point_at(c.phi[k]);
    // a point of L: it is a root of H at its slit pre-image
    const double x = c.preimage(y);
    EXPECT_NEAR(std::norm(y), ratio * x, 1e-10);
    EXPECT_LE(std::abs(KernelFunctions(m).H(cplx(x), y)), 1e-10);
  }
}

TEST(ContourL, MaximumModulusAtBranchPoint) {
  const ModelParams m = baseline_params(0.5);
  const BranchData b = branch_points(m);
  const ContourL c = contour_L(m, 512);
  const double expected = std::sqrt((1.0 - m.p) * m.nu2 / (m.p * m.nu1) * b.x2);
  EXPECT_NEAR(c.max_modulus, expected, 1e-12);
  double worst = 0;
  for (const cplx& y : c.points) worst = std::max(worst, std::abs(y));
  EXPECT_LE(worst, expected + 1e-12);
}

TEST(ContourL, CsvColumns) {
  const ContourL c = contour_L(baseline_params(0.5), 16);
  std::ostringstream os;
  c.write_csv(os);
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "phi,re_y,im_y,rho,x_preimage");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 17);
}
