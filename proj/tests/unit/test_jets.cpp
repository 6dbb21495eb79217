#include <gtest/gtest.h>

#include <random>

#include "tandemq/jets.hpp"
#include "tandemq/kernel.hpp"

using namespace tandemq;
using J2 = TaylorJet2<cplx>;
using J1 = Jet1<cplx>;

namespace {

const J2::Center kCenter{cplx(0.3, 0.2), cplx(-0.1, 0.05)};

// u = x - x0, v = y - y0
J2 u(const J2::Center& c, int kx, int ky) { return J2::variable_x(c, kx, ky) - c.first; }
J2 v(const J2::Center& c, int kx, int ky) { return J2::variable_y(c, kx, ky) - c.second; }

J2 random_jet(std::mt19937_64& rng, const J2::Center& c, int kx, int ky) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  J2 j(c, kx, ky);
  for (int i = 0; i <= kx; ++i)
    for (int k = 0; k <= ky; ++k) j(i, k) = cplx(d(rng), d(rng));
  return j;
}

double max_diff(const J2& a, const J2& b) { return (a - b).max_abs(); }

}  // namespace

TEST(JetRing, DifferenceOfSquares) {
  const J2 a = (1.0 + u(kCenter, 3, 3)) * (1.0 - u(kCenter, 3, 3));
  const J2 expect = 1.0 - u(kCenter, 3, 3) * u(kCenter, 3, 3);
  EXPECT_LE(max_diff(a, expect), 1e-15);
  EXPECT_EQ(a(0, 0), cplx(1.0));
  EXPECT_EQ(a(2, 0), cplx(-1.0));
  EXPECT_EQ(a(1, 0), cplx(0.0));
}

TEST(JetRing, AdditiveIdentity) {
  std::mt19937_64 rng(1);
  const J2 a = random_jet(rng, kCenter, 3, 2);
  EXPECT_EQ(max_diff(a + J2(kCenter, 3, 2), a), 0.0);
}

TEST(JetRing, BinomialSquare) {
  const J2 s = u(kCenter, 2, 2) + v(kCenter, 2, 2);
  const J2 sq = s * s;
  EXPECT_EQ(sq(2, 0), cplx(1.0));
  EXPECT_EQ(sq(1, 1), cplx(2.0));
  EXPECT_EQ(sq(0, 2), cplx(1.0));
  EXPECT_EQ(sq(0, 0), cplx(0.0));
  EXPECT_EQ(sq(2, 2), cplx(0.0));
}

TEST(JetRing, TruncatesToSmallerOrder) {
  const J2 a = J2::constant(1.0, kCenter, 4, 1) * J2::constant(2.0, kCenter, 2, 3);
  EXPECT_EQ(a.order_x(), 2);
  EXPECT_EQ(a.order_y(), 1);
}

TEST(JetRing, CenterMismatchThrows) {
  const J2 a = J2::constant(1.0, kCenter, 2, 2);
  const J2 b = J2::constant(1.0, {cplx(0.0), cplx(0.0)}, 2, 2);
  EXPECT_THROW(a + b, std::invalid_argument);
  EXPECT_THROW(a * b, std::invalid_argument);
}

TEST(JetDivision, GeometricSeries) {
  const int K = 6;
  const J2 g = 1.0 / (1.0 - u(kCenter, K, K));
  for (int i = 0; i <= K; ++i) {
    EXPECT_NEAR(std::abs(g(i, 0) - 1.0), 0.0, 1e-15);
    for (int j = 1; j <= K; ++j) EXPECT_EQ(g(i, j), cplx(0.0));
  }
}

TEST(JetDivision, SelfQuotientIsOne) {
  std::mt19937_64 rng(2);
  J2 a = random_jet(rng, kCenter, 4, 4);
  a(0, 0) += 3.0;
  EXPECT_LE(max_diff(a / a, J2::constant(1.0, kCenter, 4, 4)), 1e-14);
}

TEST(JetDivision, RoundTrip) {
  const J2 num = 1.0 + u(kCenter, 2, 2) + v(kCenter, 2, 2);
  const J2 den = 1.0 + v(kCenter, 2, 2);
  EXPECT_LE(max_diff((num / den) * den, num), 1e-13);
}

TEST(JetDivision, ZeroConstantTermPointsToCancelDivision) {
  const J2 a = J2::constant(1.0, kCenter, 2, 2);
  try {
    (void)(a / u(kCenter, 2, 2));
    FAIL() << "expected an error";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("jet_cancel_div"), std::string::npos);
  }
}

TEST(JetCancelDivision, Examples) {
  const J2::Center c0{cplx(0.0), cplx(0.0)};
  const J2 uu = u(c0, 4, 4);
  const J2 r = jet_cancel_div(uu * uu, Axis::x, 1);
  EXPECT_EQ(r.order_x(), 3);
  EXPECT_EQ(max_diff(r, uu.truncated(3, 4)), 0.0);

  const J2 w = jet_cancel_div(uu * (1.0 + v(c0, 4, 4)), Axis::x, 1);
  EXPECT_EQ(max_diff(w, (1.0 + v(c0, 3, 4))), 0.0);

  EXPECT_THROW(jet_cancel_div(J2::constant(1.0, c0, 3, 3) + uu, Axis::x, 1), CancellationError);
}

TEST(JetCancelDivision, ResidualIsReported) {
  const J2 a = J2::constant(0.5, kCenter, 3, 3) + u(kCenter, 3, 3);
  try {
    (void)jet_cancel_div(a, Axis::y, 1);
    FAIL() << "expected an error";
  } catch (const CancellationError& e) {
    EXPECT_GT(e.residual(), 0.1);
    EXPECT_NE(std::string(e.what()).find("residual"), std::string::npos);
  }
}

TEST(JetCancelDivision, ExactForPolynomials) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> d(-9, 9);
  for (int k = 1; k <= 3; ++k) {
    J2 a(kCenter, 6, 5);
    for (int i = 0; i <= 6; ++i)
      for (int j = 0; j <= 5; ++j) a(i, j) = cplx(d(rng), d(rng));
    J2 p = a;
    for (int t = 0; t < k; ++t) p = p * v(kCenter, 6, 5);
    const J2 back = jet_cancel_div(p, Axis::y, k);
    EXPECT_EQ(max_diff(back, a.truncated(6, 5 - k)), 0.0);
  }
}

TEST(JetCompose, Projection) {
  const ModelParams m;
  const J1 x = J1::variable(cplx(0.5), 6);
  const J1 g = y_tilde(x, m);
  const J2 f = J2::variable_y({cplx(0.5), g.value()}, 6, 6);
  const J1 r = jet_compose_y(f, g);
  for (int i = 0; i <= 6; ++i) EXPECT_NEAR(std::abs(r[i] - g[i]), 0.0, 1e-15);
}

TEST(JetCompose, ProductWithIdentity) {
  const J2::Center c{cplx(1.0), cplx(1.0)};
  const J2 f = J2::variable_x(c, 4, 4) * J2::variable_y(c, 4, 4);
  const J1 r = jet_compose_y(f, J1::variable(cplx(1.0), 4));
  const J1 x = J1::variable(cplx(1.0), 4);
  const J1 sq = x * x;
  for (int i = 0; i <= 4; ++i) EXPECT_NEAR(std::abs(r[i] - sq[i]), 0.0, 1e-15);
}

TEST(JetCompose, ConstantGivesSlice) {
  std::mt19937_64 rng(4);
  const J2 f = random_jet(rng, kCenter, 3, 3);
  const J1 r = jet_compose_y(f, J1::constant(kCenter.second, kCenter.first, 3));
  for (int i = 0; i <= 3; ++i) EXPECT_EQ(r[i], f(i, 0));
}

TEST(JetCompose, MismatchedValueThrows) {
  const J2 f = J2::constant(1.0, kCenter, 2, 2);
  EXPECT_THROW(jet_compose_y(f, J1::constant(cplx(0.7), kCenter.first, 2)), NumericalError);
}

TEST(JetCompose, AgreesWithDirectEvaluation) {
  // f(x,y) = (1 + x y) / (2 + y^2),  g(x) = 0.3 + x / (3 - x)
  const cplx x0(0.2, 0.1);
  const int K = 24;
  const J1 xj = J1::variable(x0, K);
  const J1 g = 0.3 + xj / (3.0 - xj);
  const J2::Center c{x0, g.value()};
  const J2 X = J2::variable_x(c, K, K), Y = J2::variable_y(c, K, K);
  const J2 f = (1.0 + X * Y) / (2.0 + Y * Y);
  const J1 h = jet_compose_y(f, g);
  for (cplx dx : {cplx(0.05), cplx(-0.03, 0.04), cplx(0.0, -0.06)}) {
    const cplx x = x0 + dx;
    const cplx y = 0.3 + x / (3.0 - x);
    const cplx direct = (1.0 + x * y) / (2.0 + y * y);
    EXPECT_LE(std::abs(h.evaluate_offset(dx) - direct), 1e-10);
  }
}

TEST(JetDerivative, Examples) {
  const J2::Center c0{cplx(0.0), cplx(0.0)};
  const J2 f = 1.0 - u(c0, 3, 3) * u(c0, 3, 3);
  EXPECT_EQ(jet_eval_deriv(f, 2, 0), cplx(-2.0));
  EXPECT_EQ(jet_eval_deriv(f, 0, 0), cplx(1.0));
  EXPECT_THROW(jet_eval_deriv(f, 4, 0), std::out_of_range);
  const J2 g = u(c0, 3, 3) * u(c0, 3, 3) * v(c0, 3, 3) * v(c0, 3, 3) * v(c0, 3, 3);
  EXPECT_EQ(jet_eval_deriv(g, 2, 3), cplx(12.0));
}

TEST(JetProperties, RingAxioms) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const J2 a = random_jet(rng, kCenter, 4, 3), b = random_jet(rng, kCenter, 4, 3),
             c = random_jet(rng, kCenter, 4, 3);
    const double s = 1.0 + a.max_abs() * b.max_abs() * c.max_abs();
    EXPECT_LE(max_diff(a * b, b * a), 1e-13 * s);
    EXPECT_LE(max_diff((a * b) * c, a * (b * c)), 1e-13 * s * 10);
    EXPECT_LE(max_diff(a * (b + c), a * b + a * c), 1e-13 * s);
    EXPECT_LE(max_diff((a + b) + c, a + (b + c)), 1e-15 * s);
    EXPECT_EQ(max_diff(a - a, J2(kCenter, 4, 3)), 0.0);
  }
}

TEST(JetProperties, DivisionRoundTrip) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const J2 a = random_jet(rng, kCenter, 5, 5);
    J2 b = random_jet(rng, kCenter, 5, 5);
    b(0, 0) += 4.0;
    EXPECT_LE(max_diff((a / b) * b, a), 1e-12);
  }
}

TEST(JetProperties, RealFunctionAtRealCenterHasRealCoefficients) {
  const J2::Center c{cplx(0.4), cplx(0.7)};
  const J2 X = J2::variable_x(c, 6, 6), Y = J2::variable_y(c, 6, 6);
  const J2 f = (1.0 + X * Y * Y) / (3.0 - X - Y);
  double worst = 0;
  for (int i = 0; i <= 6; ++i)
    for (int j = 0; j <= 6; ++j) worst = std::max(worst, std::abs(f(i, j).imag()));
  EXPECT_LE(worst, 1e-12 * f.max_abs());
}

TEST(Jet1, CancelRatioRemovesCommonZero) {
  // (x^2 - 1) / (x - 1) = x + 1 at x = 1
  const J1 x = J1::variable(cplx(1.0), 4);
  const J1 r = cancel_ratio(x * x - 1.0, x - 1.0, 1);
  EXPECT_EQ(r.order(), 3);
  EXPECT_NEAR(std::abs(r[0] - 2.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(r[1] - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(r[2]), 0.0, 1e-15);
}
