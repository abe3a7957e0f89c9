#include <gtest/gtest.h>

#include <random>

#include "adslab/projective_line.hpp"

using namespace adslab;

namespace {

// Affine cross-ratio, valid for finite points.
double affine_cross_ratio(double a, double b, double c, double d) {
  return (c - a) * (d - b) / ((b - a) * (d - c));
}

Mobius random_mobius(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    Mat2 m{n(rng), n(rng), n(rng), n(rng)};
    if (m.det() > 0.1) return Mobius(m);
    if (m.det() < -0.1) return Mobius(Mat2{-m.a, m.b, -m.c, m.d});
  }
}

}  // namespace

TEST(CrossRatio, SymmetricNormalForm) {
  const double cr = cross_ratio(RP1::from_affine(0), RP1::from_affine(1), RP1::from_affine(-1),
                                RP1::infinity());
  EXPECT_NEAR(cr, -1.0, 1e-15);
  EXPECT_TRUE(is_symmetric_quadruple(RP1::from_affine(0), RP1::from_affine(1),
                                     RP1::from_affine(-1), RP1::infinity()));
}

TEST(CrossRatio, DirectEvaluation) {
  const auto p = [](double x) { return RP1::from_affine(x); };
  EXPECT_NEAR(cross_ratio(p(0), p(1), p(2), p(3)), 4.0, 1e-12);
  EXPECT_FALSE(is_symmetric_quadruple(p(0), p(1), p(2), p(3)));
}

TEST(CrossRatio, MatchesAffineFormula) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    const double want = affine_cross_ratio(a, b, c, d);
    const double got = cross_ratio(RP1::from_affine(a), RP1::from_affine(b), RP1::from_affine(c),
                                   RP1::from_affine(d));
    EXPECT_NEAR(got, want, 1e-9 * std::max(1.0, std::abs(want)));
  }
}

TEST(CrossRatio, CoincidentPointsRejected) {
  const RP1 a = RP1::from_affine(0.5);
  EXPECT_THROW(cross_ratio(a, a, RP1::from_affine(1), RP1::from_affine(2)), Error);
}

TEST(CrossRatio, MobiusInvariance) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, kTwoPi);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const Mobius g = random_mobius(rng);
    std::array<RP1, 4> q;
    for (auto& p : q) p = RP1::from_angle(u(rng));
    bool ok = true;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) ok = ok && chordal_distance(q[a], q[b]) > 0.05;
    if (!ok) continue;
    const double before = cross_ratio(q[0], q[1], q[2], q[3]);
    const double after = cross_ratio(g(q[0]), g(q[1]), g(q[2]), g(q[3]));
    worst = std::max(worst, std::abs(after - before) / std::max(1.0, std::abs(before)));
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(Mobius, ThreePointsDetermineMap) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Mobius g = random_mobius(rng);
    const std::array<RP1, 3> x{RP1::from_affine(-1.0), RP1::from_affine(0.3), RP1::from_affine(2.0)};
    const std::array<RP1, 3> y{g(x[0]), g(x[1]), g(x[2])};
    const Mobius h = Mobius::from_three_points(x, y);
    EXPECT_LE((h.matrix() - g.matrix()).norm(), 1e-9);
  }
}

TEST(Mobius, LiftIsContinuousAndEquivariant) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const Mobius g = random_mobius(rng);
    double prev = g.lift(0.0);
    for (int k = 1; k <= 4000; ++k) {
      const double a = kTwoPi * k / 4000.0;
      const double v = g.lift(a);
      EXPECT_GT(v, prev);
      EXPECT_NEAR(std::remainder(v - g(RP1::from_angle(a)).alpha, kTwoPi), 0.0, 1e-9);
      prev = v;
    }
    EXPECT_NEAR(g.lift(kTwoPi) - g.lift(0.0), kTwoPi, 1e-9);
  }
}

TEST(Mobius, AffineActionMatchesMatrix) {
  const Mobius g(2.0, 1.0, 1.0, 1.0);
  const double x = 0.7;
  EXPECT_NEAR(g.apply_affine(x), (2 * x + 1) / (x + 1), 1e-12);
}

TEST(Mobius, FixedPointsOfHyperbolic) {
  const Mobius g(2.0, 0.0, 0.0, 0.5);  // x -> 4x
  EXPECT_TRUE(g.attracting_fixed_point().is_infinity());
  EXPECT_NEAR(g.repelling_fixed_point().affine(), 0.0, 1e-15);
  EXPECT_THROW(Mobius(1, 1, 0, 1).attracting_fixed_point(), Error);
}

TEST(RP1, AngleConvention) {
  EXPECT_TRUE(RP1::from_affine(std::numeric_limits<double>::infinity()).is_infinity());
  EXPECT_NEAR(RP1::from_affine(1.0).alpha, kPi / 2, 1e-15);
  EXPECT_NEAR(RP1::from_vector({1.0, 0.0}).alpha, kPi, 1e-15);
  EXPECT_NEAR(RP1::from_vector({-2.0, -2.0}).alpha, kPi / 2, 1e-15);
}
