#include <gtest/gtest.h>

#include <random>

#include "adslab/quasisymmetry.hpp"

using namespace adslab;

namespace {

CircleMap piecewise(double s) {
  return CircleMap::from_affine([s](double x) { return x >= 0 ? x : s * x; });
}

// Direct evaluation of the three-point ratio on the affine line.
double ratio(const std::function<double(double)>& phi, double x, double t) {
  const double r = (phi(x + t) - phi(x)) / (phi(x) - phi(x - t));
  return std::max(r, 1 / r);
}

}  // namespace

TEST(QsConstant, IdentityAndAffine) {
  EXPECT_EQ(qs_constant(CircleMap()).k, 1.0);
  EXPECT_NEAR(qs_constant(CircleMap::from_affine([](double x) { return 2 * x; })).k, 1.0, 1e-9);
  EXPECT_EQ(qs_constant(CircleMap::from_mobius(Mobius(2, 1, 1, 1))).k, 1.0);
}

TEST(QsConstant, PiecewiseHalfSlope) {
  const QsReport r = qs_constant(CircleMap::from_affine([](double x) { return x >= 0 ? x : 0.5 * x; }));
  EXPECT_NEAR(r.k, 2.0, 1e-6);
  // The witness reproduces the constant through direct evaluation.
  EXPECT_NEAR(ratio([](double x) { return x >= 0 ? x : 0.5 * x; }, r.x, r.t), r.k, 1e-9);
}

TEST(QsConstant, GridRefinementIsMonotone) {
  const CircleMap f = CircleMap::from_lift([](double a) { return a + 0.6 * std::sin(a) * std::sin(a / 2); });
  const double k0 = qs_constant(f, {0}).k, k1 = qs_constant(f, {1}).k;
  EXPECT_GE(k1, k0);
  EXPECT_GT(k0, 1.0);
}

TEST(QsConstant, NotMonotoneRejected) {
  // A lift whose restriction to the affine line is not increasing cannot be
  // built as a CircleMap at all.
  std::vector<double> t, v;
  for (int i = 0; i < 32; ++i) {
    t.push_back(kTwoPi * i / 32);
    v.push_back(kTwoPi * i / 32 + (i == 7 ? -0.5 : 0.0));
  }
  EXPECT_THROW(CircleMap::from_samples(t, v), Error);
}

TEST(QsConstant, IncreasingAlongFamily) {
  double prev = 1.0;
  for (double s : {2.0, 4.0, 8.0, 16.0}) {
    const double k = qs_constant(piecewise(s)).k;
    EXPECT_NEAR(k, s, 1e-6 * s);
    EXPECT_GT(k, prev);
    prev = k;
  }
}

TEST(CrossRatioNorm, MobiusAndIdentity) {
  EXPECT_EQ(cross_ratio_norm(CircleMap()).M, 1.0);
  // Through a sampled Moebius lift (no tag), the norm is 1 up to rounding.
  const Mobius g(1.5, 0.2, 0.7, 0.76);
  const CircleMap f = CircleMap::from_lift([g](double a) { return g.lift(a); });
  EXPECT_NEAR(cross_ratio_norm(f).M, 1.0, 1e-10);
}

TEST(CrossRatioNorm, PiecewiseFamily) {
  double prev = 1.0;
  for (double s : {2.0, 4.0, 8.0, 16.0}) {
    const CircleMap f = piecewise(s);
    const CrossRatioNormReport r = cross_ratio_norm(f, 64);
    EXPECT_GT(r.M, prev);
    prev = r.M;
    // The symmetric quadruple (0, lambda, -lambda, inf) alone gives |cr_f| = s.
    EXPECT_GE(r.M, s - 1e-9);
    EXPECT_NEAR(cross_ratio_norm(f, 128).M, r.M, 1e-3);
    const auto& w = r.witness;
    const double cr = cross_ratio(RP1::from_angle(w[0]), RP1::from_angle(w[1]), RP1::from_angle(w[2]),
                                  RP1::from_angle(w[3]));
    EXPECT_NEAR(cr, -1.0, 1e-9);
  }
}

TEST(Normalize, FixesThreePoints) {
  const CircleMap f = CircleMap::from_lift([](double a) { return a + 0.3 + 0.2 * std::sin(a); });
  const CircleMap n = normalize(f);
  EXPECT_NEAR(n.apply_affine(0.0), 0.0, 1e-12);
  EXPECT_NEAR(n.apply_affine(1.0), 1.0, 1e-12);
  EXPECT_TRUE(n(RP1::infinity()).is_infinity() || std::abs(angle_difference(n(kPi), kPi)) < 1e-12);
  const CircleMap nn = normalize(n);
  for (double a = 0; a < 7; a += 0.1) EXPECT_NEAR(nn(a), n(a), 1e-12);
}

TEST(Normalize, MobiusBecomesIdentity) {
  const CircleMap n = normalize(CircleMap::from_mobius(Mobius(2, 1, 3, 2)));
  for (double a = 0; a < 7; a += 0.1) EXPECT_NEAR(n(a), a, 1e-12);
}

TEST(Normalize, PostCompositionInvariant) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  const CircleMap f = CircleMap::from_lift([](double a) { return a + 0.4 * std::sin(a); });
  const CircleMap nf = normalize(f);
  for (int i = 0; i < 10; ++i) {
    Mat2 m{nd(rng), nd(rng), nd(rng), nd(rng)};
    if (m.det() < 0) m = Mat2{-m.a, m.b, -m.c, m.d};
    const CircleMap gf = CircleMap::from_mobius(Mobius(m)).compose(f);
    const CircleMap ngf = normalize(gf);
    for (double a = 0; a < 6.3; a += 0.05) EXPECT_NEAR(angle_difference(ngf(a), nf(a)), 0.0, 1e-9);
  }
}

TEST(QiConstants, IsometryGivesOneZero) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-0.95, 0.95);
  std::vector<Complex> x, y;
  const Mobius g(1.3, 0.4, 0.2, 0.83);
  while (x.size() < 60) {
    const Complex z(u(rng), u(rng));
    if (std::abs(z) > 0.97) continue;
    x.push_back(z);
    y.push_back(apply_disc(g, z));
  }
  const QiConstants qi = qi_constants(x, y);
  EXPECT_GE(qi.pairs, 100u);
  EXPECT_NEAR(qi.A, 1.0, 1e-9);
  EXPECT_NEAR(qi.B, 0.0, 1e-9);
}

TEST(QiConstants, NoisyIdentity) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.9, 0.9), ang(0, kTwoPi);
  const double delta = 0.05;
  std::vector<Complex> x, y;
  while (x.size() < 60) {
    const Complex z(u(rng), u(rng));
    if (std::abs(z) > 0.9) continue;
    x.push_back(z);
    // Move z by hyperbolic distance delta in a random direction.
    y.push_back(disc_translate(z, std::polar(distance_to_disc_radius(delta), ang(rng))));
  }
  const QiConstants qi = qi_constants(x, y);
  EXPECT_LE(qi.A, 1.0 + delta);
  EXPECT_LE(qi.B, 2 * delta + 1e-9);
}

TEST(QiConstants, RadialStretch) {
  // Points on common rays through 0; the map multiplies distance to 0 by e,
  // so every pair distance is multiplied by e.
  std::vector<Complex> x, y;
  for (int ray = 0; ray < 3; ++ray)
    for (int k = 1; k <= 15; ++k) {
      const double d = 0.4 * k;
      const Complex dir = std::polar(1.0, 2.0 * ray);
      x.push_back(distance_to_disc_radius(d) * dir);
      y.push_back(distance_to_disc_radius(std::exp(1.0) * d) * dir);
    }
  std::vector<Complex> xs, ys;  // one ray keeps all pairs collinear
  for (int k = 0; k < 15; ++k) {
    xs.push_back(x[k]);
    ys.push_back(y[k]);
  }
  const QiConstants qi = qi_constants(xs, ys, 0.1, 20.0);
  EXPECT_NEAR(qi.A, std::exp(1.0), 1e-6);
  EXPECT_NEAR(qi.B, 0.0, 1e-6);
}
