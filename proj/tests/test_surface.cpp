#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "adslab/surface.hpp"

using namespace adslab;

namespace {

Isometry random_isometry(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 0.4);
  auto sl2 = [&] {
    Mat2 m{1 + g(rng), g(rng), g(rng), 1 + g(rng)};
    if (m.det() < 0) m = Mat2{m.b, m.a, m.d, m.c};
    return (1.0 / std::sqrt(m.det())) * m;
  };
  const Mat2 a = sl2();
  return Isometry(a, sl2());
}

Complex act(const Mat2& m, Complex z) { return (m.a * z + m.b) / (m.c * z + m.d); }

// Two-grid slope: log2 of the residual ratio between steps h and h/2.
double order(double coarse, double fine) { return std::log2(coarse / fine); }

// Pullback check on a fixed set of parameter points at chart step h.
PullbackReport pullback_at(const SpacelikeChart& s, double h) {
  SpacelikeChart c = s;
  c.h = h;
  const std::vector<Vec2d> pts{{0, 0}, {0.25, 0.1}, {-0.4, 0.3}, {0.5, -0.5}, {0.1, 0.7}};
  return pullback_check(c, pts);
}

}  // namespace

TEST(Fixtures, DiscEmbeddingIsTheTotallyGeodesicPlane) {
  const SpacelikeChart s = equidistant_surface(0.0);
  EXPECT_NEAR((disc_embedding(Vec2d(0, 0)) - Vec22(0, 0, 0, 1)).norm(), 0.0, 1e-15);
  for (const Vec2d& y : s.nodes()) {
    const NodeForms f = fundamental_forms(s, y);
    ASSERT_NEAR(q22(f.p), -1.0, 1e-12);
    ASSERT_NEAR(f.B.norm(), 0.0, 1e-12);
    // Poincare metric 4 |dy|^2 / (1 - |y|^2)^2.
    const double conf = 4.0 / std::pow(1.0 - y.squaredNorm(), 2);
    ASSERT_NEAR((f.I - conf * Mat2d::Identity()).norm() / conf, 0.0, 1e-12);
  }
}

TEST(Fixtures, EquidistantShapeOperator) {
  for (double t : {kPi / 12, kPi / 6, kPi / 4, -kPi / 6}) {
    const SpacelikeChart s = equidistant_surface(t);
    for (const Vec2d& y : {Vec2d(0, 0), Vec2d(0.3, -0.6), Vec2d(-0.8, 0.1)}) {
      const NodeForms f = fundamental_forms(s, y);
      EXPECT_NEAR((f.B - std::tan(t) * Mat2d::Identity()).norm(), 0.0, 1e-12) << t;
      EXPECT_LT(bilinear(f.N, Vec22(0, 0, -f.p[3], f.p[2])), 0.0) << "normal must be future";
    }
  }
  EXPECT_THROW(equidistant_surface(kPi / 2), Error);
}

TEST(Fixtures, FiniteDifferenceFormsConvergeAtOrderTwo) {
  const SpacelikeChart s = equidistant_surface(kPi / 6);
  const Vec2d y(0.3, -0.4);
  const NodeForms exact = fundamental_forms(s, y);
  std::vector<double> err;
  for (double step : {1e-2, 5e-3, 2.5e-3}) {
    const NodeForms f = forms_from_jet(s, y, s.finite_difference_jet(y, step));
    err.push_back((f.II - exact.II).norm() + (f.I - exact.I).norm());
  }
  EXPECT_NEAR(order(err[0], err[1]), 2.0, 0.2);
  EXPECT_NEAR(order(err[1], err[2]), 2.0, 0.2);
}

TEST(Fixtures, IntrinsicCurvatureOfEquidistantSurfaces) {
  // Metric cos^2 t times the hyperbolic one: K = -1 / cos^2 t.
  SpacelikeChart s = equidistant_surface(kPi / 4, 0.9, 1.0 / 1024);
  EXPECT_NEAR(intrinsic_curvature(s, Vec2d(0.1, 0.2)), -2.0, 1e-6);
  s = equidistant_surface(0.0, 0.9, 1.0 / 1024);
  EXPECT_NEAR(intrinsic_curvature(s, Vec2d(-0.3, 0.0)), -1.0, 1e-6);
}

TEST(Fixtures, GraphSurfaceAndParser) {
  const SpacelikeChart flat = graph_surface(Expression("0"));
  const SpacelikeChart plane = equidistant_surface(0.0);
  for (const Vec2d& y : {Vec2d(0.1, 0.2), Vec2d(-0.5, 0.5)})
    EXPECT_NEAR((flat.position(y) - plane.position(y)).norm(), 0.0, 1e-14);
  EXPECT_NEAR(Expression("2^3^2")(0, 0), 512.0, 1e-9);
  EXPECT_NEAR(Expression("-x^2 + sin(pi/2) * r")(3, 4), -9.0 + 5.0, 1e-12);
  EXPECT_THROW(Expression("foo(x)"), Error);
  EXPECT_THROW(Expression("(x + 1"), Error);
  EXPECT_THROW(graph_surface(Expression("2")), Error);
}

TEST(Gauss, RelationHoldsAtOrderTwo) {
  for (const char* u : {"0", "0.3 + 0.2 * (x^2 - y^2)", "0.4 * (1 + 0.3 * x * y)"}) {
    std::vector<double> res;
    for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
      SpacelikeChart s = graph_surface(Expression(u), 0.6, h);
      res.push_back(gauss_check(s).max_residual);
    }
    EXPECT_NEAR(order(res[1], res[2]), 2.0, 0.2) << u << " residuals " << res[1] << " " << res[2];
  }
}

TEST(Gauss, ConvexityMatchesCurvatureRange) {
  const SpacelikeChart s = graph_surface(Expression("0.3 + 0.2 * (x^2 - y^2)"), 0.8, 1.0 / 32);
  const auto forms = fundamental_forms(s, s.nodes());
  for (const auto& f : forms) {
    const double K = intrinsic_curvature(s, f.y);
    if (K < -1.0 - 1e-3) {
      EXPECT_GT(f.k1 * f.k2, 0.0);
    }
  }
}

TEST(Projections, IdentityElementProjectsToI) {
  const auto [zl, zr] = left_right_projection(Vec22(0, 0, 0, 1), Vec22(0, 0, 1, 0));
  EXPECT_NEAR(std::abs(zl - kI), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(zr - kI), 0.0, 1e-14);
}

TEST(Projections, Equivariance) {
  std::mt19937_64 rng(7);
  const SpacelikeChart s = graph_surface(Expression("0.3 + 0.2 * (x^2 - y^2)"));
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  for (int trial = 0; trial < 100; ++trial) {
    const Isometry g = random_isometry(rng);
    const NodeForms f = fundamental_forms(s, Vec2d(u(rng), u(rng)));
    const auto [zl, zr] = left_right_projection(f.p, f.N);
    const auto [gl, gr] = left_right_projection(g(f.p), g(f.N));
    ASSERT_NEAR(std::abs(gl - act(g.A(), zl)), 0.0, 1e-8 * (1 + std::abs(gl)));
    ASSERT_NEAR(std::abs(gr - act(g.B(), zr)), 0.0, 1e-8 * (1 + std::abs(gr)));
  }
}

TEST(Projections, PlanePullbackIsExactWithSmallSteps) {
  const SpacelikeChart s = equidistant_surface(0.0);
  const std::vector<Vec2d> pts{{0, 0}, {0.3, 0.2}, {-0.5, 0.6}};
  const PullbackReport r = pullback_check(s, pts, [](const Vec2d&) { return 2e-5; });
  EXPECT_LE(r.left, 1e-8);
  EXPECT_LE(r.right, 1e-8);
}

TEST(Projections, PullbackConvergesAtOrderTwo) {
  std::vector<SpacelikeChart> fixtures{equidistant_surface(0.0), equidistant_surface(kPi / 6),
                                       equidistant_surface(kPi / 4),
                                       graph_surface(Expression("0.3 + 0.2 * (x^2 - y^2)"))};
  std::mt19937_64 rng(3);
  fixtures.push_back(isometry_image(fixtures[3], random_isometry(rng)));
  for (const auto& s : fixtures) {
    const PullbackReport a = pullback_at(s, 1.0 / 32), b = pullback_at(s, 1.0 / 64);
    EXPECT_NEAR(order(a.left, b.left), 2.0, 0.2) << s.id;
    EXPECT_NEAR(order(a.right, b.right), 2.0, 0.2) << s.id;
    EXPECT_LT(b.left, 1e-3) << s.id;
  }
}

TEST(Projections, FuchsianCaseIsAnIsometry) {
  // (1 + tan^2 t) cos^2 t = 1: both pullbacks equal the hyperbolic metric.
  const double t = kPi / 6;
  const SpacelikeChart s = equidistant_surface(t);
  const NodeForms f = fundamental_forms(s, Vec2d(0.2, 0.3));
  const Mat2d m = Mat2d::Identity() - f.J * f.B;
  const Mat2d target = m.transpose() * f.I * m;
  const double conf = 4.0 / std::pow(1.0 - 0.13, 2);
  EXPECT_NEAR((target - conf * Mat2d::Identity()).norm() / conf, 0.0, 1e-12);
}

TEST(Boundary, EquidistantExtendsByIdentity) {
  for (double t : {0.0, kPi / 6, kPi / 4}) {
    const BoundaryExtension b = projection_boundary_extension(equidistant_surface(t));
    EXPECT_LE(b.mismatch, 1e-6) << t;
    for (std::size_t j = 0; j < b.phi.size(); ++j)
      ASSERT_NEAR(angle_difference(b.left[j], b.right[j]), 0.0, 1e-6);
  }
}

TEST(Boundary, IsometryImageFollowsTheMobiusFactors) {
  std::mt19937_64 rng(11);
  const SpacelikeChart base = equidistant_surface(kPi / 6);
  const BoundaryExtension b0 = projection_boundary_extension(base);
  for (int k = 0; k < 5; ++k) {
    const Isometry g = random_isometry(rng);
    const BoundaryExtension b = projection_boundary_extension(isometry_image(base, g));
    EXPECT_LE(b.mismatch, 1e-4);
    double worst = 0;
    for (std::size_t j = 0; j < b.phi.size(); ++j)
      worst = std::max(worst, std::abs(angle_difference(b.left[j], Mobius(g.A())(RP1{b0.left[j]}).alpha)));
    EXPECT_LE(worst, 1e-4);
  }
}

TEST(Boundary, PerturbedGraphMismatchDecreases) {
  const Expression u("0.3 + 0.1 * x * (1 - r^2)");
  const double coarse = projection_boundary_extension(graph_surface(u), 64, 6, 1e-2).mismatch;
  const double fine = projection_boundary_extension(graph_surface(u), 64, 8, 1e-2).mismatch;
  EXPECT_LE(fine, 1e-3);
  EXPECT_LT(fine, coarse);
}

TEST(Errors, TimelikeChartIsRejected) {
  SpacelikeChart s = equidistant_surface(0.0);
  // Swap the space and time roles of the embedding: the tangent plane turns timelike.
  s.jet = {};
  s.position = [](const Vec2d& y) {
    const Vec22 p = disc_embedding(y);
    return Vec22(p[2], p[3], p[0], p[1]);
  };
  EXPECT_THROW(fundamental_forms(s, Vec2d(0.2, 0.1)), Error);
}
