#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "adslab/ads_core.hpp"
#include "adslab/circle_map.hpp"
#include "adslab/expression.hpp"
#include "adslab/hyperbolic_plane.hpp"
#include "adslab/parallel.hpp"

namespace adslab {

using Vec2d = Eigen::Vector2d;
using Mat2d = Eigen::Matrix2d;

// Position and its first and second parameter derivatives at one point.
struct Jet {
  Vec22 p, d1, d2, d11, d12, d22;
};

// Spacelike surface given by a parametrization of the Poincare disc |y| < 1.
// The sampling grid is {(i h, j h) : |y| <= radius}.
struct SpacelikeChart {
  std::string id;
  std::function<Vec22(const Vec2d&)> position;
  std::function<Jet(const Vec2d&)> jet;  // analytic closure, may be empty
  double radius = 0.9;
  double h = 1.0 / 32;
  int normal_sign = 1;             // +1: future-pointing unit normal, -1: past-pointing
  std::optional<CircleMap> ideal;  // ideal boundary as a graph left -> right, when known
  bool conformal = false;          // parametrization declared conformal

  std::vector<Vec2d> nodes() const {
    std::vector<Vec2d> out;
    const int m = static_cast<int>(std::floor(radius / h + 1e-9));
    for (int i = -m; i <= m; ++i)
      for (int j = -m; j <= m; ++j) {
        const Vec2d y(i * h, j * h);
        if (y.norm() <= radius + 1e-12) out.push_back(y);
      }
    return out;
  }

  // Central-difference step, shrunk towards the ideal boundary where the
  // parametrization blows up.
  double fd_step(const Vec2d& y) const { return 0.5 * h * (1.0 - y.squaredNorm()); }

  Jet derivatives(const Vec2d& y) const {
    if (jet) return jet(y);
    return finite_difference_jet(y, fd_step(y));
  }

  Jet finite_difference_jet(const Vec2d& y, double s) const {
    const Vec2d e1(s, 0), e2(0, s);
    Jet j;
    j.p = position(y);
    const Vec22 a = position(y + e1), b = position(y - e1), c = position(y + e2), d = position(y - e2);
    j.d1 = (a - b) / (2 * s);
    j.d2 = (c - d) / (2 * s);
    j.d11 = (a - 2 * j.p + b) / (s * s);
    j.d22 = (c - 2 * j.p + d) / (s * s);
    j.d12 = (position(y + e1 + e2) - position(y + e1 - e2) - position(y - e1 + e2) + position(y - e1 - e2)) /
            (4 * s * s);
    return j;
  }
};

namespace detail {

inline Vec22 e3() { return Vec22(0, 0, 1, 0); }

// Isometric embedding of the Poincare disc onto the plane {x3 = 0}, y = 0 -> e4.
inline Jet disc_embedding_jet(const Vec2d& y) {
  const double D = 1.0 - y.squaredNorm();
  const double f = 1.0 / D;
  const Vec2d df = 2.0 * y / (D * D);
  Mat2d ddf;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) ddf(i, k) = 2.0 * (i == k) / (D * D) + 8.0 * y[i] * y[k] / (D * D * D);
  // Components: a_m = 2 y_m f (m = 0, 1), x4 = 2 f - 1.
  auto comp = [&](int m, int i) { return 2.0 * (m == i) * f + 2.0 * y[m] * df[i]; };
  auto comp2 = [&](int m, int i, int k) {
    return 2.0 * (m == i) * df[k] + 2.0 * (m == k) * df[i] + 2.0 * y[m] * ddf(i, k);
  };
  Jet j;
  j.p = Vec22(2 * y[0] * f, 2 * y[1] * f, 0, 2 * f - 1);
  j.d1 = Vec22(comp(0, 0), comp(1, 0), 0, 2 * df[0]);
  j.d2 = Vec22(comp(0, 1), comp(1, 1), 0, 2 * df[1]);
  j.d11 = Vec22(comp2(0, 0, 0), comp2(1, 0, 0), 0, 2 * ddf(0, 0));
  j.d12 = Vec22(comp2(0, 0, 1), comp2(1, 0, 1), 0, 2 * ddf(0, 1));
  j.d22 = Vec22(comp2(0, 1, 1), comp2(1, 1, 1), 0, 2 * ddf(1, 1));
  return j;
}

}  // namespace detail

inline Vec22 disc_embedding(const Vec2d& y) { return detail::disc_embedding_jet(y).p; }

// Points at signed time distance t from the plane {x3 = 0} along its
// normal geodesics: cos t * iota(y) - sin t * e3 (t > 0 lies to the future).
inline SpacelikeChart equidistant_surface(double t, double radius = 0.9, double h = 1.0 / 32) {
  if (!(std::abs(t) < kPi / 2 - 1e-6)) fail(ErrorKind::kDegenerateDistance, "equidistant distance too close to pi/2");
  SpacelikeChart s;
  s.id = "equidistant:t=" + std::to_string(t);
  const double c = std::cos(t), sn = std::sin(t);
  s.position = [c, sn](const Vec2d& y) { return Vec22(c * disc_embedding(y) - sn * detail::e3()); };
  s.jet = [c, sn](const Vec2d& y) {
    Jet j = detail::disc_embedding_jet(y);
    j.p = c * j.p - sn * detail::e3();
    j.d1 *= c, j.d2 *= c, j.d11 *= c, j.d12 *= c, j.d22 *= c;
    return j;
  };
  s.radius = radius;
  s.h = h;
  s.ideal = CircleMap();
  s.conformal = true;
  return s;
}

// Graph over the plane {x3 = 0} in normal-geodesic coordinates: the point at
// time distance u(y) above iota(y). Derivatives by finite differences.
inline SpacelikeChart graph_surface(const Expression& u, double radius = 0.9, double h = 1.0 / 32) {
  SpacelikeChart s;
  s.id = "graph:" + u.text();
  s.position = [u](const Vec2d& y) {
    const double t = u(y[0], y[1]);
    return Vec22(std::cos(t) * disc_embedding(y) - std::sin(t) * detail::e3());
  };
  s.radius = radius;
  s.h = h;
  for (const auto& y : s.nodes())
    if (!(std::abs(u(y[0], y[1])) < kPi / 2 - 1e-6))
      fail(ErrorKind::kDegenerateDistance, "graph height reaches pi/2");
  s.ideal = CircleMap();  // height stays bounded, so the boundary is the diagonal
  return s;
}

inline SpacelikeChart isometry_image(const SpacelikeChart& base, const Isometry& g) {
  SpacelikeChart s = base;
  s.id = "isometry_image:" + base.id;
  s.position = [pos = base.position, g](const Vec2d& y) { return g(pos(y)); };
  if (base.jet)
    s.jet = [jet = base.jet, g](const Vec2d& y) {
      Jet j = jet(y);
      return Jet{g(j.p), g(j.d1), g(j.d2), g(j.d11), g(j.d12), g(j.d22)};
    };
  if (base.ideal)
    s.ideal = CircleMap::from_mobius(Mobius(g.B()))
                  .compose(*base.ideal)
                  .compose(CircleMap::from_mobius(Mobius(g.A()).inverse()));
  return s;
}

struct NodeForms {
  Vec2d y;
  Vec22 p, N;  // unit normal with the chart's orientation
  Mat2d I, II, B, J;
  double k1 = 0, k2 = 0;  // principal curvatures, k1 >= k2
  double det_B = 0;
};

namespace detail {

// Vector N with <N, a> = <N, b> = <N, c> = 0 (generalized cross product).
inline Vec22 q_orthogonal(const Vec22& a, const Vec22& b, const Vec22& c) {
  const Eigen::Vector4d eta(1, 1, -1, -1);
  Eigen::Matrix<double, 3, 4> m;
  m.row(0) = a.cwiseProduct(eta).transpose();
  m.row(1) = b.cwiseProduct(eta).transpose();
  m.row(2) = c.cwiseProduct(eta).transpose();
  Vec22 n;
  for (int k = 0; k < 4; ++k) {
    Eigen::Matrix3d minor;
    for (int col = 0, mc = 0; col < 4; ++col) {
      if (col == k) continue;
      minor.col(mc++) = m.col(col);
    }
    n[k] = ((k % 2) ? -1.0 : 1.0) * minor.determinant();
  }
  return n;
}

}  // namespace detail

inline NodeForms forms_from_jet(const SpacelikeChart& s, const Vec2d& y, const Jet& j) {
  NodeForms f;
  f.y = y;
  f.p = j.p;
  f.I << bilinear(j.d1, j.d1), bilinear(j.d1, j.d2), bilinear(j.d2, j.d1), bilinear(j.d2, j.d2);
  if (!(f.I(0, 0) > 0) || !(f.I.determinant() > 0))
    fail(ErrorKind::kNotSpacelike, "induced metric is not positive definite");
  Vec22 n = detail::q_orthogonal(j.p, j.d1, j.d2);
  const double qn = q22(n);
  if (!(qn < 0)) fail(ErrorKind::kNotSpacelike, "normal is not timelike");
  n /= std::sqrt(-qn);
  if (bilinear(n, future_field(j.p)) > 0) n = -n;  // future: same cone as the future field
  f.N = s.normal_sign * n;
  f.II << bilinear(f.N, j.d11), bilinear(f.N, j.d12), bilinear(f.N, j.d12), bilinear(f.N, j.d22);
  f.B = f.I.inverse() * f.II;
  // Complex structure of I, oriented so that (p, N, d1, d2) is positive.
  Eigen::Matrix4d frame;
  frame << f.p, f.N, j.d1, j.d2;
  const double orient = frame.determinant() > 0 ? 1.0 : -1.0;
  const double root = std::sqrt(f.I.determinant());
  f.J << -f.I(0, 1), -f.I(1, 1), f.I(0, 0), f.I(0, 1);
  f.J *= orient / root;
  // Principal curvatures: generalized eigenvalues of (II, I).
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat2d> es(0.5 * (f.II + f.II.transpose()), f.I);
  f.k1 = es.eigenvalues()[1];
  f.k2 = es.eigenvalues()[0];
  f.det_B = f.B.determinant();
  return f;
}

inline NodeForms fundamental_forms(const SpacelikeChart& s, const Vec2d& y) {
  return forms_from_jet(s, y, s.derivatives(y));
}

inline std::vector<NodeForms> fundamental_forms(const SpacelikeChart& s, const std::vector<Vec2d>& nodes) {
  std::vector<NodeForms> out(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t i) { out[i] = fundamental_forms(s, nodes[i]); });
  return out;
}

// Gaussian curvature of the induced metric from its coefficients alone
// (Brioschi formula), central differences with the chart step.
inline double intrinsic_curvature(const SpacelikeChart& s, const Vec2d& y) {
  const double st = s.fd_step(y);
  auto metric = [&](const Vec2d& z) {
    const Jet j = s.jet ? s.jet(z) : s.finite_difference_jet(z, st);
    return Eigen::Vector3d(bilinear(j.d1, j.d1), bilinear(j.d1, j.d2), bilinear(j.d2, j.d2));
  };
  const Vec2d e1(st, 0), e2(0, st);
  const Eigen::Vector3d m0 = metric(y), mu_p = metric(y + e1), mu_m = metric(y - e1), mv_p = metric(y + e2),
                        mv_m = metric(y - e2);
  const Eigen::Vector3d mu = (mu_p - mu_m) / (2 * st), mv = (mv_p - mv_m) / (2 * st);
  const Eigen::Vector3d muu = (mu_p - 2 * m0 + mu_m) / (st * st), mvv = (mv_p - 2 * m0 + mv_m) / (st * st);
  const Eigen::Vector3d muv =
      (metric(y + e1 + e2) - metric(y + e1 - e2) - metric(y - e1 + e2) + metric(y - e1 - e2)) / (4 * st * st);
  const double E = m0[0], F = m0[1], G = m0[2];
  Eigen::Matrix3d a, b;
  a << -0.5 * mvv[0] + muv[1] - 0.5 * muu[2], 0.5 * mu[0], mu[1] - 0.5 * mv[0],  //
      mv[1] - 0.5 * mu[2], E, F,                                                  //
      0.5 * mv[2], F, G;
  b << 0, 0.5 * mv[0], 0.5 * mu[2],  //
      0.5 * mv[0], E, F,             //
      0.5 * mu[2], F, G;
  const double w = E * G - F * F;
  return (a.determinant() - b.determinant()) / (w * w);
}

struct GaussReport {
  double max_residual = 0;  // max |K_I + 1 + det B|
  double min_product = 0;   // min k1 k2
  std::size_t nodes = 0;
};

inline GaussReport gauss_check(const SpacelikeChart& s, const std::vector<Vec2d>& nodes) {
  std::vector<std::pair<double, double>> r(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t i) {
    const NodeForms f = fundamental_forms(s, nodes[i]);
    r[i] = {std::abs(intrinsic_curvature(s, nodes[i]) + 1.0 + f.det_B), f.k1 * f.k2};
  });
  GaussReport g;
  g.nodes = nodes.size();
  g.min_product = 1e300;
  for (const auto& [res, prod] : r) {
    g.max_residual = std::max(g.max_residual, res);
    g.min_product = std::min(g.min_product, prod);
  }
  return g;
}

inline GaussReport gauss_check(const SpacelikeChart& s) { return gauss_check(s, s.nodes()); }

// Upper half-plane points (Pi_l, Pi_r) of the timelike geodesic through p
// orthogonal to the surface: in the group model it is {A : A x = x'}, with
// x = Pi_r the fixed point of P^-1 N and x' = Pi_l = P x.
inline std::pair<Complex, Complex> left_right_projection(const Vec22& p, const Vec22& n) {
  const Mat2 P = to_matrix(p), Nm = to_matrix(n);
  const Mat2 m = P.adjugate() * Nm;
  const double tr = m.trace(), det = m.det();
  // Rounding grows with |p|^2 towards the ideal boundary.
  const double scale = std::max(1.0, P.norm() * P.norm());
  if (std::abs(tr) > 1e-8 * scale * m.norm() || std::abs(det - 1.0) > 1e-8 * std::max(1.0, m.norm() * m.norm()) ||
      std::abs(P.det() - 1.0) > 1e-8 * scale)
    fail(ErrorKind::kNumericalDegeneracy, "normal geodesic is not an elliptic one-parameter group");
  if (m.c == 0.0) fail(ErrorKind::kNumericalDegeneracy, "normal geodesic has no fixed point in H2");
  const double im = std::sqrt(std::max(4.0 * det - tr * tr, 0.0)) / (2.0 * std::abs(m.c));
  const Complex x((m.a - m.d) / (2.0 * m.c), im);
  const Complex xl = (P.a * x + P.b) / (P.c * x + P.d);
  return {xl, x};
}

inline std::pair<Complex, Complex> left_right_projection(const SpacelikeChart& s, const Vec2d& y) {
  const NodeForms f = fundamental_forms(s, y);
  return left_right_projection(f.p, f.N);
}

struct PullbackReport {
  double left = 0, right = 0;  // max relative residuals
  std::vector<double> left_nodes, right_nodes;
};

// Compares the pullbacks of the hyperbolic metric by Pi_l and Pi_r (central
// differences with step `step(y)`, default the chart step) against
// I((E - J B) ., (E - J B) .) and I((E + J B) ., (E + J B) .) respectively.
inline PullbackReport pullback_check(const SpacelikeChart& s, const std::vector<Vec2d>& nodes,
                                     std::function<double(const Vec2d&)> step = {}) {
  if (!step) step = [&s](const Vec2d& y) { return s.fd_step(y); };
  PullbackReport r;
  r.left_nodes.resize(nodes.size());
  r.right_nodes.resize(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t k) {
    const Vec2d& y = nodes[k];
    const NodeForms f = fundamental_forms(s, y);
    const double h = step(y);
    std::array<std::pair<Complex, Complex>, 4> pr;
    const Vec2d off[4] = {Vec2d(h, 0), Vec2d(-h, 0), Vec2d(0, h), Vec2d(0, -h)};
    for (int i = 0; i < 4; ++i) pr[i] = left_right_projection(s, y + off[i]);
    const auto [zl, zr] = left_right_projection(f.p, f.N);
    auto pullback = [&](Complex z, Complex du, Complex dv) {
      const double w = 1.0 / (z.imag() * z.imag());
      Mat2d g;
      g << std::norm(du) * w, std::real(du * std::conj(dv)) * w, std::real(du * std::conj(dv)) * w, std::norm(dv) * w;
      return g;
    };
    const Mat2d gl = pullback(zl, (pr[0].first - pr[1].first) / (2 * h), (pr[2].first - pr[3].first) / (2 * h));
    const Mat2d gr = pullback(zr, (pr[0].second - pr[1].second) / (2 * h), (pr[2].second - pr[3].second) / (2 * h));
    // With J oriented by (p, N, d1, d2) the left projection takes the minus sign.
    const Mat2d plus = Mat2d::Identity() + f.J * f.B, minus = Mat2d::Identity() - f.J * f.B;
    const Mat2d tl = minus.transpose() * f.I * minus, tr = plus.transpose() * f.I * plus;
    r.left_nodes[k] = (gl - tl).norm() / tl.norm();
    r.right_nodes[k] = (gr - tr).norm() / tr.norm();
  });
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    r.left = std::max(r.left, r.left_nodes[k]);
    r.right = std::max(r.right, r.right_nodes[k]);
  }
  return r;
}

inline PullbackReport pullback_check(const SpacelikeChart& s) { return pullback_check(s, s.nodes()); }

// Angle coordinate of a point of the closed upper half-plane: the argument
// of its Cayley image, so that the real point tan(a/2) has angle a.
inline double uhp_angle(Complex z) { return std::arg(uhp_to_disc(z)); }

struct BoundaryExtension {
  std::vector<double> phi;          // ray directions in the parameter disc
  std::vector<double> left, right;  // boundary values of Pi_l, Pi_r (angles)
  double cauchy = 0;                // max change between the two outermost radii
  double mismatch = 0;              // sup |ideal(left) - right| when the ideal map is known
};

// Radial limits of Pi_l and Pi_r along m rays at radii 1 - 0.5 * 4^-k,
// k < levels, with one Richardson step assuming an error linear in 1 - r.
inline BoundaryExtension projection_boundary_extension(const SpacelikeChart& s, std::size_t m = 256,
                                                       int levels = 8, double cauchy_tol = 1e-3) {
  if (levels < 2) fail(ErrorKind::kInvalidInput, "boundary extension needs at least two radii");
  BoundaryExtension b;
  b.phi.resize(m);
  b.left.resize(m);
  b.right.resize(m);
  std::vector<double> jumps(m);
  parallel_for(m, [&](std::size_t j) {
    const double phi = kTwoPi * static_cast<double>(j) / static_cast<double>(m);
    std::vector<double> al, ar;
    for (int k = 0; k < levels; ++k) {
      const double r = 1.0 - 0.5 * std::pow(4.0, -k);
      const auto [zl, zr] = left_right_projection(s, Vec2d(r * std::cos(phi), r * std::sin(phi)));
      double a = uhp_angle(zl), c = uhp_angle(zr);
      if (!al.empty()) {
        a = al.back() + angle_difference(a, al.back());
        c = ar.back() + angle_difference(c, ar.back());
      }
      al.push_back(a);
      ar.push_back(c);
    }
    const std::size_t n = al.size();
    jumps[j] = std::max(std::abs(al[n - 1] - al[n - 2]), std::abs(ar[n - 1] - ar[n - 2]));
    b.phi[j] = phi;
    b.left[j] = wrap_angle((4 * al[n - 1] - al[n - 2]) / 3);
    b.right[j] = wrap_angle((4 * ar[n - 1] - ar[n - 2]) / 3);
  });
  for (double c : jumps) b.cauchy = std::max(b.cauchy, c);
  if (b.cauchy > cauchy_tol) fail(ErrorKind::kNoLimit, "radial limits fail the Cauchy test");
  if (s.ideal)
    for (std::size_t j = 0; j < m; ++j)
      b.mismatch = std::max(b.mismatch, std::abs(angle_difference((*s.ideal)(b.left[j]), b.right[j])));
  return b;
}

// Chart fixtures from JSON: {"kind": "equidistant", "t": ...},
// {"kind": "graph", "height_expr": ...} or
// {"kind": "isometry_image", "base": {...}, "g": {"A": [a,b,c,d], "B": [...]}};
// optional "radius" and "h".
inline SpacelikeChart chart_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) fail(ErrorKind::kInvalidInput, "chart needs a \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  const double radius = j.value("radius", 0.9), h = j.value("h", 1.0 / 32);
  if (!(radius > 0 && radius < 1) || !(h > 0)) fail(ErrorKind::kInvalidInput, "chart radius must be in (0,1), h > 0");
  if (kind == "equidistant") return equidistant_surface(j.at("t").get<double>(), radius, h);
  if (kind == "graph") return graph_surface(Expression(j.at("height_expr").get<std::string>()), radius, h);
  if (kind == "isometry_image") {
    auto mat = [](const nlohmann::json& a) {
      if (!a.is_array() || a.size() != 4) fail(ErrorKind::kInvalidInput, "isometry factor needs 4 entries");
      return Mat2{a[0].get<double>(), a[1].get<double>(), a[2].get<double>(), a[3].get<double>()};
    };
    const auto& g = j.at("g");
    return isometry_image(chart_from_json(j.at("base")), Isometry::normalized(mat(g.at("A")), mat(g.at("B"))));
  }
  fail(ErrorKind::kInvalidInput, "unknown chart kind '" + kind + "'");
}

}  // namespace adslab
