#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "adslab/errors.hpp"
#include "adslab/numeric_policy.hpp"
#include "adslab/projective_line.hpp"

namespace adslab {

// Coordinates (x1, x2, x3, x4) of R^{2,2}.
using Vec22 = Eigen::Vector4d;

inline double bilinear(const Vec22& x, const Vec22& y) {
  return x[0] * y[0] + x[1] * y[1] - x[2] * y[2] - x[3] * y[3];
}

inline double q22(const Vec22& x) { return bilinear(x, x); }

// Linear isometry (R^{2,2}, q22) -> (M2(R), -det).
inline Mat2 to_matrix(const Vec22& x) {
  return {x[2] + x[0], x[1] - x[3], x[1] + x[3], x[2] - x[0]};
}

inline Vec22 from_matrix(const Mat2& m) {
  return {0.5 * (m.a - m.d), 0.5 * (m.b + m.c), 0.5 * (m.a + m.d), 0.5 * (m.c - m.b)};
}

// Unit timelike vector field tangent to H^{2,1} defining the future.
inline Vec22 future_field(const Vec22& x) { return {0.0, 0.0, -x[3], x[2]}; }

// Point of AdS^{2,1} = H^{2,1}/{+-1}. The stored representative is canonical:
// the first nonzero coordinate in the order x4, x3, x1, x2 is positive, where
// coordinates below 1e-12 relative to the vector count as zero.
class ADSPoint {
 public:
  ADSPoint() : rep_(0, 0, 0, 1) {}

  explicit ADSPoint(const Vec22& x, double tol = kPolicy.manifold_in) : rep_(canonical(x)) {
    if (!rep_.allFinite() || std::abs(q22(rep_) + 1.0) > tol)
      fail(ErrorKind::kNotOnManifold, "q22 = " + std::to_string(q22(rep_)));
  }

  // Rescales a timelike vector onto the hyperboloid.
  static ADSPoint normalized(const Vec22& x) {
    const double q = q22(x);
    if (!(q < 0)) fail(ErrorKind::kNotOnManifold, "vector is not timelike");
    return ADSPoint(x / std::sqrt(-q), kPolicy.manifold);
  }

  const Vec22& rep() const { return rep_; }

  static Vec22 canonical(const Vec22& x) {
    const double eps = 1e-12 * x.cwiseAbs().maxCoeff();
    for (int i : {3, 2, 0, 1}) {
      if (x[i] > eps) return x;
      if (x[i] < -eps) return -x;
    }
    return x;
  }

 private:
  Vec22 rep_;
};

// Ideal point (Im M, Ker M) of the null matrix M.
struct BoundaryPoint {
  RP1 left;   // image
  RP1 right;  // kernel
};

inline BoundaryPoint boundary_to_rp1pair(const Mat2& m) {
  if (m.norm() < kPolicy.zero_matrix) fail(ErrorKind::kZeroMatrix, "zero matrix");
  const double scale = m.norm();
  if (std::abs(m.det()) > kPolicy.rank_one * scale * scale)
    fail(ErrorKind::kNotNull, "matrix is not rank one");
  // Image: the larger column. Kernel: the rotated larger row.
  const Vec2 c1{m.a, m.c}, c2{m.b, m.d};
  const Vec2 im = c1.norm() >= c2.norm() ? c1 : c2;
  const Vec2 r1{m.a, m.b}, r2{m.c, m.d};
  const Vec2 row = r1.norm() >= r2.norm() ? r1 : r2;
  return {RP1::from_vector(im), RP1::from_vector({-row.y, row.x})};
}

inline BoundaryPoint boundary_to_rp1pair(const Vec22& x) { return boundary_to_rp1pair(to_matrix(x)); }

// Null representative u (J k)^T with unit u, k.
inline Vec22 rp1pair_to_boundary(const BoundaryPoint& p) {
  const Vec2 u = p.left.vector();
  const Vec2 k = p.right.vector();
  const Vec2 jk = kQuarterTurn * k;
  return from_matrix({u.x * jk.x, u.x * jk.y, u.y * jk.x, u.y * jk.y});
}

// The isometry X -> A X B^{-1}, with A, B in SL(2, R).
class Isometry {
 public:
  Isometry() = default;
  Isometry(const Mat2& a, const Mat2& b) : a_(a), b_(b) {
    if (std::abs(a.det() - 1.0) > 1e-12 || std::abs(b.det() - 1.0) > 1e-12)
      fail(ErrorKind::kInvalidInput, "isometry factors need det = 1");
  }
  static Isometry normalized(const Mat2& a, const Mat2& b) {
    return Isometry(Mobius(a).matrix(), Mobius(b).matrix());
  }

  const Mat2& A() const { return a_; }
  const Mat2& B() const { return b_; }

  Vec22 operator()(const Vec22& x) const { return from_matrix(a_ * to_matrix(x) * b_.adjugate()); }
  ADSPoint operator()(const ADSPoint& p) const { return ADSPoint((*this)(p.rep()), kPolicy.manifold); }
  BoundaryPoint operator()(const BoundaryPoint& p) const {
    return {Mobius(a_)(p.left), Mobius(b_)(p.right)};
  }

  Isometry inverse() const { return Isometry(a_.adjugate(), b_.adjugate()); }
  friend Isometry operator*(const Isometry& g, const Isometry& h) {
    return Isometry(g.a_ * h.a_, g.b_ * h.b_);
  }

 private:
  Mat2 a_ = Mat2::identity();
  Mat2 b_ = Mat2::identity();
};

template <class T>
T act(const Isometry& g, const T& p) {
  return g(p);
}

enum class CausalClass { kSpacelike, kLightlike, kTimelike };

inline std::string to_string(CausalClass c) {
  switch (c) {
    case CausalClass::kSpacelike: return "spacelike";
    case CausalClass::kLightlike: return "lightlike";
    case CausalClass::kTimelike: return "timelike";
  }
  return "?";
}

inline CausalClass classify(double q, double tol = kPolicy.causal) {
  if (std::abs(q) <= tol) return CausalClass::kLightlike;
  return q > 0 ? CausalClass::kSpacelike : CausalClass::kTimelike;
}

struct TangentVector {
  ADSPoint base;
  Vec22 v;

  TangentVector(const ADSPoint& p, const Vec22& w) : base(p), v(w) {
    if (std::abs(bilinear(p.rep(), w)) > kPolicy.tangency * std::max(1.0, w.norm()))
      fail(ErrorKind::kNotTangent, "vector not tangent to H^{2,1}");
  }
};

inline CausalClass causal_type(const TangentVector& t) { return classify(q22(t.v)); }

inline ADSPoint geodesic(const ADSPoint& p, const TangentVector& v, double t) {
  const double q = q22(v.v);
  const bool unit = std::abs(std::abs(q) - 1.0) <= kPolicy.velocity;
  if (!unit && std::abs(q) > kPolicy.causal)
    fail(ErrorKind::kUnnormalizedVelocity, "velocity q22 = " + std::to_string(q));
  const Vec22& x = v.base.rep();
  if ((p.rep() - x).norm() > 1e-12) fail(ErrorKind::kNotTangent, "velocity based elsewhere");
  Vec22 y;
  if (!unit)
    y = x + t * v.v;
  else if (q > 0)
    y = std::cosh(t) * x + std::sinh(t) * v.v;
  else
    y = std::cos(t) * x + std::sin(t) * v.v;
  return ADSPoint(y, kPolicy.manifold * std::max(1.0, y.squaredNorm()));
}

// Lorentzian time between timelike-related points, in [0, pi/2].
inline double timelike_distance(const ADSPoint& p, const ADSPoint& q) {
  const double c = std::abs(bilinear(p.rep(), q.rep()));
  if (c > 1.0 + kPolicy.causal) fail(ErrorKind::kNotTimelikeRelated, "|<p,q>| > 1");
  return std::acos(std::min(1.0, c));
}

// Type of the hyperplane n^perp; a timelike normal gives a spacelike plane.
inline CausalClass plane_type(const Vec22& normal) {
  const double n = normal.norm();
  if (!(n > kPolicy.zero_matrix)) fail(ErrorKind::kDegenerateSubspace, "zero normal");
  const double q = q22(normal / n);
  switch (classify(q, 1e-12)) {
    case CausalClass::kSpacelike: return CausalClass::kTimelike;
    case CausalClass::kTimelike: return CausalClass::kSpacelike;
    default: return CausalClass::kLightlike;
  }
}

// Plane spanned by three vectors; its q22-orthogonal normal decides the type.
inline CausalClass plane_type(const Vec22& w1, const Vec22& w2, const Vec22& w3) {
  Eigen::Matrix<double, 3, 4> rows;
  const Eigen::Vector4d eta(1, 1, -1, -1);
  rows.row(0) = w1.cwiseProduct(eta).transpose();
  rows.row(1) = w2.cwiseProduct(eta).transpose();
  rows.row(2) = w3.cwiseProduct(eta).transpose();
  Eigen::FullPivLU<Eigen::Matrix<double, 3, 4>> lu(rows);
  lu.setThreshold(1e-12);
  if (lu.rank() < 3) fail(ErrorKind::kDegenerateSubspace, "spanning set has rank < 3");
  return plane_type(Vec22(lu.kernel().col(0)));
}

}  // namespace adslab
