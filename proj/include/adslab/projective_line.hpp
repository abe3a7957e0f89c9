#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>

#include "adslab/errors.hpp"
#include "adslab/numeric_policy.hpp"

namespace adslab {

// Real 2x2 matrix, row-major.
struct Mat2 {
  double a = 1, b = 0, c = 0, d = 1;

  static constexpr Mat2 identity() { return {1, 0, 0, 1}; }

  constexpr double det() const { return a * d - b * c; }
  constexpr double trace() const { return a + d; }
  // Classical adjugate; equals the inverse when det = 1.
  constexpr Mat2 adjugate() const { return {d, -b, -c, a}; }
  Mat2 inverse() const {
    const double k = 1.0 / det();
    return {d * k, -b * k, -c * k, a * k};
  }
  constexpr Mat2 transpose() const { return {a, c, b, d}; }
  double norm() const { return std::sqrt(a * a + b * b + c * c + d * d); }

  friend constexpr Mat2 operator*(const Mat2& x, const Mat2& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
            x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
  }
  friend constexpr Mat2 operator+(const Mat2& x, const Mat2& y) {
    return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d};
  }
  friend constexpr Mat2 operator-(const Mat2& x, const Mat2& y) {
    return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d};
  }
  friend constexpr Mat2 operator*(double s, const Mat2& x) {
    return {s * x.a, s * x.b, s * x.c, s * x.d};
  }
  constexpr std::array<double, 4> row_major() const { return {a, b, c, d}; }
};

struct Vec2 {
  double x = 0, y = 0;
  friend constexpr Vec2 operator*(const Mat2& m, const Vec2& v) {
    return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
  }
  friend constexpr Vec2 operator*(double s, const Vec2& v) { return {s * v.x, s * v.y}; }
  friend constexpr Vec2 operator+(const Vec2& u, const Vec2& v) { return {u.x + v.x, u.y + v.y}; }
  friend constexpr Vec2 operator-(const Vec2& u, const Vec2& v) { return {u.x - v.x, u.y - v.y}; }
  double norm() const { return std::hypot(x, y); }
};

// Signed area u x v.
constexpr double cross(const Vec2& u, const Vec2& v) { return u.x * v.y - u.y * v.x; }

// Quarter turn [[0,-1],[1,0]]; as a Moebius map z -> -1/z.
inline constexpr Mat2 kQuarterTurn{0, -1, 1, 0};

// Wraps an angle into [0, 2pi).
inline double wrap_angle(double alpha) {
  double r = std::fmod(alpha, kTwoPi);
  if (r < 0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

// Signed representative of alpha - beta in (-pi, pi].
inline double angle_difference(double alpha, double beta) {
  double d = std::remainder(alpha - beta, kTwoPi);
  if (d <= -kPi) d += kTwoPi;
  return d;
}

// A point of RP^1 = R u {inf}, stored by its circle angle alpha in [0, 2pi).
// The affine coordinate is x = tan(alpha / 2), so alpha = pi is infinity and
// alpha increases with x. The homogeneous vector is (sin(alpha/2), cos(alpha/2)).
struct RP1 {
  double alpha = 0;
  // Affine coordinate when the point was built from one (inf for infinity),
  // NaN otherwise. Lets cross-ratios of rational inputs stay exact.
  double x = std::numeric_limits<double>::quiet_NaN();

  static RP1 from_angle(double alpha) { return {wrap_angle(alpha)}; }
  static RP1 from_affine(double x) {
    if (std::isinf(x)) return infinity();
    return {wrap_angle(2.0 * std::atan(x)), x};
  }
  static RP1 infinity() { return {kPi, std::numeric_limits<double>::infinity()}; }
  static RP1 from_vector(const Vec2& v) { return {wrap_angle(2.0 * std::atan2(v.x, v.y))}; }

  Vec2 vector() const { return {std::sin(0.5 * alpha), std::cos(0.5 * alpha)}; }
  // A homogeneous vector, not necessarily of unit length.
  Vec2 homogeneous() const {
    if (std::isnan(x)) return vector();
    if (std::isinf(x)) return {1.0, 0.0};
    return {x, 1.0};
  }
  bool is_infinity() const { return std::abs(alpha - kPi) < 1e-15; }
  double affine() const {
    if (is_infinity()) return std::numeric_limits<double>::infinity();
    return std::tan(0.5 * alpha);
  }
};

// Chordal distance between two points of RP^1 (sin of half the angle between
// the lines), in [0, 1].
inline double chordal_distance(const RP1& p, const RP1& q) {
  return std::abs(cross(p.vector(), q.vector()));
}

// Orientation-preserving projective map of RP^1, stored normalized to det = 1
// and trace >= 0. The trace normalization selects the lift of the action on
// the angle coordinate with small displacement.
class Mobius {
 public:
  Mobius() = default;
  explicit Mobius(const Mat2& m) : m_(normalize(m)) {}
  Mobius(double a, double b, double c, double d) : Mobius(Mat2{a, b, c, d}) {}

  static Mobius identity() { return Mobius(); }

  // The unique orientation-preserving map with x_k -> y_k, k = 0, 1, 2.
  // Both triples must be positively cyclically ordered and distinct.
  static Mobius from_three_points(const std::array<RP1, 3>& x, const std::array<RP1, 3>& y) {
    double dx = 0, dy = 0;
    const Mat2 sx = from_standard(x, dx), sy = from_standard(y, dy);
    if (!(dx * dy > 0))
      fail(ErrorKind::kNotMonotone, "three-point correspondence reverses orientation");
    // sy sx^{-1} scaled to det 1; the determinants come from the exact
    // formula, which stays accurate for nearly coincident points.
    Mobius g;
    g.m_ = (1.0 / std::sqrt(dx * dy)) * (sy * sx.adjugate());
    if (g.m_.trace() < 0) g.m_ = -1.0 * g.m_;
    return g;
  }

  const Mat2& matrix() const { return m_; }
  Mobius inverse() const { return Mobius(m_.adjugate()); }
  double trace() const { return m_.trace(); }
  bool is_hyperbolic(double tol = 1e-10) const { return std::abs(m_.trace()) > 2.0 + tol; }

  RP1 operator()(const RP1& p) const { return RP1::from_vector(m_ * p.vector()); }
  double apply_affine(double x) const { return (*this)(RP1::from_affine(x)).affine(); }

  // Lifted action on the angle coordinate: continuous in alpha and
  // lift(alpha + 2pi) = lift(alpha) + 2pi.
  double lift(double alpha) const {
    const Vec2 v{std::sin(0.5 * alpha), std::cos(0.5 * alpha)};
    const Vec2 w = m_ * v;
    // Signed angle from v to w; never +-pi because trace >= 0.
    const double turn = std::atan2(cross(w, v), v.x * w.x + v.y * w.y);
    return alpha + 2.0 * turn;
  }

  // Attracting fixed point (hyperbolic maps only).
  RP1 attracting_fixed_point() const {
    if (!is_hyperbolic(0.0)) fail(ErrorKind::kNotHyperbolic, "no attracting fixed point");
    const double tr = m_.trace();
    const double disc = std::sqrt(tr * tr - 4.0);
    const double lambda = 0.5 * (tr + (tr >= 0 ? disc : -disc));  // |lambda| > 1
    // Eigenvector of [[a,b],[c,d]] for lambda.
    Vec2 v{m_.b, lambda - m_.a};
    const Vec2 w{lambda - m_.d, m_.c};
    if (w.norm() > v.norm()) v = w;
    return RP1::from_vector(v);
  }

  RP1 repelling_fixed_point() const { return inverse().attracting_fixed_point(); }

  friend Mobius operator*(const Mobius& f, const Mobius& g) { return Mobius(f.m_ * g.m_); }

 private:
  static Mat2 normalize(const Mat2& m) {
    const double det = m.det();
    if (!(det > 0)) fail(ErrorKind::kInvalidInput, "Moebius matrix needs det > 0");
    Mat2 r = (1.0 / std::sqrt(det)) * m;
    if (r.trace() < 0) r = -1.0 * r;
    return r;
  }

  // Matrix sending the vectors of (0, 1, inf) to multiples of those of x.
  static Mat2 from_standard(const std::array<RP1, 3>& x, double& det_out) {
    const Vec2 p = x[0].vector(), q = x[1].vector(), r = x[2].vector();
    // columns: col1 ~ r (image of inf = e1), col2 ~ p (image of 0 = e2),
    // col1 + col2 ~ q  =>  a r + b p = q.
    const double det = cross(r, p);
    if (std::abs(det) < 1e-300) fail(ErrorKind::kDegenerateQuadruple, "coincident points");
    const double a = cross(q, p) / det;
    const double b = cross(r, q) / det;
    det_out = cross(q, p) * cross(r, q) / det;
    return Mat2{a * r.x, b * p.x, a * r.y, b * p.y};
  }

  Mat2 m_ = Mat2::identity();
};

// cr(a,b,c,d) = (c-a)(d-b) / ((b-a)(d-c)), evaluated in homogeneous
// coordinates so that infinity needs no special casing.
inline double cross_ratio(const RP1& a, const RP1& b, const RP1& c, const RP1& d,
                          double separation = kPolicy.null) {
  const RP1* pts[4] = {&a, &b, &c, &d};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (chordal_distance(*pts[i], *pts[j]) < separation)
        fail(ErrorKind::kDegenerateQuadruple, "cross-ratio of coincident points");
  const Vec2 va = a.homogeneous(), vb = b.homogeneous(), vc = c.homogeneous(), vd = d.homogeneous();
  // x - y  ~  cross(v_x, v_y) up to the factor v_x.y * v_y.y, which cancels.
  return (cross(vc, va) * cross(vd, vb)) / (cross(vb, va) * cross(vd, vc));
}

inline bool is_symmetric_quadruple(const RP1& a, const RP1& b, const RP1& c, const RP1& d,
                                   double tol = 1e-10) {
  return std::abs(cross_ratio(a, b, c, d) + 1.0) <= tol;
}

}  // namespace adslab
