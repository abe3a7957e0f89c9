#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "adslab/circle_map.hpp"
#include "adslab/hyperbolic_plane.hpp"

namespace adslab {

class FuchsianGroup {
 public:
  FuchsianGroup() = default;
  FuchsianGroup(std::vector<Mobius> generators, std::string relations = "free")
      : generators_(std::move(generators)), relations_(std::move(relations)) {
    if (generators_.empty()) fail(ErrorKind::kInvalidInput, "group needs generators");
    for (const auto& g : generators_)
      if (!g.is_hyperbolic()) fail(ErrorKind::kNotHyperbolic, "generator is not hyperbolic");
  }

  const std::vector<Mobius>& generators() const { return generators_; }
  const std::string& relations() const { return relations_; }

  // Generators followed by their inverses: letter i < n is g_i, letter n + i is g_i^-1.
  std::vector<Mobius> letters() const {
    std::vector<Mobius> out = generators_;
    for (const auto& g : generators_) out.push_back(g.inverse());
    return out;
  }

  FuchsianGroup conjugate(const Mobius& g) const {
    std::vector<Mobius> gens;
    for (const auto& h : generators_) gens.push_back(g * h * g.inverse());
    return FuchsianGroup(std::move(gens), relations_);
  }

 private:
  std::vector<Mobius> generators_;
  std::string relations_ = "free";
};

// Two-generator group with Fricke traces (x, y, z) = (tr A, tr B, tr AB).
inline FuchsianGroup fricke_group(double x, double y, double z, std::string relations = "free") {
  if (!(x > 2 && y > 2 && z > 2)) fail(ErrorKind::kInvalidInput, "traces must exceed 2");
  const double lambda = 0.5 * (x + std::sqrt(x * x - 4));
  const Mat2 a{lambda, 0, 0, 1 / lambda};
  const double p = (z - y / lambda) / (lambda - 1 / lambda);
  const double q = y - p;
  const double bc = p * q - 1;
  if (!(bc > 0)) fail(ErrorKind::kInvalidInput, "traces do not define a real representation");
  const Mat2 b{p, std::sqrt(bc), std::sqrt(bc), q};
  return FuchsianGroup({Mobius(a), Mobius(b)}, std::move(relations));
}

// Third Fricke trace z (larger root) with tr[A, B] = -2 cos(pi / order), i.e.
// x^2 + y^2 + z^2 - xyz = 2 - 2 cos(pi / order). Order 0 means a cusp
// (tr[A, B] = -2).
inline double fricke_trace(double x, double y, int order = 0) {
  const double c = order == 0 ? 0.0 : 2.0 - 2.0 * std::cos(kPi / order);
  const double s = x * y;
  const double disc = s * s - 4 * (x * x + y * y - c);
  if (disc < 0) fail(ErrorKind::kInvalidInput, "no real Fricke trace");
  return 0.5 * (s + std::sqrt(disc));
}

// Torus with one cone point of angle 2 pi / order: the commutator is an
// elliptic rotation, the quotient is compact and the limit set is the circle
// with no cusps, so fixed points of short words fill it quickly.
inline FuchsianGroup cone_torus_group(double x, double y, int order = 2) {
  if (order < 2) fail(ErrorKind::kInvalidInput, "cone order must be at least 2");
  return fricke_group(x, y, fricke_trace(x, y, order), "cone-torus:" + std::to_string(order));
}

// Once-punctured torus: parabolic commutator, limit set the whole circle.
inline FuchsianGroup punctured_torus_group(double x, double y) {
  return fricke_group(x, y, fricke_trace(x, y), "punctured-torus");
}

// Inradius of the regular octagon with interior angles pi/4:
// cosh r = cot(pi/8).
inline double octagon_inradius() { return std::acosh(1.0 / std::tan(kPi / 8)); }

// Genus-2 surface group from the regular octagon with angles pi/4: generator k
// translates by twice the inradius along the direction k pi / 4, pairing
// opposite sides.
inline FuchsianGroup octagon_group() {
  const double d = 2.0 * octagon_inradius();
  std::vector<Mobius> gens;
  for (int k = 0; k < 4; ++k) gens.push_back(disc_translation(k * kPi / 4, d));
  return FuchsianGroup(std::move(gens), "genus-2");
}

struct Reduction {
  Complex point;    // representative in the fundamental domain
  Mobius element;   // element with element(point) = input
  int steps = 0;
};

// Greedy walk towards the origin: repeatedly applies the letter that brings z
// closest to 0 while that strictly decreases |z|. For the octagon group this
// lands in the Dirichlet domain at 0.
inline Reduction reduce_to_domain(const FuchsianGroup& group, Complex z, int max_steps = 1000) {
  const auto letters = group.letters();
  Mobius acc = Mobius::identity();
  for (int step = 0; step <= max_steps; ++step) {
    double best = std::abs(z);
    int pick = -1;
    for (std::size_t i = 0; i < letters.size(); ++i) {
      const double r = std::abs(apply_disc(letters[i], z));
      if (r < best * (1 - 1e-14)) {
        best = r;
        pick = static_cast<int>(i);
      }
    }
    if (pick < 0) return {z, acc, step};
    z = apply_disc(letters[static_cast<std::size_t>(pick)], z);
    acc = acc * letters[static_cast<std::size_t>(pick)].inverse();
  }
  fail(ErrorKind::kReductionFailure, "reduction walk exceeded its step cap");
}

struct WordFixedPoint {
  RP1 source;  // attracting fixed point of rho1(w)
  RP1 target;  // attracting fixed point of rho2(w)
};

// Eigenvector conditioning of a hyperbolic element: a rounding error eps in
// the entries moves the fixed points by about eps * condition.
inline double fixed_point_condition(const Mobius& g) {
  const double t = g.trace();
  return g.matrix().norm() / std::sqrt(std::max(t * t - 4.0, 0.0));
}

// Attracting fixed points of rho1(w), rho2(w) for all reduced words w with
// 1 <= |w| <= length that are hyperbolic in both groups with fixed points
// resolved to about 1e-11 (near-parabolic words are skipped).
inline std::vector<WordFixedPoint> matched_fixed_points(const FuchsianGroup& rho1,
                                                        const FuchsianGroup& rho2, int length) {
  const auto l1 = rho1.letters(), l2 = rho2.letters();
  const std::size_t n = rho1.generators().size();
  std::vector<WordFixedPoint> out;
  struct Frame {
    Mat2 m1, m2;
    std::size_t last;
    int depth;
  };
  std::vector<Frame> stack;
  for (std::size_t i = 0; i < l1.size(); ++i) stack.push_back({l1[i].matrix(), l2[i].matrix(), i, 1});
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    const Mobius g1(f.m1), g2(f.m2);
    if (g1.is_hyperbolic() && g2.is_hyperbolic() && fixed_point_condition(g1) < 1e5 &&
        fixed_point_condition(g2) < 1e5)
      out.push_back({g1.attracting_fixed_point(), g2.attracting_fixed_point()});
    if (f.depth == length) continue;
    const std::size_t inv = f.last < n ? f.last + n : f.last - n;
    for (std::size_t i = 0; i < l1.size(); ++i) {
      if (i == inv) continue;
      stack.push_back({g1.matrix() * l1[i].matrix(), g2.matrix() * l2[i].matrix(), i, f.depth + 1});
    }
  }
  return out;
}

struct EquivariantMap {
  CircleMap map;
  std::size_t points = 0;
  std::vector<double> residuals;  // per generator
  double residual = 0.0;          // max over generators
};

// sup over a uniform angle grid of |f(rho1(g) a) - rho2(g) f(a)| (circle distance).
inline std::vector<double> equivariance_residuals(const CircleMap& f, const FuchsianGroup& rho1,
                                                  const FuchsianGroup& rho2, std::size_t grid = 4096) {
  std::vector<double> res;
  for (std::size_t k = 0; k < rho1.generators().size(); ++k) {
    const Mobius& g1 = rho1.generators()[k];
    const Mobius& g2 = rho2.generators()[k];
    double worst = 0;
    for (std::size_t i = 0; i < grid; ++i) {
      const RP1 a = RP1::from_angle(kTwoPi * (static_cast<double>(i) + 0.5) / static_cast<double>(grid));
      const double lhs = f(g1(a)).alpha;
      const double rhs = g2(f(a)).alpha;
      worst = std::max(worst, std::abs(angle_difference(lhs, rhs)));
    }
    res.push_back(worst);
  }
  return res;
}

// Boundary map conjugating rho1 to rho2, interpolated through matched
// attracting fixed points of words up to the given length.
inline EquivariantMap equivariant_qs_map(const FuchsianGroup& rho1, const FuchsianGroup& rho2,
                                         int word_length,
                                         Interpolation mode = Interpolation::kMonotoneCubic) {
  if (rho1.generators().size() != rho2.generators().size())
    fail(ErrorKind::kInvalidInput, "generator lists differ in length");
  if (word_length < 1) fail(ErrorKind::kInvalidInput, "word length must be positive");
  auto pts = matched_fixed_points(rho1, rho2, word_length);
  std::sort(pts.begin(), pts.end(),
            [](const WordFixedPoint& a, const WordFixedPoint& b) { return a.source.alpha < b.source.alpha; });
  // Drop repeated fixed points (powers of the same element) and points closer
  // than their resolution.
  constexpr double kResolution = 1e-10;
  std::vector<WordFixedPoint> uniq;
  for (const auto& p : pts)
    if (uniq.empty() || (p.source.alpha - uniq.back().source.alpha > kResolution &&
                         std::abs(angle_difference(p.target.alpha, uniq.back().target.alpha)) > kResolution))
      uniq.push_back(p);
  if (uniq.size() > 1 && uniq.front().source.alpha + kTwoPi - uniq.back().source.alpha <= kResolution)
    uniq.pop_back();
  if (uniq.size() < CircleMap::kMinSamples)
    fail(ErrorKind::kInvalidInput, "too few fixed points; increase the word length");
  std::vector<double> theta, value;
  double total = 0;
  for (std::size_t i = 0; i < uniq.size(); ++i) {
    theta.push_back(uniq[i].source.alpha);
    if (i == 0) {
      value.push_back(uniq[0].target.alpha);
      continue;
    }
    const double step = wrap_angle(uniq[i].target.alpha - uniq[i - 1].target.alpha);
    if (!(step > 0)) fail(ErrorKind::kNotDiscreteLike, "matched fixed points are not circularly ordered");
    total += step;
    value.push_back(value.back() + step);
  }
  if (!(total < kTwoPi)) fail(ErrorKind::kNotDiscreteLike, "matched fixed points wind more than once");
  EquivariantMap out{CircleMap::from_samples(std::move(theta), std::move(value), mode), uniq.size(), {}, 0};
  out.residuals = equivariance_residuals(out.map, rho1, rho2);
  out.residual = *std::max_element(out.residuals.begin(), out.residuals.end());
  return out;
}

}  // namespace adslab
