#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "adslab/circle_map.hpp"
#include "adslab/hyperbolic_plane.hpp"
#include "adslab/parallel.hpp"

namespace adslab {

// The unique Moebius g with g(f(0)) = 0, g(f(1)) = 1, g(f(inf)) = inf.
inline Mobius normalizing_mobius(const CircleMap& f) {
  const std::array<RP1, 3> from{f(RP1{0.0}), f(RP1{kPi / 2}), f(RP1{kPi})};
  for (int i = 0; i < 3; ++i)
    if (chordal_distance(from[i], from[(i + 1) % 3]) < kPolicy.null)
      fail(ErrorKind::kDegenerateQuadruple, "map collapses 0, 1, inf");
  return Mobius::from_three_points(from, {RP1{0.0}, RP1{kPi / 2}, RP1{kPi}});
}

// g o f, fixing 0, 1 and infinity.
inline CircleMap normalize(const CircleMap& f) {
  const Mobius g = normalizing_mobius(f);
  if (f.mobius_tag()) return CircleMap::from_mobius(g * *f.mobius_tag(), f.size());
  if (const auto* phi = f.affine_form()) {
    // g is affine here; stay on the affine line to keep full precision.
    const double f0 = (*phi)(0.0), scale = (*phi)(1.0) - f0;
    return CircleMap::from_affine([p = *phi, f0, scale](double x) { return (p(x) - f0) / scale; },
                                  f.size());
  }
  return CircleMap::from_mobius(g).compose(f);
}

// Search grid for the quasi-symmetry ratio. Level 0 is 256 base points
// x = tan(pi (i - 128) / 257) and 64 dyadic scales in [2^-10, 2^10]; each
// level doubles both and contains the previous grid.
struct QsGrid {
  int level = 0;

  std::size_t point_count() const { return std::size_t{256} << level; }
  std::size_t scale_count() const { return (std::size_t{63} << level) + 1; }
  double point(std::size_t i) const {
    const double n = static_cast<double>(point_count());
    return std::tan(kPi * (static_cast<double>(i) - n / 2) / (n * 257.0 / 256.0));
  }
  double scale(std::size_t k) const {
    const double m = static_cast<double>(scale_count() - 1);
    return std::exp2(-10.0 + 20.0 * static_cast<double>(k) / m);
  }
};

struct QsReport {
  double k = 1.0;
  double x = 0.0, t = 0.0;  // witness
};

// sup over the grid of max(r, 1/r), r = (phi(x+t) - phi(x)) / (phi(x) - phi(x-t)),
// for phi the normalized map on the affine line.
inline QsReport qs_constant(const CircleMap& f, const QsGrid& grid = {}) {
  if (f.mobius_tag()) return {};
  const CircleMap phi = normalize(f);
  const std::size_t nx = grid.point_count(), nt = grid.scale_count();
  std::vector<QsReport> best(nx);
  parallel_for(nx, [&](std::size_t i) {
    const double x = grid.point(i);
    const double fx = phi.apply_affine(x);
    QsReport r;
    for (std::size_t k = 0; k < nt; ++k) {
      const double t = grid.scale(k);
      const double up = phi.apply_affine(x + t) - fx;
      const double down = fx - phi.apply_affine(x - t);
      if (!(up > 0) || !(down > 0))
        fail(ErrorKind::kNotMonotone, "map is not strictly increasing on the affine line");
      const double ratio = up / down;
      const double v = std::max(ratio, 1.0 / ratio);
      if (v > r.k) r = {v, x, t};
    }
    best[i] = r;
  });
  QsReport out;
  for (const auto& r : best)
    if (r.k > out.k) out = r;
  return out;
}

struct CrossRatioNormReport {
  double M = 1.0;
  std::array<double, 4> witness{};  // angles of (a, b, c, d)
};

// sup of max(|cr_f|, 1/|cr_f|) over symmetric quadruples. Endpoints a, d run
// over the m-point angle grid; b, c = h^{-1}(+-lambda), h the Moebius map with
// a -> 0, d -> inf and the arc midpoint -> 1, lambda = 2^{j/2}, |j| <= 20.
inline CrossRatioNormReport cross_ratio_norm(const CircleMap& f, std::size_t m = 64) {
  if (f.mobius_tag()) return {};
  if (m < 4) fail(ErrorKind::kInvalidInput, "cross-ratio grid needs at least 4 points");
  std::vector<CrossRatioNormReport> best(m);
  parallel_for(m, [&](std::size_t ia) {
    CrossRatioNormReport r;
    const double a = kTwoPi * static_cast<double>(ia) / static_cast<double>(m);
    for (std::size_t id = 0; id < m; ++id) {
      if (id == ia) continue;
      const double d = kTwoPi * static_cast<double>(id) / static_cast<double>(m);
      const double dd = d > a ? d : d + kTwoPi;
      const Mobius h = Mobius::from_three_points(
          {RP1::from_angle(a), RP1::from_angle(0.5 * (a + dd)), RP1::from_angle(d)},
          {RP1{0.0}, RP1{kPi / 2}, RP1{kPi}});
      const Mobius hinv = h.inverse();
      const RP1 fa = f(RP1::from_angle(a)), fd = f(RP1::from_angle(d));
      for (int j = -20; j <= 20; ++j) {
        const double lambda = std::exp2(0.5 * j);
        const RP1 b = hinv(RP1::from_affine(lambda)), c = hinv(RP1::from_affine(-lambda));
        const double cr = std::abs(cross_ratio(fa, f(b), f(c), fd, 0.0));
        const double v = std::max(cr, 1.0 / cr);
        if (v > r.M) r = {v, {a, b.alpha, c.alpha, d}};
      }
    }
    best[ia] = r;
  });
  CrossRatioNormReport out;
  for (const auto& r : best)
    if (r.M > out.M) out = r;
  return out;
}

struct QiConstants {
  double A = 1.0, B = 0.0;
  std::size_t pairs = 0;
};

// Quasi-isometry constants of a sampled map of the disc: the pair minimizing
// A + B among all (A, B) with d/A - B <= d' <= A d + B on every sample pair.
// For fixed A the least feasible B is convex in A, so a ternary search on A
// finds the optimum. Pairs with d outside [min_d, max_d] are ignored.
inline QiConstants qi_constants(const std::vector<Complex>& domain, const std::vector<Complex>& image,
                                double min_d = 0.1, double max_d = 20.0) {
  if (domain.size() != image.size()) fail(ErrorKind::kInvalidInput, "sample size mismatch");
  std::vector<std::pair<double, double>> dist;
  for (std::size_t i = 0; i < domain.size(); ++i)
    for (std::size_t j = i + 1; j < domain.size(); ++j) {
      const double d = disc_distance(domain[i], domain[j]);
      if (d < min_d || d > max_d) continue;
      dist.emplace_back(d, disc_distance(image[i], image[j]));
    }
  if (dist.empty()) fail(ErrorKind::kInvalidInput, "no sample pairs in the distance window");
  auto least_b = [&](double A) {
    double b = 0.0;
    for (const auto& [d, dp] : dist) b = std::max({b, d / A - dp, dp - A * d});
    return b;
  };
  double hi = 1.0;
  for (const auto& [d, dp] : dist) hi = std::max({hi, dp / d, d / std::max(dp, 1e-300)});
  hi = std::min(hi, 1e12);
  double lo = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    if (m1 + least_b(m1) <= m2 + least_b(m2))
      hi = m2;
    else
      lo = m1;
  }
  // The objective may be flat near 1; prefer the endpoint when it is as good.
  double A = 0.5 * (lo + hi);
  if (1.0 + least_b(1.0) <= A + least_b(A)) A = 1.0;
  return {A, least_b(A), dist.size()};
}

}  // namespace adslab
