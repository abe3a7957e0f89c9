#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "adslab/quasisymmetry.hpp"
#include "adslab/surface.hpp"

namespace adslab {

// Region bounded by a future and a past spacelike convex disc with a common
// ideal boundary. The charts double as the isometric embeddings V+ and V-
// of their induced metrics.
struct GHConvexSubset {
  SpacelikeChart future, past;
  double epsilon = 0.05;
};

struct CurvatureBounds {
  double D = 1.0;
  double min_k = 0.0, max_k = 0.0;
  double min_K = 0.0, max_K = 0.0;  // induced curvature -1 - k1 k2
};

// Smallest D >= 1 with every principal curvature in [1/D, D] (outward
// normals). Throws NotConvex where k1 k2 <= 0 or the surface bends inwards.
inline CurvatureBounds principal_curvature_bounds(const SpacelikeChart& s, CurvatureBounds acc = {1.0, 1e300, -1e300, 1e300, -1e300}) {
  const auto forms = fundamental_forms(s, s.nodes());
  for (const auto& f : forms) {
    if (!(f.k1 * f.k2 > 0) || !(f.k2 > 0))
      fail(ErrorKind::kNotConvex, "surface " + s.id + " is not convex at y = (" + std::to_string(f.y[0]) + ", " +
                                      std::to_string(f.y[1]) + ")");
    acc.min_k = std::min(acc.min_k, f.k2);
    acc.max_k = std::max(acc.max_k, f.k1);
    acc.D = std::max({acc.D, f.k1, 1.0 / f.k2});
    const double K = -1.0 - f.k1 * f.k2;
    acc.min_K = std::min(acc.min_K, K);
    acc.max_K = std::max(acc.max_K, K);
  }
  return acc;
}

inline CurvatureBounds principal_curvature_bounds(const GHConvexSubset& omega) {
  return principal_curvature_bounds(omega.past, principal_curvature_bounds(omega.future));
}

// Ideal boundary traced by the projections, as a map left -> right.
inline CircleMap boundary_graph(const BoundaryExtension& b) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t j = 0; j < b.left.size(); ++j) pts.emplace_back(wrap_angle(b.left[j]), b.right[j]);
  std::sort(pts.begin(), pts.end());
  std::vector<double> theta, value;
  for (const auto& [l, r] : pts) {
    if (!theta.empty() && l - theta.back() < 1e-12) continue;
    const double v = value.empty() ? r : value.back() + wrap_angle(r - value.back());
    theta.push_back(l);
    value.push_back(v);
  }
  return CircleMap::from_samples(std::move(theta), std::move(value));
}

// Sup distance between the ideal boundaries seen by the two charts.
inline double boundary_mismatch(const BoundaryExtension& a, const BoundaryExtension& b) {
  const CircleMap fb = boundary_graph(b);
  double worst = 0;
  for (std::size_t j = 0; j < a.left.size(); ++j)
    worst = std::max(worst, std::abs(angle_difference(fb(a.left[j]), a.right[j])));
  return worst;
}

// Builds the subset, orienting the past chart outwards and checking
// convexity, the curvature window (-1/eps, -1-eps) and matching boundaries.
inline GHConvexSubset make_gh_convex_subset(SpacelikeChart future, SpacelikeChart past, double epsilon = 0.05) {
  if (!(epsilon > 0 && epsilon < 1)) fail(ErrorKind::kInvalidInput, "epsilon must lie in (0, 1)");
  future.normal_sign = 1;
  past.normal_sign = -1;
  GHConvexSubset omega{std::move(future), std::move(past), epsilon};
  const CurvatureBounds b = principal_curvature_bounds(omega);
  if (!(b.min_K > -1.0 / epsilon) || !(b.max_K < -1.0 - epsilon))
    fail(ErrorKind::kBadCurvatureRange, "induced curvature leaves (-1/eps, -1-eps)");
  const double mismatch = boundary_mismatch(projection_boundary_extension(omega.future),
                                            projection_boundary_extension(omega.past));
  if (mismatch > 1e-2) fail(ErrorKind::kBoundaryMismatch, "future and past ideal boundaries differ");
  return omega;
}

struct GluingMap {
  CircleMap map;  // normalized: fixes 0, 1 and infinity
  CircleMap raw;  // before normalization, in the boundary parameter of V+
  std::string future_id, past_id;
  double deviation = 0;  // sup |map(a) - a| over a 1024-point grid
  double qs = 1;
  double boundary_mismatch = 0;
};

namespace detail {

inline void require_conformal(const SpacelikeChart& s) {
  const auto nodes = s.nodes();
  for (std::size_t k = 0; k < nodes.size(); k += 7) {
    const Jet j = s.derivatives(nodes[k]);
    const double e = bilinear(j.d1, j.d1), f = bilinear(j.d1, j.d2), g = bilinear(j.d2, j.d2);
    if (std::abs(e - g) > 1e-6 * e || std::abs(f) > 1e-6 * e)
      fail(ErrorKind::kNotConformal, "chart " + s.id + " is not a conformal parametrization");
  }
}

// Boundary values of Pi_l as an increasing circle map of the ray parameter
// (the parameter is reversed when the projection reverses orientation).
inline CircleMap left_boundary_map(const BoundaryExtension& b) {
  const std::size_t m = b.phi.size();
  std::vector<double> lifted(m);
  double total = 0;
  lifted[0] = b.left[0];
  for (std::size_t j = 1; j < m; ++j) {
    lifted[j] = lifted[j - 1] + angle_difference(b.left[j], b.left[j - 1]);
  }
  total = lifted[m - 1] + angle_difference(b.left[0], b.left[m - 1]) - lifted[0];
  std::vector<double> theta(m), value(m);
  if (total > 0) {
    for (std::size_t j = 0; j < m; ++j) theta[j] = b.phi[j], value[j] = lifted[j];
  } else {
    // psi = 2 pi - phi, in increasing order.
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t src = (m - j) % m;
      theta[j] = j == 0 ? 0.0 : kTwoPi - b.phi[src];
      value[j] = j == 0 ? lifted[0] : lifted[src] - total;
    }
  }
  return CircleMap::from_samples(std::move(theta), std::move(value));
}

}  // namespace detail

// Phi = (dV-)^-1 o dV+ through the left projection, normalized to fix
// 0, 1, infinity. Needs conformal charts so that the ray parameter is the
// ideal boundary of the uniformized metric.
inline GluingMap gluing_map(const GHConvexSubset& omega, std::size_t directions = 256) {
  detail::require_conformal(omega.future);
  detail::require_conformal(omega.past);
  const BoundaryExtension plus = projection_boundary_extension(omega.future, directions);
  const BoundaryExtension minus = projection_boundary_extension(omega.past, directions);
  GluingMap g;
  g.boundary_mismatch = boundary_mismatch(plus, minus);
  if (g.boundary_mismatch > 1e-2) fail(ErrorKind::kBoundaryMismatch, "future and past ideal boundaries differ");
  const CircleMap lp = detail::left_boundary_map(plus), lm = detail::left_boundary_map(minus);
  g.raw = lm.inverse().compose(lp);
  g.map = normalize(g.raw);
  g.future_id = omega.future.id;
  g.past_id = omega.past.id;
  for (int i = 0; i < 1024; ++i) {
    const double a = kTwoPi * i / 1024.0;
    g.deviation = std::max(g.deviation, std::abs(angle_difference(g.map(a), a)));
  }
  g.qs = qs_constant(g.map).k;
  return g;
}

struct QiReport {
  QiConstants future, past;
};

namespace detail {

inline QiConstants projection_qi(const SpacelikeChart& s, std::size_t max_nodes) {
  const auto nodes = s.nodes();
  const std::size_t stride = std::max<std::size_t>(1, nodes.size() / max_nodes);
  std::vector<Complex> domain, image;
  for (std::size_t k = 0; k < nodes.size(); k += stride) {
    domain.emplace_back(nodes[k][0], nodes[k][1]);
    image.push_back(uhp_to_disc(left_right_projection(s, nodes[k]).first));
  }
  return qi_constants(domain, image);
}

}  // namespace detail

// Quasi-isometry constants of Pi_l o V+- from the parameter disc (hyperbolic
// metric) to H2, on a subsample of at most max_nodes grid nodes per chart.
inline QiReport projection_qi_report(const GHConvexSubset& omega, std::size_t max_nodes = 300) {
  return {detail::projection_qi(omega.future, max_nodes), detail::projection_qi(omega.past, max_nodes)};
}

}  // namespace adslab
