#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "adslab/errors.hpp"

namespace adslab {

using Vec3 = Eigen::Vector3d;

struct HullFace {
  std::array<int, 3> v;  // counter-clockwise seen from outside
  Vec3 normal;           // unit outward normal
  double offset = 0;     // normal . x = offset on the face plane
};

struct Hull3 {
  std::vector<Vec3> points;  // all input points (indices refer here)
  std::vector<HullFace> faces;
  bool planar = false;
  double planarity_residual = 0;  // max distance to the best-fit plane when planar
};

namespace detail {

inline HullFace make_face(const std::vector<Vec3>& p, int a, int b, int c) {
  HullFace f;
  f.v = {a, b, c};
  Vec3 n = (p[b] - p[a]).cross(p[c] - p[a]);
  const double len = n.norm();
  f.normal = len > 0 ? Vec3(n / len) : Vec3::Zero();
  f.offset = f.normal.dot(p[a]);
  return f;
}

inline long long edge_key(int a, int b) { return (static_cast<long long>(a) << 32) | static_cast<unsigned>(b); }

}  // namespace detail

// Quickhull-style incremental convex hull with deterministic insertion order. Points within
// tol * (diameter) of the current hull are treated as inside. Inputs whose
// affine span is (numerically) a plane are flagged planar instead of hulled.
inline Hull3 convex_hull(const std::vector<Vec3>& pts, double tol = 1e-12, double planar_tol = 1e-9) {
  Hull3 h;
  h.points = pts;
  const int n = static_cast<int>(pts.size());
  if (n < 3) fail(ErrorKind::kDegenerateInput, "hull needs at least 3 points");

  // Extreme initial simplex.
  int i0 = 0, i1 = 0;
  for (int i = 1; i < n; ++i) {
    if (pts[i].x() < pts[i0].x()) i0 = i;
    if (pts[i].x() > pts[i1].x()) i1 = i;
  }
  double best = 0;
  for (int i = 0; i < n; ++i) {
    const double d = (pts[i] - pts[i0]).norm();
    if (d > best) best = d, i1 = i;
  }
  const double scale = best;
  if (!(scale > 0)) fail(ErrorKind::kDegenerateInput, "all hull points coincide");
  const Vec3 axis = (pts[i1] - pts[i0]) / scale;
  int i2 = -1;
  best = 0;
  for (int i = 0; i < n; ++i) {
    const Vec3 w = pts[i] - pts[i0];
    const double d = (w - w.dot(axis) * axis).norm();
    if (d > best) best = d, i2 = i;
  }
  if (best <= planar_tol * scale) fail(ErrorKind::kDegenerateInput, "hull points are collinear");
  const Vec3 pn = (pts[i1] - pts[i0]).cross(pts[i2] - pts[i0]).normalized();
  int i3 = -1;
  best = 0;
  for (int i = 0; i < n; ++i) {
    const double d = std::abs(pn.dot(pts[i] - pts[i0]));
    if (d > best) best = d, i3 = i;
  }
  if (best <= planar_tol * scale) {
    // Least-squares plane through the centroid for the residual report.
    Vec3 c = Vec3::Zero();
    for (const auto& p : pts) c += p;
    c /= n;
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& p : pts) cov += (p - c) * (p - c).transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    const Vec3 normal = es.eigenvectors().col(0);
    double res = 0;
    for (const auto& p : pts) res = std::max(res, std::abs(normal.dot(p - c)));
    h.planar = true;
    h.planarity_residual = res;
    return h;
  }

  const double eps = tol * scale;
  const Vec3 interior = 0.25 * (pts[i0] + pts[i1] + pts[i2] + pts[i3]);
  std::vector<HullFace> faces;
  std::vector<char> alive;
  std::vector<std::vector<int>> outside;          // conflict lists
  std::unordered_map<long long, int> edge_owner;  // directed edge -> face
  auto push_face = [&](HullFace f) {
    const int id = static_cast<int>(faces.size());
    for (int k = 0; k < 3; ++k) edge_owner[detail::edge_key(f.v[k], f.v[(k + 1) % 3])] = id;
    faces.push_back(f);
    alive.push_back(1);
    outside.emplace_back();
    return id;
  };
  auto add = [&](int a, int b, int c) {
    HullFace f = detail::make_face(pts, a, b, c);
    if (f.normal.dot(interior) > f.offset) f = detail::make_face(pts, a, c, b);
    return push_face(f);
  };
  auto assign = [&](int p, const std::vector<int>& candidates) {
    for (int f : candidates)
      if (faces[f].normal.dot(pts[p]) - faces[f].offset > eps) {
        outside[f].push_back(p);
        return;
      }
  };
  std::vector<int> initial{add(i0, i1, i2), add(i0, i1, i3), add(i0, i2, i3), add(i1, i2, i3)};
  for (int i = 0; i < n; ++i)
    if (i != i0 && i != i1 && i != i2 && i != i3) assign(i, initial);

  // Quickhull order: always add the farthest outside point of the lowest
  // pending face, and grow the visible region through face adjacency so it
  // stays connected.
  for (std::size_t next = 0; next < faces.size(); ++next) {
    if (!alive[next] || outside[next].empty()) continue;
    const HullFace& base = faces[next];
    int apex = outside[next][0];
    double far = -1;
    for (int p : outside[next]) {
      const double d = base.normal.dot(pts[p]) - base.offset;
      if (d > far) far = d, apex = p;
    }
    const Vec3& p = pts[apex];
    std::vector<int> visible{static_cast<int>(next)};
    std::unordered_set<int> seen{static_cast<int>(next)};
    std::vector<std::pair<int, int>> horizon;
    for (std::size_t k = 0; k < visible.size(); ++k) {
      const HullFace f = faces[visible[k]];
      for (int e = 0; e < 3; ++e) {
        const int a = f.v[e], b = f.v[(e + 1) % 3];
        const int nb = edge_owner.at(detail::edge_key(b, a));
        if (seen.count(nb)) continue;
        if (faces[nb].normal.dot(p) - faces[nb].offset > eps) {
          seen.insert(nb);
          visible.push_back(nb);
        } else {
          horizon.emplace_back(a, b);
        }
      }
    }
    // A horizon edge can be recorded before its far face was found visible.
    std::vector<std::pair<int, int>> ring;
    for (const auto& [a, b] : horizon)
      if (!seen.count(edge_owner.at(detail::edge_key(b, a)))) ring.emplace_back(a, b);
    std::vector<int> orphans;
    for (int f : visible) {
      alive[f] = 0;
      for (int q : outside[f])
        if (q != apex) orphans.push_back(q);
      outside[f].clear();
      for (int e = 0; e < 3; ++e) edge_owner.erase(detail::edge_key(faces[f].v[e], faces[f].v[(e + 1) % 3]));
    }
    std::vector<int> created;
    for (const auto& [a, b] : ring) created.push_back(push_face(detail::make_face(pts, a, b, apex)));
    std::sort(orphans.begin(), orphans.end());
    for (int q : orphans) assign(q, created);
  }
  for (std::size_t f = 0; f < faces.size(); ++f)
    if (alive[f]) h.faces.push_back(faces[f]);
  return h;
}

// Largest signed distance of any input point outside any face (<= tol means convex).
inline double convexity_violation(const Hull3& h) {
  double worst = -1e300;
  for (const auto& f : h.faces)
    for (const auto& p : h.points) worst = std::max(worst, f.normal.dot(p) - f.offset);
  return worst;
}

}  // namespace adslab
