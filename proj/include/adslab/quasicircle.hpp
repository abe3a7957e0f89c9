#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "adslab/ads_core.hpp"
#include "adslab/circle_map.hpp"
#include "adslab/convex_hull.hpp"
#include "adslab/parallel.hpp"
#include "adslab/quasisymmetry.hpp"

namespace adslab {

// Projective chart y -> (y1, y2, y3) / y4 after the isometry `transform`.
struct AffineChart {
  int chart_id = 3;     // the coordinate set to 1
  Isometry transform;   // identity on the first attempt
  int attempt = 0;
  double margin = 0.0;  // min |y4| / |y| over the curve samples

  Vec3 operator()(const Vec22& x) const {
    const Vec22 y = transform(x);
    return Vec3(y[0], y[1], y[2]) / y[3];
  }
  // Lift of a chart point to R^{2,2}, back in curve coordinates.
  Vec22 lift(const Vec3& p) const { return transform.inverse()(Vec22(p.x(), p.y(), p.z(), 1.0)); }
};

struct AcausalityCertificate {
  bool acausal = false;
  bool achronal = false;       // margin >= 0: lightlike pairs allowed
  double min_margin = 0.0;     // min of -<c_i, c_j> over distinct samples, unit u and k
  std::size_t i = 0, j = 0;    // pair realizing the margin
};

class QuasiCircle {
 public:
  // Sample lifts: left coordinate alpha_i, right coordinate beta_i, both
  // nondecreasing with total increase 2 pi.
  std::vector<double> alpha, beta;
  std::vector<BoundaryPoint> samples;
  std::vector<Vec22> reps;  // null representatives, continuous along the curve
  std::optional<CircleMap> map;  // absent for the rhombus
  Isometry placement;            // the curve is placement . graph(map)
  AffineChart chart;
  AcausalityCertificate certificate;
  bool permissive = false;       // admitted while only achronal

  std::size_t size() const { return samples.size(); }
  std::vector<Vec3> chart_points() const {
    std::vector<Vec3> out;
    out.reserve(reps.size());
    for (const auto& r : reps) out.push_back(chart(r));
    return out;
  }
};

namespace detail {

inline Vec22 null_rep(double a, double b) {
  const Vec2 u{std::sin(0.5 * a), std::cos(0.5 * a)};
  const Vec2 jk = kQuarterTurn * Vec2{std::sin(0.5 * b), std::cos(0.5 * b)};
  return from_matrix({u.x * jk.x, u.x * jk.y, u.y * jk.x, u.y * jk.y});
}

// Seeded candidate isometries for chart selection.
inline std::vector<Isometry> chart_candidates() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi), stretch(-1.0, 1.0);
  auto random_sl2 = [&] {
    const double t1 = angle(rng), t2 = angle(rng), s = stretch(rng);
    const Mat2 r1{std::cos(t1), -std::sin(t1), std::sin(t1), std::cos(t1)};
    const Mat2 r2{std::cos(t2), -std::sin(t2), std::sin(t2), std::cos(t2)};
    return r1 * Mat2{std::exp(s), 0, 0, std::exp(-s)} * r2;
  };
  std::vector<Isometry> out{Isometry()};
  for (int k = 0; k < 8; ++k) {
    const Mat2 a = random_sl2();
    out.push_back(Isometry::normalized(a, random_sl2()));
  }
  return out;
}

}  // namespace detail

// Smallest pairing margin over all sample pairs, computed from the lifts so
// that lightlike pairs give exactly zero.
inline AcausalityCertificate acausality_check(const QuasiCircle& c) {
  const std::size_t n = c.alpha.size();
  std::vector<Vec2> u(n), k(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = {std::sin(0.5 * c.alpha[i]), std::cos(0.5 * c.alpha[i])};
    k[i] = {std::sin(0.5 * c.beta[i]), std::cos(0.5 * c.beta[i])};
  }
  std::vector<AcausalityCertificate> rows(n);
  parallel_for(n, [&](std::size_t i) {
    AcausalityCertificate r;
    r.min_margin = 1e300;
    for (std::size_t j = i + 1; j < n; ++j) {
      // -<c_i, c_j> = cross(u_i, u_j) cross(k_i, k_j) / 2
      const double m = 0.5 * cross(u[i], u[j]) * cross(k[i], k[j]);
      if (m < r.min_margin) r = {false, false, m, i, j};
    }
    rows[i] = r;
  });
  AcausalityCertificate out;
  out.min_margin = 1e300;
  for (const auto& r : rows)
    if (r.min_margin < out.min_margin) out = r;
  out.acausal = n >= 2 && out.min_margin > 0;
  out.achronal = n >= 2 && out.min_margin >= 0;
  return out;
}

// Picks x4 = 1 when every sample clears the margin, otherwise tries the
// seeded isometries in order.
inline AffineChart select_chart(const std::vector<Vec22>& reps) {
  const auto candidates = detail::chart_candidates();
  for (std::size_t a = 0; a < candidates.size(); ++a) {
    double margin = 1e300;
    for (const auto& r : reps) {
      const Vec22 y = candidates[a](r);
      margin = std::min(margin, std::abs(y[3]) / y.norm());
    }
    if (margin >= kPolicy.chart_margin) return {3, candidates[a], static_cast<int>(a), margin};
  }
  fail(ErrorKind::kChartFailure, "no affine chart clears the validity margin");
}

namespace detail {

inline QuasiCircle finish_curve(QuasiCircle c) {
  c.samples.reserve(c.alpha.size());
  c.reps.reserve(c.alpha.size());
  for (std::size_t i = 0; i < c.alpha.size(); ++i) {
    c.samples.push_back(c.placement(BoundaryPoint{RP1::from_angle(c.alpha[i]), RP1::from_angle(c.beta[i])}));
    c.reps.push_back(c.placement(null_rep(c.alpha[i], c.beta[i])));
  }
  c.chart = select_chart(c.reps);
  return c;
}

}  // namespace detail

// n samples of the graph {(theta, f(theta))}, equally spaced in the diagonal
// parameter (theta + f(theta)) / 2 so that steep and flat parts of f are both
// resolved. `placement` moves the curve by an isometry.
inline QuasiCircle graph_curve(const CircleMap& f, std::size_t n, const Isometry& placement = {}) {
  if (n < 64) fail(ErrorKind::kInvalidInput, "graph_curve needs at least 64 samples");
  QuasiCircle c;
  c.map = f;
  c.placement = placement;
  c.alpha.resize(n);
  c.beta.resize(n);
  const double base = 0.5 * f(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double sigma = base + kTwoPi * static_cast<double>(i) / static_cast<double>(n);
    // Solve alpha + F(alpha) = 2 sigma; the left side is increasing.
    double lo = sigma - kTwoPi, hi = sigma + kTwoPi;
    while (lo + f(lo) > 2 * sigma) lo -= kTwoPi;
    while (hi + f(hi) < 2 * sigma) hi += kTwoPi;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(sigma)); ++it) {
      const double mid = 0.5 * (lo + hi);
      (mid + f(mid) < 2 * sigma ? lo : hi) = mid;
    }
    c.alpha[i] = 0.5 * (lo + hi);
    c.beta[i] = f(c.alpha[i]);
  }
  c.certificate = acausality_check(c);
  if (!c.certificate.acausal) fail(ErrorKind::kNotAcausal, "sampled graph is not acausal");
  return detail::finish_curve(std::move(c));
}

// Curve moved by an isometry, re-sampled from the same map and re-charted.
inline QuasiCircle transformed(const QuasiCircle& c, const Isometry& g) {
  QuasiCircle out;
  out.alpha = c.alpha;
  out.beta = c.beta;
  out.map = c.map;
  out.placement = g * c.placement;
  out.certificate = c.certificate;
  out.permissive = c.permissive;
  return detail::finish_curve(std::move(out));
}

// Chart vertices of the rhombus: (+-sqrt2, 0, -1), (0, +-sqrt2, 1).
inline std::array<Vec3, 4> rhombus_vertices() {
  const double s = std::sqrt(2.0);
  return {Vec3(0, s, 1), Vec3(s, 0, -1), Vec3(0, -s, 1), Vec3(-s, 0, -1)};
}

// The piecewise-lightlike quadrilateral through the rhombus vertices. Its
// edges alternate between the two rulings; n samples are equally spaced in
// (alpha + beta) / 2, which is linear along each edge.
inline QuasiCircle rhombus(std::size_t n = 2048) {
  if (n < 64) fail(ErrorKind::kInvalidInput, "rhombus needs at least 64 samples");
  QuasiCircle c;
  c.permissive = true;
  c.alpha.resize(n);
  c.beta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double sigma = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
    const int edge = std::min(3, static_cast<int>(std::floor(sigma / (kPi / 2))));
    const double corner = kPi / 4 + edge * (kPi / 2);  // fixed coordinate on this edge
    if (edge % 2 == 0) {
      c.alpha[i] = corner;
      c.beta[i] = 2 * sigma - corner;
    } else {
      c.beta[i] = corner;
      c.alpha[i] = 2 * sigma - corner;
    }
  }
  c.certificate = acausality_check(c);
  if (!c.certificate.achronal) fail(ErrorKind::kNotAcausal, "rhombus samples are not achronal");
  return detail::finish_curve(std::move(c));
}

struct ConvexHull3 {
  Hull3 mesh;                      // chart coordinates
  std::vector<std::size_t> future, past;  // face indices into mesh.faces
  bool degenerate = false;
  double planarity_residual = 0.0;
  AffineChart chart;
};

// Causal type of the plane through a face: normal (a, b, c) with offset d in
// the chart corresponds to the R^{2,2} normal (a, b, -c, d).
inline CausalClass face_type(const HullFace& f) {
  return plane_type(Vec22(f.normal.x(), f.normal.y(), -f.normal.z(), f.offset));
}

// Hull of the chart image. Moving to the future decreases the chart
// coordinate y3/y4, so a face whose outward normal points down is future.
inline ConvexHull3 convex_hull(const QuasiCircle& c) {
  ConvexHull3 h;
  h.chart = c.chart;
  h.mesh = convex_hull(c.chart_points(), 1e-12, kPolicy.planarity);
  h.degenerate = h.mesh.planar;
  h.planarity_residual = h.mesh.planarity_residual;
  if (h.degenerate) return h;
  for (std::size_t i = 0; i < h.mesh.faces.size(); ++i)
    (h.mesh.faces[i].normal.z() < 0 ? h.future : h.past).push_back(i);
  return h;
}

struct WidthResult {
  double width = 0.0;
  Vec22 p = Vec22::Zero(), q = Vec22::Zero();  // on the past / future boundary, q22 = -1
  std::size_t samples = 0, past_faces = 0, future_faces = 0;
  bool degenerate = false;
};

namespace detail {

// |<p, q>| for unit timelike lifts of two chart points, or +inf when either
// point is not clearly timelike. Near the ideal curve the normalization is
// 0/0, so points within 1e-9 of the null quadric are excluded.
inline double chart_pairing(const Vec3& a, const Vec3& b) {
  const double qa = a.squaredNorm() - 2 * a.z() * a.z() - 1;  // q22(a1, a2, a3, 1)
  const double qb = b.squaredNorm() - 2 * b.z() * b.z() - 1;
  if (!(qa < -1e-9 * (1 + a.squaredNorm())) || !(qb < -1e-9 * (1 + b.squaredNorm()))) return 1e300;
  const double ab = a.x() * b.x() + a.y() * b.y() - a.z() * b.z() - 1;
  return std::abs(ab) / std::sqrt(qa * qb);
}

struct FacePoint {
  const HullFace* face;
  std::array<double, 3> w;  // barycentric weights
};

inline Vec3 face_point(const Hull3& m, const FacePoint& p) {
  return p.w[0] * m.points[p.face->v[0]] + p.w[1] * m.points[p.face->v[1]] + p.w[2] * m.points[p.face->v[2]];
}

// Moves along the three edge directions of the barycentric simplex with a
// golden-section search on each, keeping the weights nonnegative.
inline double ascend(const Hull3& m, FacePoint& p, FacePoint& q, int rounds = 50) {
  auto value = [&] { return chart_pairing(face_point(m, p), face_point(m, q)); };
  double best = value();
  constexpr double kGolden = 0.6180339887498949;
  for (int round = 0; round < rounds; ++round) {
    const double start = best;
    for (FacePoint* x : {&p, &q}) {
      for (int d = 0; d < 3; ++d) {
        const int i = d, j = (d + 1) % 3;  // w_i += s, w_j -= s
        const std::array<double, 3> w0 = x->w;
        double lo = -w0[i], hi = w0[j];
        if (hi - lo < 1e-15) continue;
        auto at = [&](double s) {
          x->w = w0;
          x->w[i] += s;
          x->w[j] -= s;
          return value();
        };
        double a = hi - kGolden * (hi - lo), b = lo + kGolden * (hi - lo);
        double fa = at(a), fb = at(b);
        for (int it = 0; it < 40; ++it) {
          if (fa <= fb) {
            hi = b, b = a, fb = fa;
            a = hi - kGolden * (hi - lo);
            fa = at(a);
          } else {
            lo = a, a = b, fa = fb;
            b = lo + kGolden * (hi - lo);
            fb = at(b);
          }
        }
        // Compare the interior optimum with both endpoints of the segment.
        const double cands[] = {0.5 * (lo + hi), -w0[i], w0[j], 0.0};
        double pick = 0.0, pick_v = best;
        for (double s : cands) {
          const double v = at(s);
          if (v < pick_v) pick_v = v, pick = s;
        }
        at(pick);
        best = pick_v;
      }
    }
    if (start - best <= 1e-16) break;
  }
  return best;
}

}  // namespace detail

// Sup of the time distance between the past and future hull boundaries:
// a coarse pass over a few points per face, then coordinate ascent on the
// best candidate face pairs over the closed faces.
inline WidthResult width(const QuasiCircle& c, const ConvexHull3& h, std::size_t candidates = 16) {
  WidthResult r;
  r.samples = c.size();
  r.degenerate = h.degenerate;
  if (h.degenerate) {
    // Coincident boundaries: report the disc center for both points.
    Vec3 center = Vec3::Zero();
    for (const auto& p : h.mesh.points) center += p;
    center /= static_cast<double>(h.mesh.points.size());
    const Vec22 lift = h.chart.lift(center);
    r.p = r.q = lift / std::sqrt(std::max(-q22(lift), 1e-300));
    return r;
  }
  r.past_faces = h.past.size();
  r.future_faces = h.future.size();
  const Hull3& m = h.mesh;
  // Coarse sample points: the barycentric grid of step 1/3 minus the corners,
  // which lie on the ideal curve.
  struct Site {
    std::size_t face;  // index into h.past / h.future
    std::array<double, 3> w;
    Vec3 x;
  };
  auto sites = [&](const std::vector<std::size_t>& faces) {
    std::vector<Site> out;
    for (std::size_t k = 0; k < faces.size(); ++k)
      for (int i = 0; i <= 3; ++i)
        for (int j = 0; i + j <= 3; ++j) {
          if (i == 3 || j == 3 || i + j == 0) continue;
          const std::array<double, 3> w{i / 3.0, j / 3.0, (3 - i - j) / 3.0};
          out.push_back({k, w, detail::face_point(m, {&m.faces[faces[k]], w})});
        }
    return out;
  };
  const std::vector<Site> past_s = sites(h.past), future_s = sites(h.future);

  struct Cand {
    double value;
    std::size_t a, b;  // site indices
  };
  std::vector<Cand> rows(past_s.size(), Cand{1e300, 0, 0});
  parallel_for(past_s.size(), [&](std::size_t a) {
    for (std::size_t b = 0; b < future_s.size(); ++b) {
      const double v = detail::chart_pairing(past_s[a].x, future_s[b].x);
      if (v < rows[a].value) rows[a] = {v, a, b};
    }
  });
  std::sort(rows.begin(), rows.end(), [](const Cand& x, const Cand& y) {
    return x.value != y.value ? x.value < y.value : x.a < y.a;
  });
  // Best pairs with distinct face pairs.
  std::vector<Cand> all;
  std::vector<std::pair<std::size_t, std::size_t>> used;
  for (const auto& c : rows) {
    if (all.size() >= std::max<std::size_t>(1, candidates) || !(c.value <= 1.0)) break;
    const std::pair<std::size_t, std::size_t> key{past_s[c.a].face, future_s[c.b].face};
    if (std::find(used.begin(), used.end(), key) != used.end()) continue;
    used.push_back(key);
    all.push_back(c);
  }
  if (all.empty()) fail(ErrorKind::kNumericalDegeneracy, "no timelike-related boundary pairs");

  std::vector<std::pair<double, std::pair<detail::FacePoint, detail::FacePoint>>> refined(all.size());
  parallel_for(all.size(), [&](std::size_t k) {
    const Site& sp = past_s[all[k].a];
    const Site& sq = future_s[all[k].b];
    detail::FacePoint p{&m.faces[h.past[sp.face]], sp.w};
    detail::FacePoint q{&m.faces[h.future[sq.face]], sq.w};
    const double v = detail::ascend(m, p, q);
    refined[k] = {v, {p, q}};
  });
  std::size_t best = 0;
  for (std::size_t k = 1; k < refined.size(); ++k)
    if (refined[k].first < refined[best].first) best = k;

  // Hill climb over face pairs: retry the ascent on faces sharing a vertex
  // with the current optimum until nothing improves.
  auto neighbors = [&](const std::vector<std::size_t>& faces) {
    std::unordered_map<int, std::vector<const HullFace*>> by_vertex;
    for (auto f : faces)
      for (int v : m.faces[f].v) by_vertex[v].push_back(&m.faces[f]);
    return by_vertex;
  };
  const auto past_n = neighbors(h.past), future_n = neighbors(h.future);
  auto around = [](const auto& table, const HullFace* f) {
    std::vector<const HullFace*> out{f};
    for (int v : f->v)
      for (const HullFace* g : table.at(v))
        if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(g);
    return out;
  };
  auto [value, pair] = refined[best];
  std::set<std::pair<const HullFace*, const HullFace*>> tried;
  for (int pass = 0; pass < 100; ++pass) {
    const auto ps = around(past_n, pair.first.face), qs = around(future_n, pair.second.face);
    std::vector<std::pair<const HullFace*, const HullFace*>> todo;
    for (auto* fp : ps)
      for (auto* fq : qs)
        if (tried.insert({fp, fq}).second) todo.emplace_back(fp, fq);
    std::vector<std::pair<double, std::pair<detail::FacePoint, detail::FacePoint>>> out(todo.size());
    parallel_for(todo.size(), [&](std::size_t k) {
      detail::FacePoint p{todo[k].first, {1.0 / 3, 1.0 / 3, 1.0 / 3}};
      detail::FacePoint q{todo[k].second, {1.0 / 3, 1.0 / 3, 1.0 / 3}};
      out[k] = {detail::ascend(m, p, q), {p, q}};
    });
    bool improved = false;
    for (const auto& o : out)
      if (o.first < value - 1e-15) value = o.first, pair = o.second, improved = true;
    if (!improved) break;
  }
  const double v = value;
  const auto& pq = pair;
  r.width = std::acos(std::min(1.0, v));
  const Vec22 lp = h.chart.lift(detail::face_point(m, pq.first));
  const Vec22 lq = h.chart.lift(detail::face_point(m, pq.second));
  r.p = lp / std::sqrt(-q22(lp));
  r.q = lq / std::sqrt(-q22(lq));
  return r;
}

inline WidthResult width(const QuasiCircle& c) { return width(c, convex_hull(c)); }

struct CriterionReport {
  double width = 0.0;
  double qs_constant = 1.0;  // +inf when the curve has no underlying map
  bool quasicircle_by_width = true;
  bool quasisymmetric = true;
  bool consistent = true;
};

// Width below pi/2 - margin should agree with a finite quasi-symmetry
// constant (proxied by k < cap).
inline CriterionReport quasicircle_criterion(const QuasiCircle& c, double margin = 1e-3, double cap = 1e6,
                                             const QsGrid& grid = {}) {
  CriterionReport r;
  r.width = width(c).width;
  r.qs_constant = c.map ? qs_constant(*c.map, grid).k : std::numeric_limits<double>::infinity();
  r.quasicircle_by_width = r.width < kPi / 2 - margin;
  r.quasisymmetric = r.qs_constant < cap;
  r.consistent = r.quasicircle_by_width == r.quasisymmetric;
  return r;
}

// Sampled test for p in D(C): the dual plane of p must not separate the
// curve, i.e. <p, c_i> has one strict sign over the chart representatives.
inline bool domain_of_dependence_certificate(const QuasiCircle& c, const ADSPoint& p) {
  int sign = 0;
  for (const auto& r : c.reps) {
    const Vec22 y = c.chart.transform(r);
    const double s = bilinear(c.chart.transform(p.rep()), y / y[3]);
    if (std::abs(s) <= 1e-12) return false;
    const int sg = s > 0 ? 1 : -1;
    if (sign == 0) sign = sg;
    if (sg != sign) return false;
  }
  return true;
}

// Plain OFF mesh of the hull in chart coordinates (no mesh for planar hulls).
inline void write_off(std::ostream& out, const ConvexHull3& h) {
  out << "OFF\n" << h.mesh.points.size() << ' ' << h.mesh.faces.size() << " 0\n";
  out << std::setprecision(17);
  for (const auto& p : h.mesh.points) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  for (const auto& f : h.mesh.faces) out << "3 " << f.v[0] << ' ' << f.v[1] << ' ' << f.v[2] << '\n';
}

inline nlohmann::ordered_json hull_json(const ConvexHull3& h, const WidthResult& w) {
  nlohmann::ordered_json j;
  j["future_faces"] = h.future;
  j["past_faces"] = h.past;
  j["width"] = w.width;
  auto vec = [](const Vec22& x) { return std::vector<double>{x[0], x[1], x[2], x[3]}; };
  j["pair"] = {vec(w.p), vec(w.q)};
  j["degenerate"] = h.degenerate;
  return j;
}

}  // namespace adslab
