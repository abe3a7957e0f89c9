// Acceptance run: one PASS/FAIL line per criterion, with its measured values
// and wall time against the time budget.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "adslab/experiments.hpp"
#include "radial_oracle.hpp"

using namespace adslab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double budget_s;
  std::function<Outcome()> run;
};

std::string sci(double v) {
  std::ostringstream o;
  o.precision(3);
  o << std::scientific << v;
  return o.str();
}

std::string fix(double v, int digits = 6) {
  std::ostringstream o;
  o.precision(digits);
  o << std::fixed << v;
  return o.str();
}

// Circle distance on angles, in [0, pi].
double circle_gap(double a, double b) {
  const double d = std::fmod(std::abs(a - b), 2 * M_PI);
  return std::min(d, 2 * M_PI - d);
}

Mat2 test_sl2(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 0.35);
  for (;;) {
    Mat2 m{1 + n(rng), n(rng), n(rng), 1 + n(rng)};
    const double det = m.a * m.d - m.b * m.c;
    if (det > 0.2) return Mat2{m.a / std::sqrt(det), m.b / std::sqrt(det), m.c / std::sqrt(det), m.d / std::sqrt(det)};
  }
}

// 1. -det(to_matrix(x)) = q22(x), with both sides written out by hand.
Outcome model_isometry() {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec22 x(n(rng), n(rng), n(rng), n(rng));
    const Mat2 m = to_matrix(x);
    const double q = x[0] * x[0] + x[1] * x[1] - x[2] * x[2] - x[3] * x[3];
    worst = std::max(worst, std::abs(-(m.a * m.d - m.b * m.c) - q));
  }
  return {worst <= 1e-12, "max error " + sci(worst) + " <= 1e-12 over 1e4 vectors"};
}

// 2. cr(0, 1, -1, inf) = -1 exactly; Moebius invariance over 1e4 trials.
Outcome cross_ratio_checks() {
  const double cr = cross_ratio(RP1::from_affine(0), RP1::from_affine(1), RP1::from_affine(-1), RP1::infinity());
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 2 * M_PI);
  double worst = 0;
  int used = 0;
  while (used < 10000) {
    const Mobius g(test_sl2(rng));
    std::array<RP1, 4> q;
    for (auto& p : q) p = RP1::from_angle(u(rng));
    bool separated = true;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) separated = separated && chordal_distance(q[a], q[b]) > 0.05;
    if (!separated) continue;
    ++used;
    const double before = cross_ratio(q[0], q[1], q[2], q[3]);
    const double after = cross_ratio(g(q[0]), g(q[1]), g(q[2]), g(q[3]));
    worst = std::max(worst, std::abs(after - before) / std::max(1.0, std::abs(before)));
  }
  return {cr == -1.0 && worst <= 1e-10,
          "cr(0,1,-1,inf) = " + fix(cr, 17) + ", invariance " + sci(worst) + " <= 1e-10"};
}

// 3. Graphs of Moebius maps bound totally geodesic planes: zero width.
Outcome fuchsian_width() {
  const double w_id = width(graph_curve(CircleMap(), 512)).width;
  std::mt19937_64 rng(3);
  const double w_mob = width(graph_curve(CircleMap::from_mobius(Mobius(test_sl2(rng))), 512)).width;
  return {std::abs(w_id) <= 1e-9 && std::abs(w_mob) <= 1e-9,
          "width(id) = " + sci(w_id) + ", width(mobius) = " + sci(w_mob) + " (tol 1e-9, n = 512)"};
}

// 4. The rhombus has width pi/2.
Outcome rhombus_width() {
  const double w = width(rhombus(2048)).width;
  return {std::abs(w - M_PI / 2) <= 1e-3, "width = " + fix(w, 9) + ", |w - pi/2| = " + sci(std::abs(w - M_PI / 2)) +
                                              " <= 1e-3 (n = 2048)"};
}

// 5. Widths and quasi-symmetry constants along f_s, s in {2, 8, 32}.
Outcome width_qs_consistency() {
  std::vector<double> w, k;
  for (double s : {2.0, 8.0, 32.0}) {
    const CircleMap f = CircleMap::from_affine([s](double x) { return x >= 0 ? x : s * x; });
    w.push_back(width(graph_curve(f, 1024)).width);
    k.push_back(qs_constant(f).k);
  }
  bool ok = true;
  for (std::size_t i = 0; i < w.size(); ++i) {
    ok = ok && w[i] < M_PI / 2 - 1e-3;
    if (i > 0) ok = ok && w[i] > w[i - 1] && k[i] > k[i - 1];
  }
  return {ok, "widths " + fix(w[0], 4) + " < " + fix(w[1], 4) + " < " + fix(w[2], 4) + " < pi/2 - 1e-3, k " +
                  fix(k[0], 3) + " < " + fix(k[1], 3) + " < " + fix(k[2], 3)};
}

// Max relative deviation of the finite-difference pullback of the hyperbolic
// metric by Pi_l (or Pi_r) from the Poincare metric of the parameter disc.
double pullback_vs_poincare(const SpacelikeChart& s, double h, bool left) {
  const std::vector<Vec2d> pts{{0, 0}, {0.25, 0.1}, {-0.4, 0.3}, {0.5, -0.5}, {0.1, 0.7}};
  double worst = 0;
  for (const Vec2d& y : pts) {
    auto z = [&](const Vec2d& p) {
      const auto pr = left_right_projection(s, p);
      return left ? pr.first : pr.second;
    };
    const Complex z0 = z(y);
    const Complex dx = (z(y + Vec2d(h, 0)) - z(y - Vec2d(h, 0))) / (2 * h);
    const Complex dy = (z(y + Vec2d(0, h)) - z(y - Vec2d(0, h))) / (2 * h);
    const double w = 1 / (z0.imag() * z0.imag());
    const double g11 = std::norm(dx) * w, g22 = std::norm(dy) * w, g12 = std::real(dx * std::conj(dy)) * w;
    const double conf = 4 / std::pow(1 - y.squaredNorm(), 2);
    const double err = std::sqrt(std::pow(g11 - conf, 2) + std::pow(g22 - conf, 2) + 2 * g12 * g12);
    worst = std::max(worst, err / (std::sqrt(2.0) * conf));
  }
  return worst;
}

// 6. Pullback formula at order 2 and the Fuchsian identity on equidistant surfaces.
Outcome pullback_order() {
  bool ok = true;
  std::string detail;
  for (double t : {0.0, M_PI / 6, M_PI / 4}) {
    const SpacelikeChart s = equidistant_surface(t);
    SpacelikeChart a = s, b = s;
    a.h = 1.0 / 32;
    b.h = 1.0 / 64;
    const std::vector<Vec2d> pts{{0, 0}, {0.25, 0.1}, {-0.4, 0.3}, {0.5, -0.5}, {0.1, 0.7}};
    const PullbackReport ra = pullback_check(a, pts), rb = pullback_check(b, pts);
    const double ol = std::log2(ra.left / rb.left), orr = std::log2(ra.right / rb.right);
    const double pl = std::log2(pullback_vs_poincare(s, 1.0 / 32, true) / pullback_vs_poincare(s, 1.0 / 64, true));
    const double pr = std::log2(pullback_vs_poincare(s, 1.0 / 32, false) / pullback_vs_poincare(s, 1.0 / 64, false));
    for (double o : {ol, orr, pl, pr}) ok = ok && std::abs(o - 2.0) <= 0.2;
    detail += (detail.empty() ? "" : "; ") + std::string("t=") + fix(t, 3) + " orders " + fix(ol, 2) + "/" +
              fix(orr, 2) + ", vs h_H2 " + fix(pl, 2) + "/" + fix(pr, 2);
  }
  return {ok, detail + " (2 +- 0.2)"};
}

// 7. Gauss relation at O(h^2) and positive principal curvature product on
// convex fixtures. For equidistant fixtures k1 k2 = tan^2 t in closed form.
Outcome gauss_convexity() {
  std::mt19937_64 rng(7);
  const Mat2 a = test_sl2(rng), b = test_sl2(rng);
  struct Fixture {
    SpacelikeChart chart;
    double product;  // closed form, or NaN
  };
  const std::vector<Fixture> fixtures{
      {equidistant_surface(M_PI / 6, 0.6), std::pow(std::tan(M_PI / 6), 2)},
      {equidistant_surface(M_PI / 4, 0.6), 1.0},
      {isometry_image(equidistant_surface(M_PI / 6, 0.6), Isometry(a, b)), std::pow(std::tan(M_PI / 6), 2)},
      {graph_surface(Expression("0.5 + 0.1 * (x^2 + y^2)"), 0.6), std::nan("")}};
  bool ok = true;
  double worst_c = 0, min_product = 1e300, closed = 0;
  for (const auto& f : fixtures) {
    std::vector<double> c;
    for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
      SpacelikeChart s = f.chart;
      s.h = h;
      for (const Vec2d& y : s.nodes()) {
        const NodeForms forms = fundamental_forms(s, y);
        const double K = intrinsic_curvature(s, y);
        min_product = std::min(min_product, forms.k1 * forms.k2);
        ok = ok && -1 - K > 0;
        if (h == 1.0 / 64 && !std::isnan(f.product))
          closed = std::max(closed, std::abs(forms.k1 * forms.k2 - f.product));
      }
      c.push_back(gauss_check(s).max_residual / (h * h));
    }
    // C h^2: the constant seen on finer grids must not grow past the coarse one.
    ok = ok && std::max(c[1], c[2]) <= 1.5 * c[0];
    worst_c = std::max(worst_c, c[2]);
  }
  ok = ok && min_product > 0 && closed <= 1e-8;
  return {ok, "C = max |K_I + 1 + det B| / h^2 = " + fix(worst_c, 3) + " (bounded under refinement), min k1 k2 = " +
                  fix(min_product, 4) + " > 0, |k1 k2 - tan^2 t| = " + sci(closed)};
}

// 8. Gluing map of (S_t, S_-t) is the identity, isometry invariant; D = sqrt 3.
Outcome gluing_identity() {
  const double t = M_PI / 6;
  auto glue = [&](const SpacelikeChart& f, const SpacelikeChart& p) { return gluing_map(make_gh_convex_subset(f, p)); };
  const GHConvexSubset omega = make_gh_convex_subset(equidistant_surface(t), equidistant_surface(-t));
  const GluingMap base = gluing_map(omega);
  double deviation = 0;
  for (int i = 0; i < 1024; ++i) {
    const double x = 2 * M_PI * (i + 0.5) / 1024;
    deviation = std::max(deviation, circle_gap(base.map(x), x));
  }
  std::mt19937_64 rng(8);
  double invariance = 0;
  for (int k = 0; k < 10; ++k) {
    const Isometry g(test_sl2(rng), test_sl2(rng));
    const GluingMap m = glue(isometry_image(equidistant_surface(t), g), isometry_image(equidistant_surface(-t), g));
    for (int i = 0; i < 512; ++i) {
      const double x = 2 * M_PI * i / 512.0;
      invariance = std::max(invariance, circle_gap(m.map(x), base.map(x)));
    }
  }
  const double D = principal_curvature_bounds(omega).D;
  return {deviation <= 1e-4 && invariance <= 1e-4 && std::abs(D - std::sqrt(3.0)) <= 1e-8,
          "sup |Phi - id| = " + sci(deviation) + ", isometry spread " + sci(invariance) + " (<= 1e-4), |D - sqrt3| = " +
              sci(std::abs(D - std::sqrt(3.0))) + " <= 1e-8"};
}

double radial_k(double d) { return -1.0 - std::exp(-d * d); }

double radial_error(int n) {
  LiouvilleConfig cfg;
  cfg.grid = n;
  const CurvatureField K{[](Complex z) { return radial_k(2 * std::atanh(std::abs(z))); }, 0.1, {}, "radial"};
  const ConformalFactor f = solve_liouville(K, cfg);
  const DiscGrid& g = f.u.grid;
  const double R = 2 * std::atanh(g.r_max);
  const ShootingOracle oracle(radial_k, R, -0.5 * std::log(-radial_k(R)));
  std::vector<double> d, u;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      if (g.inside(i, j)) {
        d.push_back(std::min(R, 2 * std::atanh(std::abs(g.z(i, j)))));
        u.push_back(f.u(i, j));
      }
  const auto ref = oracle.values(d);
  double err = 0, scale = 0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    err = std::max(err, std::abs(u[k] - ref[k]));
    scale = std::max(scale, std::abs(ref[k]));
  }
  return err / scale;
}

// 9. Liouville solver: exact constant case, ODE oracle and order 2.
Outcome liouville() {
  LiouvilleConfig cfg;
  const ConformalFactor c = solve_liouville(constant_curvature(-4.0, 0.2), cfg);
  double sup = 0;
  const DiscGrid& g = c.u.grid;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      if (g.inside(i, j)) sup = std::max(sup, std::abs(c.u(i, j) + std::log(2.0)));
  const double e1 = radial_error(129), e2 = radial_error(257);
  const double order = std::log2(e1 / e2);
  return {sup <= 1e-10 && e2 <= 1e-4 && std::abs(order - 2) <= 0.2,
          "sup |u + ln 2| = " + sci(sup) + " <= 1e-10, oracle rel. error " + sci(e2) + " <= 1e-4 at 257, order " +
              fix(order, 3) + " (2 +- 0.2)"};
}

// 10. Blend construction and reflection invariance.
Outcome blend() {
  const double eps = 1.0 / 3;
  const Complex center(0.3, 0.1);
  const CurvatureField K{[center](Complex z) {
                           const double d = disc_distance(z, center);
                           return -3.0 + 0.8 * std::exp(-d * d);
                         },
                         eps, {}, "gaussian"};
  bool ok = true;
  std::vector<std::vector<DerivativeBound>> runs;
  double lo_K = 1e300, hi_K = -1e300;
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> ang(0, 2 * M_PI), frac(0, 1);
  for (double rn : {2.0, 4.0, 8.0}) {
    const CurvatureField B = blend_curvature(K, {rn, eps});
    for (int i = 0; i < 200; ++i) {
      const Complex inner = std::polar(std::tanh(0.5 * rn * frac(rng)), ang(rng));
      const Complex outer = std::polar(std::tanh(0.5 * (2 * rn * (1 + frac(rng)))), ang(rng));
      ok = ok && B(inner) == K(inner) && B(outer) == -1.0 / eps;
    }
    const RangeAudit a = audit_range(B, 2 * rn + 1);
    lo_K = std::min(lo_K, a.min);
    hi_K = std::max(hi_K, a.max);
    runs.push_back(derivative_bounds_check(B, hyperbolic_polar_points(2 * rn + 0.5, 0.05, 256)));
  }
  ok = ok && lo_K >= -1.0 / eps - 1e-12 && hi_K <= -1.0 - eps;
  double spread = 0;
  for (int p = 0; p <= 3; ++p) {
    double lo = 1e300, hi = 0;
    for (const auto& r : runs) {
      lo = std::min(lo, r[p].sup);
      hi = std::max(hi, r[p].sup);
    }
    spread = std::max(spread, hi / lo - 1);
  }
  ok = ok && spread <= 0.1;

  const CurvatureField small = blend_curvature(K, {0.7, eps});
  const FuchsianInvariantField R = reflect_invariant(small, octagon_group());
  std::uniform_real_distribution<double> rad(0.0, 0.97);
  std::vector<Complex> pts(1000);
  for (auto& z : pts) z = std::polar(rad(rng), ang(rng));
  double inv = 0;
  for (const auto& z : pts)
    for (const auto& g : R.group.letters()) inv = std::max(inv, std::abs(R(apply_disc(g, z)) - R(z)));
  ok = ok && inv <= 1e-10;
  return {ok, "range [" + fix(lo_K, 4) + ", " + fix(hi_K, 4) + "] in [-3, -4/3], bound spread " + sci(spread) +
                  " <= 0.1, reflection residual " + sci(inv) + " <= 1e-10"};
}

// 11. Equivariant map of a conjugate pair recovers the conjugator.
Outcome equivariant() {
  const Mat2 m{1.2, 0.3, -0.4, 0.9};
  const double s = 1 / std::sqrt(m.a * m.d - m.b * m.c);
  const Mobius conj(s * m.a, s * m.b, s * m.c, s * m.d);
  auto image = [&](double a) {
    const double x = std::sin(a / 2), y = std::cos(a / 2);
    return 2 * std::atan2(m.a * x + m.b * y, m.c * x + m.d * y);
  };
  const FuchsianGroup r1 = cone_torus_group(3, 3);
  const FuchsianGroup r2 = r1.conjugate(conj);
  const EquivariantMap e = equivariant_qs_map(r1, r2, 10);
  double err = 0;
  for (int i = 0; i < 20000; ++i) {
    const double a = 2 * M_PI * (i + 0.37) / 20000;
    err = std::max(err, circle_gap(e.map(a), image(a)));
  }
  std::vector<double> res;
  for (int L : {6, 8, 10, 12}) res.push_back(equivariant_qs_map(r1, r2, L).residual);
  const bool decreasing = res[1] < res[0] && res[2] < res[1] && res[3] < res[2];
  return {err <= 1e-6 && decreasing, "sup error " + sci(err) + " <= 1e-6 at length 10, residuals " + sci(res[0]) +
                                         " > " + sci(res[1]) + " > " + sci(res[2]) + " > " + sci(res[3])};
}

// 12. Two pipeline runs give byte-identical reports.
Outcome determinism() {
  std::ifstream in(ADSLAB_SOURCE_DIR "/configs/pipeline.json");
  RunContext ctx;
  ctx.config = nlohmann::json::parse(in);
  const nlohmann::ordered_json echo = nlohmann::ordered_json::parse(ctx.config.dump());
  const RunReport a = cmd_pipeline(ctx);
  const RunReport b = cmd_pipeline(ctx);
  const std::string ja = a.to_json(echo).dump(2), jb = b.to_json(echo).dump(2);
  return {ja == jb && a.exit_code() == 0,
          std::string(ja == jb ? "identical" : "different") + " reports (" + std::to_string(ja.size()) +
              " bytes), pipeline exit code " + std::to_string(a.exit_code()) + ", " +
              std::to_string(a.checks().size()) + " checks"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "model isometry", 1, model_isometry},
      {2, "cross-ratio normal form and invariance", 1, cross_ratio_checks},
      {3, "Fuchsian degeneracy", 10, fuchsian_width},
      {4, "rhombus width", 60, rhombus_width},
      {5, "width-quasisymmetry consistency", 300, width_qs_consistency},
      {6, "pullback formula", 120, pullback_order},
      {7, "Gauss relation and convexity", 60, gauss_convexity},
      {8, "gluing map identity", 180, gluing_identity},
      {9, "Liouville solver", 180, liouville},
      {10, "blend construction", 120, blend},
      {11, "equivariant map", 120, equivariant},
      {12, "determinism", 600, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.pass && secs <= c.budget_s;
    failed += pass ? 0 : 1;
    std::printf("%s [%2d] %s: %s (%.2f s, budget %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.title.c_str(),
                o.detail.c_str(), secs, c.budget_s);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
