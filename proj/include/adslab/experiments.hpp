#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "adslab/gluing.hpp"
#include "adslab/liouville.hpp"
#include "adslab/quasicircle.hpp"
#include "adslab/quasisymmetry.hpp"
#include "adslab/radial_reference.hpp"
#include "adslab/report.hpp"

namespace adslab {

// Command options shared by every experiment. Config keys override defaults;
// the CLI flags override config keys.
struct RunContext {
  nlohmann::json config = nlohmann::json::object();
  std::optional<std::filesystem::path> out;

  std::uint64_t seed() const { return get_or<std::uint64_t>(config, "seed", 7); }
};

// "kind:key=value:key=value". A value that is not a number is evaluated as an
// expression, so "t=pi/6" works. A trailing "base=..." swallows the rest.
struct Selector {
  std::string kind;
  std::map<std::string, std::string> params;

  static Selector parse(const std::string& text) {
    Selector s;
    std::size_t pos = text.find(':');
    s.kind = text.substr(0, pos);
    while (pos != std::string::npos) {
      const std::size_t next = text.find(':', pos + 1);
      const std::string tok = text.substr(pos + 1, next == std::string::npos ? std::string::npos : next - pos - 1);
      const std::size_t eq = tok.find('=');
      if (eq == std::string::npos || eq == 0) fail(ErrorKind::kInvalidInput, "selector '" + text + "': bad token '" + tok + "'");
      const std::string key = tok.substr(0, eq);
      if (key == "base" || key == "path") {
        s.params[key] = text.substr(pos + 1 + eq + 1);
        break;
      }
      s.params[key] = tok.substr(eq + 1);
      pos = next;
    }
    if (s.kind.empty()) fail(ErrorKind::kInvalidInput, "empty selector");
    return s;
  }

  bool has(const std::string& key) const { return params.count(key) > 0; }

  double number(const std::string& key, std::optional<double> fallback = {}) const {
    const auto it = params.find(key);
    if (it == params.end()) {
      if (fallback) return *fallback;
      fail(ErrorKind::kInvalidInput, "selector '" + kind + "' needs '" + key + "'");
    }
    try {
      return Expression(it->second)(0.0, 0.0);
    } catch (const Error&) {
      fail(ErrorKind::kInvalidInput, "selector '" + kind + "': cannot read " + key + "=" + it->second);
    }
  }
};

// x for x >= 0, s x for x < 0 on the affine line.
inline CircleMap piecewise_map(double s) {
  if (!(s > 0)) fail(ErrorKind::kInvalidInput, "piecewise slope must be positive");
  return CircleMap::from_affine([s](double x) { return x >= 0 ? x : s * x; });
}

// Perturbation of the identity, rescaled to determinant 1. Nearly singular
// draws are redrawn so the map stays well conditioned.
inline Mat2 random_sl2(std::mt19937_64& rng, double spread = 0.4) {
  std::normal_distribution<double> g(0.0, spread);
  for (;;) {
    Mat2 m{1 + g(rng), g(rng), g(rng), 1 + g(rng)};
    if (m.det() < 0) m = Mat2{m.b, m.a, m.d, m.c};
    if (m.det() > 0.1) return (1.0 / std::sqrt(m.det())) * m;
  }
}

inline Isometry random_isometry(std::mt19937_64& rng) {
  const Mat2 a = random_sl2(rng);
  return Isometry(a, random_sl2(rng));
}

// identity | mobius:seed=N | piecewise:s=S | csv:path=FILE
inline CircleMap circle_map_from_selector(const Selector& s) {
  if (s.kind == "identity") return CircleMap();
  if (s.kind == "mobius") {
    std::mt19937_64 rng(static_cast<std::uint64_t>(s.number("seed", 3)));
    return CircleMap::from_mobius(Mobius(random_sl2(rng)));
  }
  if (s.kind == "piecewise") return piecewise_map(s.number("s"));
  if (s.kind == "csv") {
    if (!s.has("path")) fail(ErrorKind::kInvalidInput, "csv selector needs path=FILE");
    return CircleMap::load_csv(s.params.at("path"));
  }
  fail(ErrorKind::kInvalidInput, "unknown circle map selector '" + s.kind + "'");
}

namespace detail {

inline std::string write_artifact(const RunContext& ctx, RunReport& report, const std::string& name,
                                  const std::function<void(std::ostream&)>& writer) {
  if (!ctx.out) return {};
  std::filesystem::create_directories(*ctx.out);
  const std::filesystem::path p = *ctx.out / name;
  std::ofstream out(p);
  if (!out) fail(ErrorKind::kInvalidInput, "cannot write " + p.string());
  writer(out);
  report.artifact(name);
  return p.string();
}

// Runs body and records a library error in the report instead of throwing.
inline RunReport guarded(const std::string& name, const std::function<void(RunReport&)>& body) {
  RunReport r(name);
  try {
    body(r);
  } catch (const Error& e) {
    r.fail_with(e);
  } catch (const nlohmann::json::exception& e) {
    r.fail_with(Error(ErrorKind::kInvalidInput, e.what()));
  } catch (const std::exception& e) {
    r.fail_with(Error(ErrorKind::kInternal, e.what()));
  }
  return r;
}

}  // namespace detail

inline RunReport cmd_qs(const RunContext& ctx) {
  return detail::guarded("qs", [&](RunReport& r) {
    const nlohmann::json& c = ctx.config;
    require_keys(c, {"map", "samples", "level", "tol", "seed"}, "qs config");
    const Selector sel = Selector::parse(get_or<std::string>(c, "map", "identity"));
    const double tol = get_or(c, "tol", 1e-6);
    const CircleMap f = circle_map_from_selector(sel);
    const QsReport k = qs_constant(f, QsGrid{get_or(c, "level", 0)});
    const CrossRatioNormReport M = cross_ratio_norm(f, get_or<std::size_t>(c, "samples", 64));

    r.data()["map"] = get_or<std::string>(c, "map", "identity");
    r.data()["k"] = {{"value", k.k}, {"witness_x", k.x}, {"witness_t", k.t}};
    r.data()["M"] = {{"value", M.M}, {"witness", M.witness}};
    if (sel.kind == "identity" || sel.kind == "mobius") {
      r.near("k", k.k, 1.0, 0.0, Basis::kTrivial);
      r.near("M", M.M, 1.0, 0.0, Basis::kTrivial);
    } else if (sel.kind == "piecewise") {
      // The map is linear on both half-lines, so the symmetric ratio at 0 is s.
      const double s = sel.number("s");
      r.near("k", k.k, std::max(s, 1 / s), tol, Basis::kDerived);
      r.at_least("M", M.M, 1.0, Basis::kTrivial);
    } else {
      r.at_least("k", k.k, 1.0, Basis::kTrivial);
      r.at_least("M", M.M, 1.0, Basis::kTrivial);
    }
    detail::write_artifact(ctx, r, "qs_map.csv", [&](std::ostream& o) { f.write_csv(o); });
  });
}

// Curve selectors add "rhombus" to the circle map selectors.
inline QuasiCircle curve_from_selector(const Selector& s, std::size_t n) {
  if (s.kind == "rhombus") return rhombus(n);
  return graph_curve(circle_map_from_selector(s), n);
}

inline RunReport cmd_hull(const RunContext& ctx) {
  return detail::guarded("hull", [&](RunReport& r) {
    const nlohmann::json& c = ctx.config;
    require_keys(c, {"curve", "samples", "margin", "tol", "seed"}, "hull config");
    const std::string text = get_or<std::string>(c, "curve", "identity");
    const Selector sel = Selector::parse(text);
    const std::size_t n = get_or<std::size_t>(c, "samples", sel.kind == "rhombus" ? 2048 : 512);
    const double margin = get_or(c, "margin", 1e-3);

    const QuasiCircle curve = curve_from_selector(sel, n);
    const ConvexHull3 hull = convex_hull(curve);
    const WidthResult w = width(curve, hull);
    r.data()["curve"] = text;
    r.data()["samples"] = n;
    r.data()["chart_attempt"] = curve.chart.attempt;
    r.data()["hull"] = hull_json(hull, w);

    if (sel.kind == "identity" || sel.kind == "mobius") {
      r.near("width", w.width, 0.0, get_or(c, "tol", 1e-9), Basis::kTrivial);
      r.holds("degenerate", hull.degenerate, Basis::kTrivial);
    } else if (sel.kind == "rhombus") {
      r.near("width", w.width, kPi / 2, get_or(c, "tol", 1e-3), Basis::kDerived);
    } else {
      const double k = qs_constant(*curve.map).k;
      r.data()["qs_constant"] = k;
      r.at_most("width", w.width, kPi / 2 - margin, Basis::kDerived);
      r.holds("width_agrees_with_qs", std::isfinite(k) && w.width < kPi / 2 - margin, Basis::kTheory);
    }
    detail::write_artifact(ctx, r, "hull.off", [&](std::ostream& o) { write_off(o, hull); });
    detail::write_artifact(ctx, r, "hull.json", [&](std::ostream& o) { o << hull_json(hull, w).dump(2) << '\n'; });
  });
}


// equidistant:t=T | isometry:seed=N:base=SELECTOR | mismatched:t=T:angle=A
inline std::pair<SpacelikeChart, SpacelikeChart> fixture_from_selector(const Selector& s) {
  if (s.kind == "equidistant") {
    const double t = s.number("t");
    return {equidistant_surface(t), equidistant_surface(-t)};
  }
  if (s.kind == "isometry") {
    if (!s.has("base")) fail(ErrorKind::kInvalidInput, "isometry selector needs base=...");
    std::mt19937_64 rng(static_cast<std::uint64_t>(s.number("seed", 7)));
    const Isometry g = random_isometry(rng);
    auto [f, p] = fixture_from_selector(Selector::parse(s.params.at("base")));
    return {isometry_image(f, g), isometry_image(p, g)};
  }
  if (s.kind == "mismatched") {
    const double t = s.number("t", kPi / 6), a = s.number("angle", 0.4);
    const Isometry g(Mat2{1, 0, 0, 1}, Mat2{std::cos(a), -std::sin(a), std::sin(a), std::cos(a)});
    return {equidistant_surface(t), isometry_image(equidistant_surface(-t), g)};
  }
  fail(ErrorKind::kInvalidInput, "unknown fixture selector '" + s.kind + "'");
}

namespace detail {

// Equidistant thickness behind a fixture selector, when there is one.
inline std::optional<double> equidistant_t(const Selector& s) {
  if (s.kind == "equidistant") return s.number("t");
  if (s.kind == "isometry" && s.has("base")) return equidistant_t(Selector::parse(s.params.at("base")));
  return std::nullopt;
}

// The future boundary must be the graph of the given curve's circle map.
inline double curve_mismatch(const SpacelikeChart& future, const QuasiCircle& curve) {
  if (!curve.map) fail(ErrorKind::kBoundaryMismatch, "boundary curve is not the graph of a circle map");
  const BoundaryExtension b = projection_boundary_extension(future);
  double worst = 0;
  for (std::size_t j = 0; j < b.left.size(); ++j)
    worst = std::max(worst, std::abs(angle_difference((*curve.map)(b.left[j]), b.right[j])));
  if (worst > 1e-2) fail(ErrorKind::kBoundaryMismatch, "fixture boundary differs from the curve");
  return worst;
}

inline double sup_circle_distance(const CircleMap& a, const CircleMap& b, std::size_t n = 512) {
  double worst = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
    worst = std::max(worst, std::abs(angle_difference(a(x), b(x))));
  }
  return worst;
}

}  // namespace detail

inline RunReport cmd_glue(const RunContext& ctx) {
  return detail::guarded("glue", [&](RunReport& r) {
    const nlohmann::json& c = ctx.config;
    require_keys(c, {"fixture", "future", "past", "epsilon", "directions", "isometries", "curve", "samples", "tol",
                     "seed"},
                 "glue config");
    const double eps = get_or(c, "epsilon", 0.05);
    const double tol = get_or(c, "tol", 1e-4);
    std::optional<Selector> sel;
    std::pair<SpacelikeChart, SpacelikeChart> charts;
    if (c.contains("future") || c.contains("past")) {
      if (!c.contains("future") || !c.contains("past")) fail(ErrorKind::kInvalidInput, "need both future and past");
      charts = {chart_from_json(c.at("future")), chart_from_json(c.at("past"))};
      r.data()["fixture"] = "charts";
    } else {
      const std::string text = get_or<std::string>(c, "fixture", "equidistant:t=pi/6");
      sel = Selector::parse(text);
      charts = fixture_from_selector(*sel);
      r.data()["fixture"] = text;
    }
    if (c.contains("curve")) {
      const std::string text = c.at("curve").get<std::string>();
      const QuasiCircle curve = curve_from_selector(Selector::parse(text), get_or<std::size_t>(c, "samples", 512));
      r.at_most("curve_mismatch", detail::curve_mismatch(charts.first, curve), 1e-2, Basis::kTrivial);
    }
    const GHConvexSubset omega = make_gh_convex_subset(charts.first, charts.second, eps);
    const CurvatureBounds D = principal_curvature_bounds(omega);
    const GluingMap g = gluing_map(omega, get_or<std::size_t>(c, "directions", 256));
    const QiReport qi = projection_qi_report(omega);

    r.data()["curvature"] = {{"D", D.D}, {"min_k", D.min_k}, {"max_k", D.max_k}, {"min_K", D.min_K}, {"max_K", D.max_K}};
    r.data()["gluing"] = {{"deviation", g.deviation}, {"qs", g.qs}, {"boundary_mismatch", g.boundary_mismatch}};
    r.data()["qi"] = {{"future", {{"A", qi.future.A}, {"B", qi.future.B}}}, {"past", {{"A", qi.past.A}, {"B", qi.past.B}}}};

    const std::optional<double> t = sel ? detail::equidistant_t(*sel) : std::nullopt;
    if (t) {
      // Umbilic surfaces with principal curvature tan t; the normalized
      // gluing map of a Fuchsian pair is the identity.
      const double k = std::tan(std::abs(*t));
      r.near("D", D.D, std::max(k, 1 / k), 1e-8, Basis::kDerived);
      r.at_most("gluing_deviation", g.deviation, tol, Basis::kDerived);
      r.near("gluing_qs", g.qs, 1.0, 1e-3, Basis::kDerived);
      r.near("qi_future_A", qi.future.A, 1.0, 1e-6, Basis::kDerived);
      r.near("qi_past_A", qi.past.A, 1.0, 1e-6, Basis::kDerived);
    } else {
      r.at_least("D", D.D, 1.0, Basis::kTrivial);
      r.at_least("gluing_qs", g.qs, 1.0, Basis::kTrivial);
      r.at_least("qi_future_A", qi.future.A, 1.0, Basis::kTrivial);
    }

    const int isometries = get_or(c, "isometries", sel && sel->kind == "equidistant" ? 10 : 0);
    if (isometries > 0) {
      std::mt19937_64 rng(ctx.seed());
      double worst = 0;
      for (int i = 0; i < isometries; ++i) {
        const Isometry h = random_isometry(rng);
        const GHConvexSubset moved =
            make_gh_convex_subset(isometry_image(charts.first, h), isometry_image(charts.second, h), eps);
        worst = std::max(worst, detail::sup_circle_distance(gluing_map(moved).map, g.map));
      }
      r.at_most("isometry_invariance", worst, tol, Basis::kDerived);
    }
    detail::write_artifact(ctx, r, "gluing_map.csv", [&](std::ostream& o) { g.map.write_csv(o); });
  });
}

namespace detail {

inline double radial_gaussian(double d) { return -1.0 - std::exp(-d * d); }

// -3 + 0.8 exp(-d(z, c)^2), inside [-3, -4/3].
inline CurvatureField gaussian_bump(Complex c = Complex(0.3, 0.1)) {
  return {[c](Complex z) {
            const double d = disc_distance(z, c);
            return -3.0 + 0.8 * std::exp(-d * d);
          },
          1.0 / 3, {}, "gaussian bump"};
}

inline double radial_oracle_error(const ConformalFactor& f) {
  const DiscGrid& g = f.u.grid;
  const double R = disc_radius_to_distance(g.r_max);
  const RadialOracle oracle(radial_gaussian, R, -0.5 * std::log(-radial_gaussian(R)));
  std::vector<double> d, u;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      if (g.inside(i, j)) {
        d.push_back(std::min(R, disc_radius_to_distance(std::abs(g.z(i, j)))));
        u.push_back(f.u(i, j));
      }
  const std::vector<double> ref = oracle.values(d);
  double err = 0, scale = 0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    err = std::max(err, std::abs(u[k] - ref[k]));
    scale = std::max(scale, std::abs(ref[k]));
  }
  return err / scale;
}

inline nlohmann::ordered_json bounds_json(const std::vector<DerivativeBound>& b) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (const auto& x : b) {
    nlohmann::ordered_json e{{"order", x.order}, {"sup", x.sup}, {"within", x.within}};
    e["declared"] = x.declared ? nlohmann::ordered_json(*x.declared) : nlohmann::ordered_json(nullptr);
    a.push_back(std::move(e));
  }
  return a;
}

}  // namespace detail


// curvature: "constant:k=K" | "radial" | "blend" (r_n sweep) | JSON field spec.
inline RunReport cmd_solve(const RunContext& ctx) {
  return detail::guarded("solve", [&](RunReport& r) {
    const nlohmann::json& c = ctx.config;
    require_keys(c, {"curvature", "grid", "r_max", "tol", "max_iter", "radii", "epsilon", "seed", "samples"},
                 "solve config");
    const nlohmann::json spec = c.contains("curvature") ? c.at("curvature") : nlohmann::json("constant:k=-4");
    const std::optional<Selector> sel = spec.is_string() ? std::optional(Selector::parse(spec.get<std::string>())) : std::nullopt;
    LiouvilleConfig cfg;
    cfg.grid = get_or(c, "grid", sel && sel->kind == "radial" ? 257 : 129);
    cfg.r_max = get_or(c, "r_max", std::tanh(3.0));
    cfg.tol = get_or(c, "tol", 1e-10);
    cfg.max_iter = get_or(c, "max_iter", 200);
    r.data()["curvature"] = spec;
    r.data()["grid"] = cfg.grid;
    r.data()["r_max"] = cfg.r_max;

    auto export_field = [&](const ConformalFactor& f, const std::string& stem) {
      if (!ctx.out) return;
      std::filesystem::create_directories(*ctx.out);
      write_csv(f, (*ctx.out / (stem + ".csv")).string());
      r.artifact(stem + ".csv");
      detail::write_artifact(ctx, r, stem + ".json", [&](std::ostream& o) { o << metadata_json(f).dump(2) << '\n'; });
    };
    auto solved = [&](const CurvatureField& K, const std::string& name) {
      const ConformalFactor f = solve_liouville(K, cfg);
      r.at_most(name + "residual", f.residual, cfg.tol, Basis::kTrivial);
      r.data()[name + "iterations"] = f.iterations;
      return f;
    };

    if (sel && sel->kind == "blend") {
      const double eps = get_or(c, "epsilon", 1.0 / 3);
      const auto radii = get_or(c, "radii", std::vector<double>{2, 4, 8});
      std::vector<std::vector<DerivativeBound>> runs;
      std::vector<ConformalFactor> seq;
      for (double rn : radii) {
        std::ostringstream name;
        name << "rn" << rn << "_";
        const std::string tag = name.str();
        const CurvatureField B = blend_curvature(detail::gaussian_bump(), {rn, eps});
        const RangeAudit range = certify_range(B, 2 * rn + 1);
        r.within(tag + "range_min", range.min, -1.0 / eps, -1.0 - eps, Basis::kTrivial, 1e-12);
        r.within(tag + "range_max", range.max, -1.0 / eps, -1.0 - eps, Basis::kTrivial, 1e-12);
        runs.push_back(derivative_bounds_check(B, hyperbolic_polar_points(2 * rn + 0.5, 0.05, 256)));
        r.data()[tag + "bounds"] = detail::bounds_json(runs.back());
        seq.push_back(solved(B, tag));
        export_field(seq.back(), "u_" + tag.substr(0, tag.size() - 1));
      }
      for (int p = 0; p <= 3 && !runs.empty(); ++p) {
        double lo = 1e300, hi = 0;
        for (const auto& b : runs) {
          lo = std::min(lo, b[p].sup);
          hi = std::max(hi, b[p].sup);
        }
        r.at_most("bound_spread_order" + std::to_string(p), hi / lo, 1.1, Basis::kDerived);
      }
      const ConvergenceReport conv = convergence_diagnostics(seq, 1.0);
      r.data()["sup_differences"] = conv.sup_differences;
      r.data()["monotone"] = conv.monotone;
      return;
    }

    if (sel && sel->kind == "radial") {
      const CurvatureField K{[](Complex z) { return detail::radial_gaussian(disc_radius_to_distance(std::abs(z))); },
                             0.1, {}, "-1 - exp(-d^2)"};
      const ConformalFactor f = solved(K, "");
      const double err = detail::radial_oracle_error(f);
      r.at_most("oracle_relative_error", err, 1e-4, Basis::kDerived);
      if (cfg.grid >= 9 && cfg.grid % 2 == 1) {
        LiouvilleConfig coarse = cfg;
        coarse.grid = (cfg.grid + 1) / 2;
        const double e1 = detail::radial_oracle_error(solve_liouville(K, coarse));
        r.near("convergence_order", std::log2(e1 / err), 2.0, 0.2, Basis::kDerived);
      }
      r.data()["bounds"] = detail::bounds_json(derivative_bounds_check(f.u));
      export_field(f, "u");
      return;
    }

    CurvatureField K;
    if (sel && sel->kind == "constant") {
      const double k0 = sel->number("k");
      if (!(k0 < 0)) fail(ErrorKind::kBadCurvatureRange, "constant curvature must be negative");
      K = constant_curvature(k0, get_or(c, "epsilon", std::min(0.5, -1 / k0)));
      const ConformalFactor f = solved(K, "");
      double err = 0;
      const DiscGrid& g = f.u.grid;
      for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
          if (g.inside(i, j)) err = std::max(err, std::abs(f.u(i, j) + 0.5 * std::log(-k0)));
      r.at_most("sup_error", err, 1e-10, Basis::kTrivial);
      export_field(f, "u");
      return;
    }
    if (sel) fail(ErrorKind::kInvalidInput, "unknown curvature selector '" + sel->kind + "'");

    K = curvature_from_json(spec);
    const ConformalFactor f = solved(K, "");
    r.data()["bounds"] = detail::bounds_json(derivative_bounds_check(f.u));
    const auto field_bounds =
        derivative_bounds_check(K, hyperbolic_polar_points(disc_radius_to_distance(cfg.r_max), 0.1, 64));
    r.data()["field_bounds"] = detail::bounds_json(field_bounds);
    for (const auto& b : field_bounds)
      if (b.declared) r.at_most("declared_bound_order" + std::to_string(b.order), b.sup, *b.declared, Basis::kTrivial);
    export_field(f, "u");
  });
}


namespace detail {

inline RunReport stage_core(std::uint64_t seed) {
  return guarded("core", [&](RunReport& r) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0;
    for (int i = 0; i < 10000; ++i) {
      const Vec22 x(g(rng), g(rng), g(rng), g(rng));
      worst = std::max(worst, std::abs(-to_matrix(x).det() - q22(x)));
    }
    r.at_most("matrix_model_isometry", worst, 1e-12, Basis::kTrivial);

    const double cr = cross_ratio(RP1::from_affine(0), RP1::from_affine(1), RP1::from_affine(-1), RP1::infinity());
    r.near("cross_ratio_normal_form", cr, -1.0, 0.0, Basis::kTheory);
    std::uniform_real_distribution<double> u(0, kTwoPi);
    worst = 0;
    for (int i = 0; i < 10000; ++i) {
      const Mobius m(random_sl2(rng));
      std::array<RP1, 4> q;
      for (auto& p : q) p = RP1::from_angle(u(rng));
      bool separated = true;
      for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) separated = separated && chordal_distance(q[a], q[b]) > 0.05;
      if (!separated) continue;
      const double before = cross_ratio(q[0], q[1], q[2], q[3]);
      const double after = cross_ratio(m(q[0]), m(q[1]), m(q[2]), m(q[3]));
      worst = std::max(worst, std::abs(after - before) / std::max(1.0, std::abs(before)));
    }
    r.at_most("cross_ratio_invariance", worst, 1e-10, Basis::kTrivial);
  });
}

inline RunReport stage_circle(const std::vector<double>& family, int word_length, const Mobius& conj) {
  return guarded("circle", [&](RunReport& r) {
    double prev_k = 0, prev_m = 0;
    bool k_up = true, m_up = true;
    for (double s : family) {
      const CircleMap f = piecewise_map(s);
      const double k = qs_constant(f).k, M = cross_ratio_norm(f).M;
      r.data()["qs_family"].push_back({{"s", s}, {"k", k}, {"M", M}});
      k_up = k_up && k > prev_k;
      m_up = m_up && M > prev_m;
      prev_k = k;
      prev_m = M;
    }
    r.holds("qs_increasing", k_up, Basis::kTheory);
    r.holds("cross_ratio_norm_increasing", m_up, Basis::kTheory);

    const FuchsianGroup r1 = cone_torus_group(3, 3);
    const FuchsianGroup r2 = r1.conjugate(conj);
    double err = 0;
    const EquivariantMap e = equivariant_qs_map(r1, r2, word_length);
    for (int i = 0; i < 20000; ++i) {
      const double a = kTwoPi * (i + 0.37) / 20000;
      err = std::max(err, std::abs(angle_difference(e.map(a), conj.lift(a))));
    }
    r.at_most("conjugator_recovery", err, 1e-6, Basis::kDerived);
    double prev = 1e300;
    bool decreasing = true;
    for (int L : {6, 8, 10, 12}) {
      const double res = L == word_length ? e.residual : equivariant_qs_map(r1, r2, L).residual;
      r.data()["equivariance_residuals"].push_back({{"word_length", L}, {"residual", res}});
      decreasing = decreasing && res < prev;
      prev = res;
    }
    r.holds("equivariance_residual_decreasing", decreasing, Basis::kDerived);
  });
}

inline RunReport stage_hull(const std::string& curve, const std::vector<double>& family, std::size_t samples) {
  return guarded("hull", [&](RunReport& r) {
    const Selector sel = Selector::parse(curve);
    const QuasiCircle c = curve_from_selector(sel, sel.kind == "rhombus" ? 2048 : 512);
    const double w0 = width(c).width;
    r.data()["curve_width"] = w0;
    if (!c.map) {
      r.near("curve_width", w0, kPi / 2, 1e-3, Basis::kDerived);
    } else if (c.map->mobius_tag()) {
      r.near("curve_width", w0, 0.0, 1e-9, Basis::kTrivial);
    } else {
      r.at_most("curve_width", w0, kPi / 2 - 1e-3, Basis::kDerived);
    }
    double prev = -1;
    bool increasing = true;
    for (double s : family) {
      const double w = width(graph_curve(piecewise_map(s), samples)).width;
      r.data()["widths"].push_back({{"s", s}, {"width", w}});
      std::ostringstream name;
      name << "width_s" << s;
      r.at_most(name.str(), w, kPi / 2 - 1e-3, Basis::kTheory);
      increasing = increasing && w > prev;
      prev = w;
    }
    r.holds("width_increasing", increasing, Basis::kTheory);
  });
}

// Pullback residuals on fixed parameter points at chart step h.
inline PullbackReport pullback_at(const SpacelikeChart& s, double h) {
  SpacelikeChart c = s;
  c.h = h;
  const std::vector<Vec2d> pts{{0, 0}, {0.25, 0.1}, {-0.4, 0.3}, {0.5, -0.5}, {0.1, 0.7}};
  return pullback_check(c, pts);
}

inline RunReport stage_surface(std::uint64_t seed) {
  return guarded("surface", [&](RunReport& r) {
    const std::pair<const char*, double> ts[] = {{"t0", 0.0}, {"t_pi6", kPi / 6}, {"t_pi4", kPi / 4}};
    for (const auto& [name, t] : ts) {
      const SpacelikeChart s = equidistant_surface(t);
      const PullbackReport a = pullback_at(s, 1.0 / 32), b = pullback_at(s, 1.0 / 64);
      r.near(std::string("pullback_order_left_") + name, std::log2(a.left / b.left), 2.0, 0.2, Basis::kDerived);
      r.near(std::string("pullback_order_right_") + name, std::log2(a.right / b.right), 2.0, 0.2, Basis::kDerived);
      r.at_most(std::string("pullback_residual_") + name, std::max(b.left, b.right), 1e-3, Basis::kDerived);
    }
    std::mt19937_64 rng(seed);
    const std::vector<SpacelikeChart> convex{
        equidistant_surface(kPi / 6, 0.6), equidistant_surface(kPi / 4, 0.6),
        isometry_image(equidistant_surface(kPi / 6, 0.6), random_isometry(rng)),
        graph_surface(Expression("0.5 + 0.1 * (x^2 + y^2)"), 0.6)};
    for (std::size_t i = 0; i < convex.size(); ++i) {
      std::vector<double> res;
      double product = 1e300;
      for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
        SpacelikeChart s = convex[i];
        s.h = h;
        const GaussReport g = gauss_check(s);
        res.push_back(g.max_residual / (h * h));
        product = std::min(product, g.min_product);
      }
      const std::string tag = "fixture" + std::to_string(i);
      r.data()["gauss_scaled_residuals"].push_back(res);
      // C h^2 with C read off the coarsest grid; finer grids must not exceed it.
      r.at_most("gauss_" + tag, std::max(res[1], res[2]), 1.5 * res[0] + 1e-6, Basis::kDerived);
      r.at_least("principal_product_" + tag, product, 0.0, Basis::kTheory);
    }
  });
}

inline RunReport stage_curvature(double epsilon) {
  return guarded("curvature", [&](RunReport& r) {
    RunContext sub;
    sub.config = {{"curvature", "blend"}, {"epsilon", std::max(epsilon, 1.0 / 3)}, {"grid", 65}};
    RunReport blend = cmd_solve(sub);
    if (blend.error()) throw Error(blend.error()->kind, blend.error()->message);
    for (Check c : blend.checks()) {
      c.name = "blend_" + c.name;
      r.record(std::move(c));
    }

    const double rn = 0.7;
    const CurvatureField base = blend_curvature(gaussian_bump(Complex(0.1, 0.05)), {rn, 1.0 / 3});
    const FuchsianInvariantField K = reflect_invariant(base, octagon_group());
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> rad(0.0, 0.97), ang(0.0, kTwoPi);
    std::vector<Complex> pts(1000);
    for (auto& z : pts) z = std::polar(rad(rng), ang(rng));
    r.at_most("reflection_invariance", invariance_residual(K, pts), 1e-10, Basis::kDerived);
  });
}

}  // namespace detail


inline RunReport cmd_pipeline(const RunContext& ctx) {
  RunReport report("pipeline");
  const nlohmann::json& c = ctx.config;
  const RunReport validated = detail::guarded("validate", [&](RunReport& r) {
    require_keys(c, {"epsilon", "seed", "curve", "fixture", "family", "samples", "grid", "word_length", "conjugator",
                     "tol"},
                 "pipeline config");
    const double eps = get_or(c, "epsilon", 0.05);
    if (!(eps > 0 && eps < 1)) fail(ErrorKind::kInvalidInput, "epsilon must lie in (0, 1)");
    const auto family = get_or(c, "family", std::vector<double>{2, 8, 32});
    for (std::size_t i = 0; i < family.size(); ++i)
      if (!(family[i] > 1) || (i > 0 && !(family[i] > family[i - 1])))
        fail(ErrorKind::kInvalidInput, "family must be increasing slopes above 1");
    r.holds("config_valid", true, Basis::kTrivial);
  });
  report.merge(validated, "validate");
  if (validated.error()) {
    for (const char* s : {"core", "circle", "hull", "surface", "glue", "curvature", "solve"})
      report.skip(s, "configuration rejected");
    return report;
  }

  const double eps = get_or(c, "epsilon", 0.05);
  const std::uint64_t seed = ctx.seed();
  const std::string curve = get_or<std::string>(c, "curve", "identity");
  const auto family = get_or(c, "family", std::vector<double>{2, 8, 32});
  const auto conj = get_or(c, "conjugator", std::vector<double>{1.2, 0.3, -0.4, 0.9});
  if (conj.size() != 4) {
    report.fail_with(Error(ErrorKind::kInvalidInput, "conjugator needs 4 entries"));
    return report;
  }
  auto sub = [&](const std::string& stage, nlohmann::json config) {
    RunContext s;
    s.config = std::move(config);
    if (ctx.out) s.out = *ctx.out / stage;
    return s;
  };

  const std::vector<std::pair<std::string, std::function<RunReport()>>> stages{
      {"core", [&] { return detail::stage_core(seed); }},
      {"circle",
       [&] {
         return detail::stage_circle(family, get_or(c, "word_length", 10), Mobius(conj[0], conj[1], conj[2], conj[3]));
       }},
      {"hull", [&] { return detail::stage_hull(curve, family, get_or<std::size_t>(c, "samples", 1024)); }},
      {"surface", [&] { return detail::stage_surface(seed); }},
      {"glue",
       [&] {
         return cmd_glue(sub("glue", {{"fixture", get_or<std::string>(c, "fixture", "equidistant:t=pi/6")},
                                      {"curve", curve},
                                      {"epsilon", eps},
                                      {"seed", seed}}));
       }},
      {"curvature", [&] { return detail::stage_curvature(eps); }},
      {"solve",
       [&] {
         RunReport r("solve");
         const RunReport constant = cmd_solve(sub("solve_constant", {{"curvature", "constant:k=-4"}, {"grid", 129}}));
         r.merge(constant, "constant");
         if (!constant.passed()) return r;
         r.merge(cmd_solve(sub("solve_radial", {{"curvature", "radial"}, {"grid", get_or(c, "grid", 257)}})), "radial");
         return r;
       }},
  };
  std::string failed;
  for (const auto& [name, run] : stages) {
    if (!failed.empty()) {
      report.skip(name, "stage '" + failed + "' failed");
      continue;
    }
    const RunReport r = run();
    report.merge(r, name);
    if (!r.passed()) failed = name;
  }
  return report;
}

}  // namespace adslab
