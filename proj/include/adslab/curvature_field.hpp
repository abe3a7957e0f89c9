#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "adslab/errors.hpp"
#include "adslab/expression.hpp"
#include "adslab/fuchsian.hpp"
#include "adslab/hyperbolic_plane.hpp"
#include "adslab/parallel.hpp"

namespace adslab {

// Prescribed curvature on the Poincare disc. Declared bounds (p, M_p) refer
// to hyperbolic-normalized derivatives.
struct CurvatureField {
  std::function<double(Complex)> eval;
  double epsilon = 0.1;
  std::vector<std::pair<int, double>> bounds;
  std::string description;

  double operator()(Complex z) const { return eval(z); }
};

inline CurvatureField constant_curvature(double k0, double epsilon) {
  return {[k0](Complex) { return k0; }, epsilon, {}, "constant:" + std::to_string(k0)};
}

inline CurvatureField expression_curvature(const Expression& e, double epsilon) {
  return {[e](Complex z) { return e(z.real(), z.imag()); }, epsilon, {}, "expr:" + e.text()};
}

// Points at hyperbolic distances k * step (k <= R / step) from 0, each circle
// sampled by n_angle points, or fewer near 0.
inline std::vector<Complex> hyperbolic_polar_points(double R, double step, std::size_t n_angle) {
  std::vector<Complex> pts{Complex(0, 0)};
  const int nr = static_cast<int>(std::floor(R / step + 1e-9));
  for (int k = 1; k <= nr; ++k) {
    const double d = k * step;
    const double want = std::ceil(kTwoPi * std::sinh(d) / step);
    const std::size_t m = std::clamp<std::size_t>(static_cast<std::size_t>(want), 8, n_angle);
    const double r = distance_to_disc_radius(d);
    for (std::size_t j = 0; j < m; ++j) pts.push_back(std::polar(r, kTwoPi * (j + 0.5 * (k % 2)) / m));
  }
  return pts;
}

struct RangeAudit {
  double min = 0, max = 0;
  std::size_t points = 0;
};

// Range on a 100 x 100 hyperbolic polar audit grid out to distance R.
inline RangeAudit audit_range(const CurvatureField& K, double R) {
  RangeAudit a{1e300, -1e300, 0};
  for (int i = 0; i < 100; ++i) {
    const double r = distance_to_disc_radius(R * i / 99.0);
    for (int j = 0; j < 100; ++j) {
      const double v = K(std::polar(r, kTwoPi * j / 100.0));
      a.min = std::min(a.min, v);
      a.max = std::max(a.max, v);
      ++a.points;
    }
  }
  return a;
}

// Throws BadCurvatureRange unless K stays in [-1/eps, -1-eps] on the audit grid.
inline RangeAudit certify_range(const CurvatureField& K, double R) {
  if (!(K.epsilon > 0)) fail(ErrorKind::kInvalidInput, "epsilon must be positive");
  const RangeAudit a = audit_range(K, R);
  const double slack = 1e-12;
  if (!(a.min >= -1.0 / K.epsilon - slack) || !(a.max <= -1.0 - K.epsilon + slack))
    fail(ErrorKind::kBadCurvatureRange, "curvature range [" + std::to_string(a.min) + ", " + std::to_string(a.max) +
                                            "] leaves [-1/eps, -1-eps]");
  return a;
}

// Smooth cutoff: 1 on [0, 1], 0 on [2, inf).
inline double bump(double x) {
  auto sigma = [](double s) { return s > 0 ? std::exp(-1.0 / s) : 0.0; };
  const double a = sigma(2.0 - x), b = sigma(x - 1.0);
  return a / (a + b);
}

struct BlendSpec {
  double r_n = 2.0;     // inner hyperbolic radius
  double epsilon = 0.1; // outside B(o, 2 r_n) the field is -1/epsilon
};

// K on B(o, r_n), -1/eps beyond 2 r_n, bump-weighted convex combination between.
inline CurvatureField blend_curvature(const CurvatureField& K, const BlendSpec& spec) {
  if (!(spec.r_n > 0)) fail(ErrorKind::kInvalidInput, "blend radius must be positive");
  if (!(spec.epsilon > 0)) fail(ErrorKind::kInvalidInput, "epsilon must be positive");
  const double outer = -1.0 / spec.epsilon, rn = spec.r_n;
  CurvatureField out;
  out.eval = [K, outer, rn](Complex z) {
    const double d = disc_radius_to_distance(std::min(std::abs(z), 1.0));
    if (d <= rn) return K(z);
    if (d >= 2 * rn) return outer;
    const double w = bump(d / rn);
    return w * K(z) + (1 - w) * outer;
  };
  out.epsilon = std::min(K.epsilon, spec.epsilon);
  out.description = "blend(" + K.description + ", r_n=" + std::to_string(rn) + ")";
  return out;
}

// Extension of a field on the Dirichlet domain at 0 to the whole disc,
// z -> K'(gamma^-1 z) with gamma found by the reduction walk.
struct FuchsianInvariantField {
  CurvatureField base;
  FuchsianGroup group;
  int max_steps = 1000;

  double operator()(Complex z) const { return base(reduce_to_domain(group, z, max_steps).point); }
  CurvatureField field() const {
    CurvatureField f = base;
    f.eval = [self = *this](Complex z) { return self(z); };
    f.description = "reflect(" + base.description + ")";
    return f;
  }
};

inline FuchsianInvariantField reflect_invariant(const CurvatureField& base, const FuchsianGroup& group) {
  return {base, group};
}

// max |K(g z) - K(z)| over the generators and their inverses.
inline double invariance_residual(const FuchsianInvariantField& K, const std::vector<Complex>& pts) {
  std::vector<double> r(pts.size());
  const auto letters = K.group.letters();
  parallel_for(pts.size(), [&](std::size_t i) {
    const double v = K(pts[i]);
    for (const auto& g : letters) r[i] = std::max(r[i], std::abs(K(apply_disc(g, pts[i])) - v));
  });
  return r.empty() ? 0.0 : *std::max_element(r.begin(), r.end());
}

struct DerivativeBound {
  int order = 0;
  double sup = 0;
  std::optional<double> declared;
  bool within = true;
};

namespace detail {

// Central-difference weights for d^k/dx^k on offsets -2..2.
inline std::array<double, 5> fd_weights(int k) {
  switch (k) {
    case 0: return {0, 0, 1, 0, 0};
    case 1: return {0, -0.5, 0, 0.5, 0};
    case 2: return {0, 1, -2, 1, 0};
    default: return {-0.5, 1, 0, -1, 0.5};
  }
}

inline double binomial(int n, int k) {
  double b = 1;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

// Hyperbolic norms of the order 0..p_max derivatives of f at z, p_max <= 3.
// f is pulled back by the disc isometry w -> (w + z)/(1 + conj(z) w) and
// differentiated at w = 0, where the metric is 4 |dw|^2.
inline std::vector<double> hyperbolic_derivative_norms(const std::function<double(Complex)>& f, Complex z,
                                                       int p_max, double step) {
  double v[5][5];
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const Complex w((i - 2) * step, (j - 2) * step);
      v[i][j] = (p_max == 0 && (i != 2 || j != 2)) ? 0.0 : f(disc_translate(z, w));
    }
  std::vector<double> out(p_max + 1);
  for (int p = 0; p <= p_max; ++p) {
    double sum = 0;
    for (int a = 0; a <= p; ++a) {
      const auto wx = fd_weights(a), wy = fd_weights(p - a);
      double d = 0;
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) d += wx[i] * wy[j] * v[i][j];
      d /= std::pow(step, p);
      sum += binomial(p, a) * d * d;
    }
    out[p] = std::pow(0.5, p) * std::sqrt(sum);
  }
  return out;
}

}  // namespace detail

// Sup over pts of the hyperbolic norms of the derivatives of orders 0..p_max
// (p_max <= 3), compared with the field's declared bounds.
inline std::vector<DerivativeBound> derivative_bounds_check(const CurvatureField& K, const std::vector<Complex>& pts,
                                                            int p_max = 3, double step = 0.02) {
  if (p_max < 0 || p_max > 3) fail(ErrorKind::kInvalidInput, "derivative orders are supported up to 3");
  std::vector<std::vector<double>> norms(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    norms[i] = detail::hyperbolic_derivative_norms(K.eval, pts[i], p_max, step);
  });
  std::vector<DerivativeBound> out(p_max + 1);
  for (int p = 0; p <= p_max; ++p) {
    out[p].order = p;
    for (const auto& n : norms) out[p].sup = std::max(out[p].sup, n[p]);
    for (const auto& [q, m] : K.bounds)
      if (q == p) {
        out[p].declared = m;
        out[p].within = out[p].sup <= m;
      }
  }
  return out;
}

namespace detail {

// Uniform-grid CSV "x,y,K" (header optional), bilinear interpolation,
// clamped at the grid edge.
inline std::function<double(Complex)> grid_field_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kInvalidInput, "cannot open curvature grid '" + path + "'");
  std::map<std::pair<double, double>, double> values;
  std::vector<double> xs, ys;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double x, y, k;
    if (!(row >> x >> y >> k)) fail(ErrorKind::kInvalidInput, path + ":" + std::to_string(lineno) + ": expected x,y,K");
    values[{x, y}] = k;
    xs.push_back(x);
    ys.push_back(y);
  }
  auto unique_sorted = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  unique_sorted(xs);
  unique_sorted(ys);
  if (xs.size() < 2 || ys.size() < 2 || values.size() != xs.size() * ys.size())
    fail(ErrorKind::kInvalidInput, path + ": values must fill a rectangular grid");
  std::vector<double> table(xs.size() * ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < ys.size(); ++j) table[i * ys.size() + j] = values.at({xs[i], ys[j]});
  return [xs, ys, table](Complex z) {
    auto locate = [](const std::vector<double>& g, double t) {
      t = std::clamp(t, g.front(), g.back());
      std::size_t i = static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), t) - g.begin());
      i = std::clamp<std::size_t>(i, 1, g.size() - 1) - 1;
      return std::make_pair(i, (t - g[i]) / (g[i + 1] - g[i]));
    };
    const auto [i, s] = locate(xs, z.real());
    const auto [j, t] = locate(ys, z.imag());
    const std::size_t n = ys.size();
    return (1 - s) * (1 - t) * table[i * n + j] + s * (1 - t) * table[(i + 1) * n + j] +
           (1 - s) * t * table[i * n + j + 1] + s * t * table[(i + 1) * n + j + 1];
  };
}

}  // namespace detail

// {"expr": "...", "epsilon": e, "bounds": [[p, M_p], ...]}, {"constant": K0, "epsilon": e}
// or {"grid_file": "path.csv", "epsilon": e}. Expressions may use x, y, r, d.
inline CurvatureField curvature_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorKind::kInvalidInput, "curvature spec must be an object");
  const double eps = j.value("epsilon", 0.1);
  if (!(eps > 0)) fail(ErrorKind::kInvalidInput, "epsilon must be positive");
  CurvatureField K;
  if (j.contains("expr")) {
    K = expression_curvature(Expression(j.at("expr").get<std::string>()), eps);
  } else if (j.contains("constant")) {
    K = constant_curvature(j.at("constant").get<double>(), eps);
  } else if (j.contains("grid_file")) {
    const std::string path = j.at("grid_file").get<std::string>();
    K = {detail::grid_field_from_csv(path), eps, {}, "grid:" + path};
  } else {
    fail(ErrorKind::kInvalidInput, "curvature spec needs \"expr\", \"constant\" or \"grid_file\"");
  }
  if (j.contains("bounds"))
    for (const auto& b : j.at("bounds")) {
      if (!b.is_array() || b.size() != 2) fail(ErrorKind::kInvalidInput, "bounds entries are [p, M_p]");
      K.bounds.emplace_back(b[0].get<int>(), b[1].get<double>());
    }
  return K;
}

}  // namespace adslab
