#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "adslab/curvature_field.hpp"

namespace adslab {

// n x n Cartesian grid on [-r_max, r_max]^2; nodes with |z| <= r_max are used.
struct DiscGrid {
  int n = 129;
  double r_max = 0.9;

  double h() const { return 2.0 * r_max / (n - 1); }
  Complex z(int i, int j) const { return {-r_max + i * h(), -r_max + j * h()}; }
  bool inside(int i, int j) const {
    return i >= 0 && j >= 0 && i < n && j < n && std::abs(z(i, j)) <= r_max * (1 + 1e-14);
  }
  // Unknown nodes: strictly inside, away from the circle by more than h / 1000.
  bool interior(int i, int j) const {
    return i >= 0 && j >= 0 && i < n && j < n && std::abs(z(i, j)) < r_max - 1e-3 * h();
  }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n + j; }
};

// Values on a DiscGrid; NaN outside the disc.
struct GridFunction {
  DiscGrid grid;
  std::vector<double> v;

  static GridFunction sample(const DiscGrid& g, const std::function<double(Complex)>& f) {
    GridFunction u{g, std::vector<double>(static_cast<std::size_t>(g.n) * g.n, std::numeric_limits<double>::quiet_NaN())};
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j)
        if (g.inside(i, j)) u.v[g.index(i, j)] = f(g.z(i, j));
    return u;
  }
  double operator()(int i, int j) const { return v[grid.index(i, j)]; }
};

// ((1 - |z|^2)^2 / 4) times the five-point Euclidean Laplacian.
inline double hyperbolic_laplacian(const GridFunction& u, int i, int j) {
  const DiscGrid& g = u.grid;
  if (!g.inside(i, j) || !g.inside(i + 1, j) || !g.inside(i - 1, j) || !g.inside(i, j + 1) || !g.inside(i, j - 1))
    fail(ErrorKind::kStencilOutOfDomain, "five-point stencil leaves the disc");
  const double h = g.h();
  const double lap = (u(i + 1, j) + u(i - 1, j) + u(i, j + 1) + u(i, j - 1) - 4 * u(i, j)) / (h * h);
  const double s = 1.0 - std::norm(g.z(i, j));
  return 0.25 * s * s * lap;
}

struct LiouvilleConfig {
  int grid = 129;
  double r_max = std::tanh(3.0);  // hyperbolic radius 6
  double tol = 1e-10;
  int max_iter = 200;
  double damping_floor = 1.0 / 1024;
  // Dirichlet data; default -1/2 ln|K| (the constant-curvature value).
  std::function<double(Complex)> boundary;
  std::string boundary_name = "far-field";
};

struct ConformalFactor {
  GridFunction u;
  double residual = 0;  // max |Delta_hyp u + e^{2u} K + 1| over unknown nodes
  int iterations = 0;
  std::string boundary;
};

namespace detail {

struct Arm {
  long col = -1;     // unknown index of the neighbour, or -1 for boundary data
  double length = 0; // distance to the neighbour or to the circle
  double value = 0;  // boundary value when col < 0
};

// Shortley-Weller stencil of one unknown node.
struct Stencil {
  Arm arm[4];  // +x, -x, +y, -y
  double weight[4];
  double diag = 0;
  double lambda = 0;  // (1 - |z|^2)^2 / 4
};

}  // namespace detail

// Damped Newton iteration for Delta_hyp u + e^{2u} K + 1 = 0 on the disc of
// Euclidean radius r_max with Dirichlet data on the circle.
inline ConformalFactor solve_liouville(const CurvatureField& K, const LiouvilleConfig& cfg = {}) {
  if (!(cfg.r_max > 0 && cfg.r_max < 1)) fail(ErrorKind::kInvalidInput, "r_max must lie in (0, 1)");
  if (cfg.grid < 5) fail(ErrorKind::kInvalidInput, "grid must have at least 5 nodes per side");
  // The Newton linearization needs K < 0 only; the epsilon window is checked
  // separately by certify_range.
  const RangeAudit range = audit_range(K, disc_radius_to_distance(cfg.r_max));
  if (!(range.max < 0) || !std::isfinite(range.min))
    fail(ErrorKind::kBadCurvatureRange, "curvature must be negative on the solve domain");
  const DiscGrid g{cfg.grid, cfg.r_max};
  const auto boundary = cfg.boundary ? cfg.boundary : [K](Complex z) { return -0.5 * std::log(std::abs(K(z))); };

  std::vector<long> id(static_cast<std::size_t>(g.n) * g.n, -1);
  std::vector<std::pair<int, int>> nodes;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      if (g.interior(i, j)) {
        id[g.index(i, j)] = static_cast<long>(nodes.size());
        nodes.emplace_back(i, j);
      }
  const std::size_t m = nodes.size();
  if (m == 0) fail(ErrorKind::kInvalidInput, "grid has no interior nodes");

  const double h = g.h();
  std::vector<detail::Stencil> st(m);
  std::vector<double> kv(m);
  const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
  for (std::size_t k = 0; k < m; ++k) {
    const auto [i, j] = nodes[k];
    const Complex z = g.z(i, j);
    detail::Stencil& s = st[k];
    for (int a = 0; a < 4; ++a) {
      const int ni = i + di[a], nj = j + dj[a];
      if (g.interior(ni, nj)) {
        s.arm[a] = {id[g.index(ni, nj)], h, 0};
      } else {
        // Distance along the axis to the circle |z + t e| = r_max.
        const Complex e(di[a], dj[a]);
        const double ze = z.real() * e.real() + z.imag() * e.imag();
        const double t = -ze + std::sqrt(ze * ze - std::norm(z) + cfg.r_max * cfg.r_max);
        s.arm[a] = {-1, t, boundary(z + t * e)};
      }
    }
    for (int axis = 0; axis < 2; ++axis) {
      const double hp = s.arm[2 * axis].length, hm = s.arm[2 * axis + 1].length;
      s.weight[2 * axis] = 2.0 / (hp * (hp + hm));
      s.weight[2 * axis + 1] = 2.0 / (hm * (hp + hm));
    }
    s.diag = -(s.weight[0] + s.weight[1] + s.weight[2] + s.weight[3]);
    const double q = 1.0 - std::norm(z);
    s.lambda = 0.25 * q * q;
    kv[k] = K(z);
  }

  Eigen::VectorXd u(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) u[k] = -0.5 * std::log(std::abs(kv[k]));

  auto residual = [&](const Eigen::VectorXd& w) {
    Eigen::VectorXd r(w.size());
    for (std::size_t k = 0; k < m; ++k) {
      const detail::Stencil& s = st[k];
      double lap = s.diag * w[k];
      for (int a = 0; a < 4; ++a) lap += s.weight[a] * (s.arm[a].col >= 0 ? w[s.arm[a].col] : s.arm[a].value);
      r[k] = s.lambda * lap + std::exp(2 * w[k]) * kv[k] + 1.0;
    }
    return r;
  };

  Eigen::SparseMatrix<double> J(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(5 * m);
  for (std::size_t k = 0; k < m; ++k) {
    trip.emplace_back(k, k, 1.0);
    for (int a = 0; a < 4; ++a)
      if (st[k].arm[a].col >= 0) trip.emplace_back(k, st[k].arm[a].col, st[k].lambda * st[k].weight[a]);
  }
  J.setFromTriplets(trip.begin(), trip.end());
  J.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(J);

  Eigen::VectorXd r = residual(u);
  double norm = r.lpNorm<Eigen::Infinity>();
  int it = 0;
  while (norm > cfg.tol) {
    if (it == cfg.max_iter)
      fail(ErrorKind::kNoConvergence, "Newton iteration stopped at residual " + std::to_string(norm));
    ++it;
    for (std::size_t k = 0; k < m; ++k) J.coeffRef(k, k) = st[k].lambda * st[k].diag + 2 * std::exp(2 * u[k]) * kv[k];
    lu.factorize(J);
    if (lu.info() != Eigen::Success) fail(ErrorKind::kNoConvergence, "Newton linearization is singular");
    const Eigen::VectorXd step = lu.solve(-r);
    double tau = 1.0;
    Eigen::VectorXd trial = u + step, rt = residual(trial);
    while (rt.lpNorm<Eigen::Infinity>() >= norm && tau > cfg.damping_floor) {
      tau *= 0.5;
      trial = u + tau * step;
      rt = residual(trial);
    }
    const double next = rt.lpNorm<Eigen::Infinity>();
    if (next >= norm && norm <= 100 * cfg.tol) break;  // rounding floor reached just above tol
    u = trial;
    r = rt;
    norm = next;
  }
  if (norm > cfg.tol) fail(ErrorKind::kNoConvergence, "residual " + std::to_string(norm) + " above tolerance");

  ConformalFactor out;
  out.u = GridFunction::sample(g, boundary);
  for (std::size_t k = 0; k < m; ++k) out.u.v[g.index(nodes[k].first, nodes[k].second)] = u[k];
  out.residual = norm;
  out.iterations = it;
  out.boundary = cfg.boundary_name;
  return out;
}

// Literal hyperbolic-normalized derivative norms of a grid function: Euclidean
// central differences contracted with the inverse hyperbolic metric, sup over
// nodes whose 5 x 5 stencil stays in the disc of Euclidean radius `within`.
inline std::vector<DerivativeBound> derivative_bounds_check(const GridFunction& u, int p_max = 3,
                                                            double within = 1.0,
                                                            const std::vector<std::pair<int, double>>& declared = {}) {
  if (p_max < 0 || p_max > 3) fail(ErrorKind::kInvalidInput, "derivative orders are supported up to 3");
  const DiscGrid& g = u.grid;
  const double h = g.h();
  std::vector<DerivativeBound> out(p_max + 1);
  for (int p = 0; p <= p_max; ++p) out[p].order = p;
  for (int i = 2; i < g.n - 2; ++i)
    for (int j = 2; j < g.n - 2; ++j) {
      bool ok = std::abs(g.z(i, j)) <= within;
      for (int a = -2; a <= 2 && ok; ++a)
        for (int b = -2; b <= 2 && ok; ++b) ok = g.inside(i + a, j + b);
      if (!ok) continue;
      const double scale = 0.5 * (1.0 - std::norm(g.z(i, j)));
      for (int p = 0; p <= p_max; ++p) {
        double sum = 0;
        for (int a = 0; a <= p; ++a) {
          const auto wx = detail::fd_weights(a), wy = detail::fd_weights(p - a);
          double d = 0;
          for (int s = 0; s < 5; ++s)
            for (int t = 0; t < 5; ++t)
              if (wx[s] != 0 && wy[t] != 0) d += wx[s] * wy[t] * u(i + s - 2, j + t - 2);
          d /= std::pow(h, p);
          sum += detail::binomial(p, a) * d * d;
        }
        out[p].sup = std::max(out[p].sup, std::pow(scale, p) * std::sqrt(sum));
      }
    }
  for (const auto& [q, m] : declared)
    if (q >= 0 && q <= p_max) {
      out[q].declared = m;
      out[q].within = out[q].sup <= m;
    }
  return out;
}

struct SobolevNorm {
  int k = 0, p = 2;
  double value = 0;
};

// Discrete ||u||_{k,p} (k <= 2, hyperbolic area and normalized derivatives)
// on the sub-disc of hyperbolic radius R. The integrand carries the smooth
// weight bump(2 d / R), so the node sum has no O(h) edge error.
inline std::vector<SobolevNorm> sobolev_norms(const GridFunction& u, double R) {
  const DiscGrid& g = u.grid;
  const double h = g.h(), rr = distance_to_disc_radius(R);
  double acc[3][2] = {{0, 0}, {0, 0}, {0, 0}};  // order j, exponent 2 or 4
  for (int i = 1; i < g.n - 1; ++i)
    for (int j = 1; j < g.n - 1; ++j) {
      const Complex z = g.z(i, j);
      if (std::abs(z) > rr || !g.inside(i - 1, j - 1) || !g.inside(i + 1, j + 1) || !g.inside(i - 1, j + 1) ||
          !g.inside(i + 1, j - 1))
        continue;
      const double q = 1.0 - std::norm(z), scale = 0.5 * q;
      const double area = h * h * 4.0 / (q * q) * bump(2.0 * disc_radius_to_distance(std::abs(z)) / R);
      const double ux = (u(i + 1, j) - u(i - 1, j)) / (2 * h), uy = (u(i, j + 1) - u(i, j - 1)) / (2 * h);
      const double uxx = (u(i + 1, j) - 2 * u(i, j) + u(i - 1, j)) / (h * h);
      const double uyy = (u(i, j + 1) - 2 * u(i, j) + u(i, j - 1)) / (h * h);
      const double uxy = (u(i + 1, j + 1) - u(i + 1, j - 1) - u(i - 1, j + 1) + u(i - 1, j - 1)) / (4 * h * h);
      const double d[3] = {std::abs(u(i, j)), scale * std::hypot(ux, uy),
                           scale * scale * std::sqrt(uxx * uxx + 2 * uxy * uxy + uyy * uyy)};
      for (int o = 0; o < 3; ++o) {
        acc[o][0] += area * std::pow(d[o], 2);
        acc[o][1] += area * std::pow(d[o], 4);
      }
    }
  std::vector<SobolevNorm> out;
  for (int k = 0; k <= 2; ++k)
    for (int e = 0; e < 2; ++e) {
      double sum = 0;
      for (int o = 0; o <= k; ++o) sum += acc[o][e];
      const int p = e == 0 ? 2 : 4;
      out.push_back({k, p, std::pow(sum, 1.0 / p)});
    }
  return out;
}

// sup |u(x) - u(y)| / d_hyp(x, y)^alpha over node pairs at most `window`
// grid steps apart, inside hyperbolic distance R of 0.
inline double holder_quotient(const GridFunction& u, double R, double alpha = 0.5, int window = 3) {
  const DiscGrid& g = u.grid;
  const double rr = distance_to_disc_radius(R);
  double best = 0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      if (std::abs(g.z(i, j)) > rr) continue;
      for (int a = 0; a <= window; ++a)
        for (int b = -window; b <= window; ++b) {
          if ((a == 0 && b <= 0) || !g.inside(i + a, j + b) || std::abs(g.z(i + a, j + b)) > rr) continue;
          const double d = disc_distance(g.z(i, j), g.z(i + a, j + b));
          best = std::max(best, std::abs(u(i, j) - u(i + a, j + b)) / std::pow(d, alpha));
        }
    }
  return best;
}

struct ConvergenceReport {
  std::vector<std::vector<SobolevNorm>> norms;  // per member of the sequence
  std::vector<double> holder;                   // alpha = 1/2 quotients
  std::vector<double> sup_differences;          // |u_{n+1} - u_n| on the sub-disc
  bool monotone = true;                         // sup differences decrease
};

// Diagnostics for a sequence of solutions on a common grid, restricted to
// the sub-disc of hyperbolic radius R.
inline ConvergenceReport convergence_diagnostics(const std::vector<ConformalFactor>& seq, double R = 1.0) {
  ConvergenceReport rep;
  for (const auto& f : seq) {
    if (f.u.grid.n != seq.front().u.grid.n || f.u.grid.r_max != seq.front().u.grid.r_max)
      fail(ErrorKind::kInvalidInput, "convergence diagnostics need a common grid");
    rep.norms.push_back(sobolev_norms(f.u, R));
    rep.holder.push_back(holder_quotient(f.u, R));
  }
  const double rr = distance_to_disc_radius(R);
  for (std::size_t s = 1; s < seq.size(); ++s) {
    const DiscGrid& g = seq[s].u.grid;
    double sup = 0;
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j)
        if (g.inside(i, j) && std::abs(g.z(i, j)) <= rr) sup = std::max(sup, std::abs(seq[s].u(i, j) - seq[s - 1].u(i, j)));
    rep.sup_differences.push_back(sup);
  }
  for (std::size_t s = 1; s < rep.sup_differences.size(); ++s)
    if (!(rep.sup_differences[s] < rep.sup_differences[s - 1])) rep.monotone = false;
  return rep;
}

inline void write_csv(const ConformalFactor& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kInvalidInput, "cannot write '" + path + "'");
  out.precision(17);
  out << "x,y,u\n";
  const DiscGrid& g = f.u.grid;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      if (g.inside(i, j)) out << g.z(i, j).real() << ',' << g.z(i, j).imag() << ',' << f.u(i, j) << '\n';
}

inline nlohmann::ordered_json metadata_json(const ConformalFactor& f) {
  nlohmann::ordered_json j;
  j["residual"] = f.residual;
  j["iterations"] = f.iterations;
  j["grid"] = f.u.grid.n;
  j["r_max"] = f.u.grid.r_max;
  j["boundary"] = f.boundary;
  return j;
}

}  // namespace adslab
