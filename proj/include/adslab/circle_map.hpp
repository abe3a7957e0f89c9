#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "adslab/errors.hpp"
#include "adslab/numeric_policy.hpp"
#include "adslab/projective_line.hpp"

namespace adslab {

enum class Interpolation { kMonotoneCubic, kPiecewiseMobius };

// Orientation-preserving degree-one circle homeomorphism, represented by a
// lift F on the circle angle with F(theta + 2pi) = F(theta) + 2pi.
//
// Sampled maps store one period of strictly increasing nodes. A map may also
// carry an exact lift (closed-form maps) and an exact Moebius tag; when
// present they take precedence over interpolation.
class CircleMap {
 public:
  using Lift = std::function<double(double)>;

  static constexpr std::size_t kMinSamples = 16;

  CircleMap() : CircleMap(from_mobius(Mobius::identity())) {}

  static CircleMap from_samples(std::vector<double> theta, std::vector<double> value,
                                Interpolation mode = Interpolation::kMonotoneCubic) {
    CircleMap f{Raw{}};
    f.theta_ = std::move(theta);
    f.value_ = std::move(value);
    f.mode_ = mode;
    f.validate();
    f.build();
    return f;
  }

  // Samples an exact lift on n uniform nodes and keeps the lift for evaluation.
  static CircleMap from_lift(Lift lift, std::size_t n = 1024, std::optional<Lift> inverse = {}) {
    std::vector<double> t(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
      v[i] = lift(t[i]);
    }
    CircleMap f = from_samples(std::move(t), std::move(v));
    f.exact_ = std::make_shared<Lift>(std::move(lift));
    if (inverse) f.exact_inverse_ = std::make_shared<Lift>(std::move(*inverse));
    return f;
  }

  static CircleMap from_mobius(const Mobius& g, std::size_t n = 256) {
    CircleMap f = from_lift([g](double a) { return g.lift(a); }, n,
                            Lift([h = g.inverse()](double a) { return h.lift(a); }));
    f.mobius_ = g;
    const Mat2& m = g.matrix();
    if (m.c == 0.0)
      f.affine_ = std::make_shared<const std::function<double(double)>>(
          [m](double x) { return (m.a * x + m.b) / m.d; });
    return f;
  }

  // Map given on the affine line x = tan(alpha/2); phi must be increasing on R
  // with phi(+-inf) = +-inf, so that infinity is fixed.
  static CircleMap from_affine(const std::function<double(double)>& phi, std::size_t n = 1024) {
    auto lift = [phi](double a) {
      const double k = std::floor((a + kPi) / kTwoPi);
      const double r = a - kTwoPi * k;  // in [-pi, pi)
      if (r == -kPi) return a;
      return 2.0 * std::atan(phi(std::tan(0.5 * r))) + kTwoPi * k;
    };
    CircleMap f = from_lift(lift, n);
    f.affine_ = std::make_shared<const std::function<double(double)>>(phi);
    return f;
  }

  // Restriction to the affine line when the map is known to fix infinity.
  const std::function<double(double)>* affine_form() const { return affine_.get(); }

  double operator()(double alpha) const {
    if (exact_) return (*exact_)(alpha);
    return interpolate(alpha);
  }

  RP1 operator()(const RP1& p) const { return RP1::from_angle((*this)(p.alpha)); }

  double apply_affine(double x) const {
    if (affine_) return (*affine_)(x);
    return (*this)(RP1::from_affine(x)).affine();
  }

  // Lift of the inverse map.
  double inverse_lift(double beta) const {
    if (exact_inverse_) return (*exact_inverse_)(beta);
    // Bracket using periodicity of F - id, then bisect.
    double lo = beta - kTwoPi, hi = beta + kTwoPi;
    while ((*this)(lo) > beta) lo -= kTwoPi;
    while ((*this)(hi) < beta) hi += kTwoPi;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
      const double mid = 0.5 * (lo + hi);
      ((*this)(mid) < beta ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  CircleMap inverse() const {
    if (mobius_) return from_mobius(mobius_->inverse(), theta_.size());
    if (exact_) {
      const CircleMap self = *this;
      CircleMap g = from_lift([self](double b) { return self.inverse_lift(b); }, theta_.size(),
                              Lift([self](double a) { return self(a); }));
      return g;
    }
    // Swap the roles of nodes and values, shifting to one period from 0.
    const std::size_t n = theta_.size();
    std::vector<double> t(n), v(n);
    const double base = value_[0];
    const double k = std::floor(base / kTwoPi);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = value_[i] - kTwoPi * k;
      v[i] = theta_[i];
    }
    // Rotate so the nodes start in [0, 2pi).
    std::size_t first = 0;
    while (first < n && t[first] < 0) ++first;
    std::vector<double> tt, vv;
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t i = (first + j) % n;
      const double wrap = (first + j >= n) ? kTwoPi : 0.0;
      tt.push_back(t[i] + wrap);
      vv.push_back(v[i] + wrap);
    }
    return from_samples(std::move(tt), std::move(vv), mode_);
  }

  // (this o g)
  CircleMap compose(const CircleMap& g) const {
    if (mobius_ && g.mobius_) return from_mobius(*mobius_ * *g.mobius_, std::max(size(), g.size()));
    if (exact_ && g.exact_) {
      const CircleMap f = *this;
      const CircleMap h = g;
      CircleMap r = from_lift([f, h](double a) { return f(h(a)); }, std::max(size(), g.size()),
                              Lift([f, h](double b) { return h.inverse_lift(f.inverse_lift(b)); }));
      if (affine_ && g.affine_)
        r.affine_ = std::make_shared<const std::function<double(double)>>(
            [p = affine_, q = g.affine_](double x) { return (*p)((*q)(x)); });
      return r;
    }
    std::vector<double> t = g.theta_, v(g.theta_.size());
    for (std::size_t i = 0; i < t.size(); ++i) v[i] = (*this)(g(t[i]));
    return from_samples(std::move(t), std::move(v), g.mode_);
  }

  const std::vector<double>& nodes() const { return theta_; }
  const std::vector<double>& values() const { return value_; }
  std::size_t size() const { return theta_.size(); }
  bool has_exact_lift() const { return static_cast<bool>(exact_); }
  const std::optional<Mobius>& mobius_tag() const { return mobius_; }
  Interpolation interpolation() const { return mode_; }

  CircleMap with_interpolation(Interpolation mode) const {
    return from_samples(theta_, value_, mode);
  }

  // CSV with header "theta,f_theta": one period of nodes, the wrap-around row
  // at +2pi implied.
  void write_csv(std::ostream& out) const {
    out << "theta,f_theta\n" << std::setprecision(17);
    for (std::size_t i = 0; i < theta_.size(); ++i) out << theta_[i] << ',' << value_[i] << '\n';
  }

  static CircleMap read_csv(std::istream& in, Interpolation mode = Interpolation::kMonotoneCubic) {
    std::string line;
    int lineno = 0;
    auto bad = [&](const std::string& why) {
      fail(ErrorKind::kInvalidInput, "circle map CSV line " + std::to_string(lineno) + ": " + why);
    };
    if (!std::getline(in, line)) bad("empty file");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "theta,f_theta") bad("expected header \"theta,f_theta\"");
    std::vector<double> t, v;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) bad("expected two comma-separated values");
      try {
        std::size_t used = 0;
        const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
        t.push_back(std::stod(a, &used));
        if (used != a.size()) bad("trailing characters");
        v.push_back(std::stod(b, &used));
        if (used != b.size()) bad("trailing characters");
      } catch (const std::logic_error&) {
        bad("not a number");
      }
      if (!std::isfinite(t.back()) || !std::isfinite(v.back())) bad("non-finite value");
      if (t.size() > 1 && !(t.back() > t[t.size() - 2])) bad("theta not strictly increasing");
      if (v.size() > 1 && !(v.back() > v[v.size() - 2]))
        fail(ErrorKind::kNotMonotone, "circle map CSV line " + std::to_string(lineno) +
                                          ": f_theta not strictly increasing");
    }
    return from_samples(std::move(t), std::move(v), mode);
  }

  static CircleMap load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::kInvalidInput, "cannot open " + path);
    return read_csv(in);
  }

 private:
  struct Raw {};
  explicit CircleMap(Raw) {}

  void validate() const {
    const std::size_t n = theta_.size();
    if (n != value_.size()) fail(ErrorKind::kInvalidInput, "node/value size mismatch");
    if (n < kMinSamples)
      fail(ErrorKind::kInvalidInput, "circle map needs at least 16 samples");
    for (std::size_t i = 0; i < n; ++i)
      if (!std::isfinite(theta_[i]) || !std::isfinite(value_[i]))
        fail(ErrorKind::kInvalidInput, "non-finite sample");
    if (!(theta_.back() - theta_.front() < kTwoPi))
      fail(ErrorKind::kInvalidInput, "nodes must span less than one period");
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!(theta_[i + 1] > theta_[i])) fail(ErrorKind::kInvalidInput, "nodes not increasing");
      if (!(value_[i + 1] > value_[i]))
        fail(ErrorKind::kNotMonotone, "lift not strictly increasing at node " + std::to_string(i));
    }
    if (!(value_.front() + kTwoPi > value_.back()))
      fail(ErrorKind::kNotMonotone, "lift is not degree one");
  }

  // Node i for any integer i, using periodicity.
  double node(long i) const {
    const long n = static_cast<long>(theta_.size());
    const long k = (i >= 0) ? i / n : -((-i + n - 1) / n);
    return theta_[static_cast<std::size_t>(i - k * n)] + kTwoPi * static_cast<double>(k);
  }
  double val(long i) const {
    const long n = static_cast<long>(theta_.size());
    const long k = (i >= 0) ? i / n : -((-i + n - 1) / n);
    return value_[static_cast<std::size_t>(i - k * n)] + kTwoPi * static_cast<double>(k);
  }

  void build() {
    const long n = static_cast<long>(theta_.size());
    slope_.assign(theta_.size(), 0.0);
    if (mode_ == Interpolation::kMonotoneCubic) {
      // Fritsch-Butland weighted harmonic means keep every cubic monotone.
      for (long i = 0; i < n; ++i) {
        const double h0 = node(i) - node(i - 1), h1 = node(i + 1) - node(i);
        const double d0 = (val(i) - val(i - 1)) / h0, d1 = (val(i + 1) - val(i)) / h1;
        const double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
        slope_[static_cast<std::size_t>(i)] = (w1 + w2) / (w1 / d0 + w2 / d1);
      }
    } else {
      local_.clear();
      for (long i = 0; i < n; ++i) {
        std::array<RP1, 3> x, y;
        for (int j = 0; j < 3; ++j) {
          x[j] = RP1::from_angle(node(i - 1 + j));
          y[j] = RP1::from_angle(val(i - 1 + j));
        }
        local_.push_back(Mobius::from_three_points(x, y));
      }
    }
  }

  // Lift of the local Moebius map centered at node c, matched to the samples.
  double local_lift(long c, double a) const {
    const long n = static_cast<long>(theta_.size());
    const long k = (c >= 0) ? c / n : -((-c + n - 1) / n);
    const Mobius& g = local_[static_cast<std::size_t>(c - k * n)];
    const double at = g.lift(node(c));
    const double shift = kTwoPi * std::round((val(c) - at) / kTwoPi);
    return g.lift(a) + shift;
  }

  double interpolate(double a) const {
    const double t0 = theta_.front();
    const double k = std::floor((a - t0) / kTwoPi);
    const double r = a - kTwoPi * k;  // in [t0, t0 + 2pi)
    auto it = std::upper_bound(theta_.begin(), theta_.end(), r);
    const long i = static_cast<long>(it - theta_.begin()) - 1;
    const double x0 = node(i), x1 = node(i + 1);
    const double h = x1 - x0;
    const double s = (r - x0) / h;
    double y;
    if (mode_ == Interpolation::kMonotoneCubic) {
      const double y0 = val(i), y1 = val(i + 1);
      const double m0 = slope_[static_cast<std::size_t>(i)];
      const double m1 = slope_[static_cast<std::size_t>((i + 1) % static_cast<long>(theta_.size()))];
      const double s2 = s * s, s3 = s2 * s;
      y = (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * m0 + (-2 * s3 + 3 * s2) * y1 +
          (s3 - s2) * h * m1;
    } else {
      y = (1 - s) * local_lift(i, r) + s * local_lift(i + 1, r);
    }
    return y + kTwoPi * k;
  }

  std::vector<double> theta_, value_, slope_;
  std::vector<Mobius> local_;
  Interpolation mode_ = Interpolation::kMonotoneCubic;
  std::shared_ptr<const Lift> exact_, exact_inverse_;
  std::optional<Mobius> mobius_;
  std::shared_ptr<const std::function<double(double)>> affine_;
};

}  // namespace adslab
