#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include <boost/numeric/odeint.hpp>

namespace adslab {

// Reference values for radial solutions of the Liouville equation: in
// geodesic polar coordinates u'' + coth(d) u' + e^{2u} K(d) + 1 = 0 with
// u'(0) = 0, solved by shooting on u(0) to match u(R) = g.
class RadialOracle {
 public:
  RadialOracle(std::function<double(double)> K, double R, double g) : K_(std::move(K)), R_(R) {
    double lo = -5, hi = 3;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double v = shoot(mid, {R_}).back();
      if (!(v <= g))
        hi = mid;  // overshoot or blow-up
      else
        lo = mid;
    }
    u0_ = 0.5 * (lo + hi);
  }

  double u0() const { return u0_; }

  // Values at the requested distances (any order, each in [0, R]).
  std::vector<double> values(const std::vector<double>& d) const {
    std::vector<double> sorted(d);
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    const std::vector<double> v = shoot(u0_, sorted);
    std::map<double, double> table;
    for (std::size_t i = 0; i < sorted.size(); ++i) table[sorted[i]] = v[i];
    std::vector<double> out;
    for (double x : d) out.push_back(table.at(x));
    return out;
  }

 private:
  using State = std::array<double, 2>;
  static constexpr double kStart = 1e-6;

  // Series start u = u0 + c d^2 near 0, then dense-output Dormand-Prince.
  std::vector<double> shoot(double u0, const std::vector<double>& at) const {
    const double c = -(std::exp(2 * u0) * K_(0) + 1) / 4;
    std::vector<double> out;
    std::vector<double> times{kStart};
    for (double t : at) {
      if (t <= kStart)
        out.push_back(u0 + c * t * t);
      else
        times.push_back(t);
    }
    State s{u0 + c * kStart * kStart, 2 * c * kStart};
    auto rhs = [this](const State& x, State& dx, double d) {
      dx[0] = x[1];
      dx[1] = -x[1] / std::tanh(d) - std::exp(2 * x[0]) * K_(d) - 1;
    };
    bool first = true;
    auto obs = [&](const State& x, double) {
      if (first) {
        first = false;
        return;
      }
      out.push_back(x[0]);
    };
    namespace ode = boost::numeric::odeint;
    ode::integrate_times(ode::make_dense_output(1e-13, 1e-13, ode::runge_kutta_dopri5<State>()), rhs, s,
                         times.begin(), times.end(), 1e-3, obs);
    while (out.size() < at.size()) out.push_back(std::nan(""));  // blow-up stops the stepper early
    return out;
  }

  std::function<double(double)> K_;
  double R_;
  double u0_ = 0;
};

}  // namespace adslab
