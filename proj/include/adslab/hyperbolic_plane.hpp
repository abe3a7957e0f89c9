#pragma once

#include <cmath>
#include <complex>

#include "adslab/errors.hpp"
#include "adslab/projective_line.hpp"

namespace adslab {

using Complex = std::complex<double>;

inline constexpr Complex kI{0.0, 1.0};

// Cayley map from the upper half plane to the disc, sending the boundary
// point tan(alpha/2) to e^{i alpha} and i to 0.
inline Complex uhp_to_disc(Complex z) { return (kI - z) / (z + kI); }
inline Complex disc_to_uhp(Complex w) { return kI * (1.0 - w) / (1.0 + w); }

inline Complex boundary_point(double alpha) { return std::polar(1.0, alpha); }

// Moebius map z -> (z + a) / (1 + conj(a) z) of the disc, sending 0 to a.
inline Complex disc_translate(Complex a, Complex z) { return (z + a) / (1.0 + std::conj(a) * z); }

inline double disc_distance(Complex z, Complex w) {
  const double r = std::abs(z - w) / std::abs(1.0 - std::conj(w) * z);
  return 2.0 * std::atanh(std::min(r, 1.0));
}

// Distance from the origin for a point at Euclidean radius r.
inline double disc_radius_to_distance(double r) { return 2.0 * std::atanh(r); }
inline double distance_to_disc_radius(double d) { return std::tanh(0.5 * d); }

// Action of a PSL(2,R) element on the disc through the Cayley map.
inline Complex apply_disc(const Mobius& g, Complex w) {
  const Mat2& m = g.matrix();
  const Complex z = disc_to_uhp(w);
  return uhp_to_disc((m.a * z + m.b) / (m.c * z + m.d));
}

inline Mobius disc_rotation(double phi) {
  const double c = std::cos(0.5 * phi), s = std::sin(0.5 * phi);
  return Mobius(c, s, -s, c);
}

// Hyperbolic translation along the geodesic through 0 in direction phi, by
// signed length d. It fixes the boundary points e^{i phi} (attracting) and
// -e^{i phi}.
inline Mobius disc_translation(double phi, double d) {
  // z -> e^{-d} z on the upper half plane attracts towards 0, i.e. alpha = 0.
  const Mobius stretch(std::exp(-0.5 * d), 0.0, 0.0, std::exp(0.5 * d));
  const Mobius r = disc_rotation(phi);
  return r * stretch * r.inverse();
}

}  // namespace adslab
