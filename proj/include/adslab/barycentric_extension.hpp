#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "adslab/circle_map.hpp"
#include "adslab/hyperbolic_plane.hpp"

namespace adslab {

struct BarycentricOptions {
  std::size_t nodes = 512;
  double damping = 0.5;
  double tolerance = 1e-10;
  std::size_t max_iterations = 10000;
};

// Douady-Earle extension of f evaluated at z: the conformal barycenter of the
// push-forward under f of harmonic measure seen from z.
inline Complex barycentric_extension(const CircleMap& f, Complex z, const BarycentricOptions& opt = {}) {
  if (!(std::abs(z) < 1.0 - 1e-10)) fail(ErrorKind::kInvalidInput, "point not inside the disc");
  // Harmonic measure at z is the image of the uniform measure under T_z.
  std::vector<Complex> image(opt.nodes);
  for (std::size_t j = 0; j < opt.nodes; ++j) {
    const double phi = kTwoPi * (static_cast<double>(j) + 0.5) / static_cast<double>(opt.nodes);
    const Complex zeta = disc_translate(z, std::polar(1.0, phi));
    image[j] = std::polar(1.0, f(std::arg(zeta)));
  }
  Complex w = 0.0;
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    Complex mean = 0.0;
    for (const Complex& u : image) mean += (u - w) / (1.0 - std::conj(w) * u);
    mean /= static_cast<double>(opt.nodes);
    if (std::abs(mean) <= opt.tolerance) return w;
    w = disc_translate(w, opt.damping * mean);
  }
  fail(ErrorKind::kNoConvergence, "barycenter iteration did not converge");
}

}  // namespace adslab
