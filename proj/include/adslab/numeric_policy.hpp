#pragma once

namespace adslab {

// Tolerance bands used across the library. Exact identities of the geometry
// only hold up to these residuals in floating point.
struct NumericPolicy {
  double manifold = 1e-10;     // |q22(p) + 1| for points produced by operations
  double manifold_in = 1e-12;  // |q22(p) + 1| accepted by ADSPoint construction
  double null = 1e-12;         // |q22| for ideal points
  double causal = 1e-12;       // |q| <= causal => lightlike
  double tangency = 1e-10;     // |<p, v>| for tangent vectors
  double velocity = 1e-8;      // ||q(v)| - 1| for unit geodesic velocities
  double rank_one = 1e-10;     // |det M| for ideal points in the matrix model
  double zero_matrix = 1e-14;
  double chart_margin = 1e-6;  // |x4| / |x| for points mapped to the chart x4 = 1
  double planarity = 1e-9;     // plane-fit residual for degenerate hulls
};

inline constexpr NumericPolicy kPolicy{};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

}  // namespace adslab
