#pragma once

#include <cmath>

namespace proxgen {

// Smooth-L1 style penalty: ~s^2/2 near zero, ~|s| for large s.
inline double charbonnier(double s) { return std::sqrt(s * s + 1.0) - 1.0; }

inline double charbonnier_grad(double s) { return s / std::sqrt(s * s + 1.0); }

// Saturating penalty: ~x^2/sigma^2 near zero, -> 1 for |x| >> sigma.
inline double geman_mcclure(double x, double sigma) {
  const double x2 = x * x;
  return x2 / (x2 + sigma * sigma);
}

inline double geman_mcclure_grad(double x, double sigma) {
  const double s2 = sigma * sigma;
  const double d = x * x + s2;
  return 2.0 * x * s2 / (d * d);
}

}  // namespace proxgen
