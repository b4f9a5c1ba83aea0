#pragma once

#include <cmath>

namespace dampwave {

/// Value and first two derivatives of a scalar profile at one point.
struct Jet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// C-infinity step h(x) = g(x) / (g(x) + g(1 - x)) with g(x) = exp(-1/x) for
/// x > 0 and g = 0 otherwise. h = 0 on (-inf, 0], h = 1 on [1, inf).
///
/// Evaluated as h = 1 / (1 + exp(s)), s = 1/x - 1/(1-x), which never forms
/// the underflowing ratio g(1-x)/g(x) explicitly.
inline Jet smooth_step(double x) {
  if (x <= 0.0) return {0.0, 0.0, 0.0};
  if (x >= 1.0) return {1.0, 0.0, 0.0};
  const double y = 1.0 - x;
  const double s = 1.0 / x - 1.0 / y;
  const double h = 1.0 / (1.0 + std::exp(s));
  // h(1-h) = 1 / (4 cosh^2(s/2)); cosh overflow gives an exact zero.
  const double c = std::cosh(0.5 * s);
  const double hh = 1.0 / (4.0 * c * c);
  const double m = 1.0 / (x * x) + 1.0 / (y * y);
  const double dm = -2.0 / (x * x * x) + 2.0 / (y * y * y);
  const double d1 = hh * m;
  const double d2 = d1 * (1.0 - 2.0 * h) * m + hh * dm;
  return {h, d1, d2};
}

/// Plateau cutoff: 1 on [0, inner], 0 on [outer, inf), smooth in between.
inline Jet plateau_cutoff(double s, double inner, double outer) {
  const double width = outer - inner;
  const Jet h = smooth_step((outer - s) / width);
  return {h.value, -h.d1 / width, h.d2 / (width * width)};
}

/// The test-function profile used for both the time bump and the radial bump:
/// 1 on [0, 1/2], 0 on [1, inf).
inline Jet unit_bump(double s) { return plateau_cutoff(s, 0.5, 1.0); }

}  // namespace dampwave
