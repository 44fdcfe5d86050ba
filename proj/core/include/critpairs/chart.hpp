#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "critpairs/complex_poly.hpp"
#include "critpairs/roots.hpp"

namespace critpairs {

// Mobius map taking xi to 0: the Kahler normal coordinate of z about xi for
// the round metric. Its inverse re-centers a normal coordinate at xi.
inline Complex mobius_to(Complex xi, Complex z) {
  return (z - xi) / (1.0 + std::conj(xi) * z);
}

inline Complex mobius_from(Complex xi, Complex u) {
  return (u + xi) / (1.0 - std::conj(xi) * u);
}

// d/du of mobius_from. Equals 1 + |xi|^2 at u = 0.
inline Complex dmobius_from(Complex xi, Complex u) {
  const Complex d = 1.0 - std::conj(xi) * u;
  return (1.0 + std::norm(xi)) / (d * d);
}

// mobius_from has a pole at u = 1/conj(xi); integrations in the normal chart
// must stay well inside it.
inline double chart_pole_radius(Complex xi) {
  const double axi = std::abs(xi);
  if (axi == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / axi;
}

// A circle of coordinate radius `radius` about xi in the given mode.
// to_ambient maps chart coordinate -> plane; jacobian is d(ambient)/d(chart).
struct Chart {
  CoordMode mode = CoordMode::euclidean;
  Complex center{0.0, 0.0};

  Complex to_ambient(Complex u) const {
    return mode == CoordMode::euclidean ? center + u : mobius_from(center, u);
  }
  Complex from_ambient(Complex z) const {
    return mode == CoordMode::euclidean ? z - center : mobius_to(center, z);
  }
  Complex jacobian(Complex u) const {
    return mode == CoordMode::euclidean ? Complex{1.0, 0.0}
                                        : dmobius_from(center, u);
  }
  double distance(Complex z) const { return std::abs(from_ambient(z)); }
  // Largest chart radius representable without approaching the pole.
  double max_radius() const {
    return mode == CoordMode::euclidean
               ? std::numeric_limits<double>::infinity()
               : 0.9 * chart_pole_radius(center);
  }
};

// Pairing radii N^{gamma +- eps - 1}; the window the counting statements use.
inline double pairing_radius(long N, double gamma, double eps, int sign) {
  if (N < 1) throw std::invalid_argument("pairing_radius: N must be >= 1");
  const double expo = gamma + (sign >= 0 ? eps : -eps) - 1.0;
  return std::pow(static_cast<double>(N), expo);
}

}  // namespace critpairs
