#pragma once

#include <stdexcept>

#include "critpairs/chart.hpp"
#include "critpairs/complex_poly.hpp"
#include "critpairs/kernel.hpp"
#include "critpairs/roots.hpp"

namespace critpairs {

// Periodic-trapezoid contour quadrature parameters. nodes is the per-circle
// count (even, >= 16); offset_pair staggers the second grid of the double
// integral by half a step so theta1 == theta2 never occurs; richardson
// extrapolates the double integral over nodes and 2*nodes.
struct QuadratureSpec {
  long nodes = 64;
  enum class Rule { trapezoid_periodic };
  Rule rule = Rule::trapezoid_periodic;
  bool offset_pair = true;
  bool richardson = true;
};

struct QuadratureFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct KernelDegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ContourCollisionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The canonical map between chart radii (what the operations take) and the
// sqrt(N)-scaled radii of the universal-limit convention.
double scaled_radius(double chart_r, long N);
double chart_radius(double scaled_r, long N);

// Mean number of zeros of the derivative field of the Gaussian ensemble with
// covariance k_xi inside the mode-distance-r disk about xi: contour integral
// of the holomorphic log-derivative of F(z) = D11(z,z) around the circle.
// fs_normal reads r as an unscaled chart radius, euclidean as |z - xi| = r.
double expected_count(const BergmanKernel& k_xi, Complex xi, double r,
                      const QuadratureSpec& q,
                      CoordMode mode = CoordMode::fs_normal);

// Variance of the same count: staggered double contour quadrature of
// e^{i(theta1+theta2)} I(z,w) with I = P^2 (dlogP/du1)(dlogP/du2)/(1-P^2).
double variance_count(const BergmanKernel& k_xi, Complex xi, double r,
                      const QuadratureSpec& q,
                      CoordMode mode = CoordMode::fs_normal);

// Winding-number count of zeros of p inside the euclidean disk |z-center|<r,
// via the argument principle; returns the raw quadrature value, within 1e-6
// of an integer when the contour is clear of roots.
double argument_principle_count(const ComplexPolynomial& p, Complex center,
                                double r, const QuadratureSpec& q);

}  // namespace critpairs
