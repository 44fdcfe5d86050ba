#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "critpairs/complex_poly.hpp"

namespace critpairs {

// One delta charge of a divisor on the sphere. Entries flagged at_infinity
// ignore location; they keep configurations neutral but never contribute to
// field values in the affine chart.
struct ChargeEntry {
  Complex location{0.0, 0.0};
  long charge = 0;  // nonzero
  bool at_infinity = false;
};

struct ChargeConfiguration {
  std::vector<ChargeEntry> charges;

  long total_charge() const;
  bool neutral() const { return total_charge() == 0; }
};

// Divisor of a polynomial with the given zero list: +1 per zero (repeats give
// multiplicity), balanced by -count at infinity. Always neutral.
ChargeConfiguration divisor_of(const std::vector<Complex>& zeros);

struct PoleEvaluationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ZeroCollisionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Electric co-field sum m_j / (z - z_j) over the finite charges. For the
// divisor of p this equals p'(z)/p(z).
Complex field(const ChargeConfiguration& cc, Complex z);

// |p'(c)/p(c)|. Zero exactly at the equilibria of the co-field, which are
// the holomorphic critical points of p.
double equilibrium_residual(const ComplexPolynomial& p, Complex c);

// Axis-aligned chart window [x0,x1] x [y0,y1].
struct Window {
  double x0 = -1.6;
  double x1 = 1.6;
  double y0 = -1.6;
  double y1 = 1.6;

  bool contains(Complex z) const;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

struct FlowLine {
  enum class Terminal { zero, critical, max_steps, left_domain };

  std::vector<Complex> points;  // seed first; log|p|^2 decreases along it
  Terminal terminal = Terminal::max_steps;
  long terminal_index = -1;  // into the zero / critical point lists
  Complex seed_point{0.0, 0.0};
  bool stalled = false;  // displacement underflowed before max_steps
};

// Steepest-descent trace of log|p|^2 from seed: dz/dt = -conj(2 p'/p),
// adaptive RK4 with per-step displacement capped at min(step, 0.1 * distance
// to the nearest zero or critical point). Stops at a zero, at a critical
// point, after max_steps, or on leaving the window when one is given.
FlowLine flow_trace(const ComplexPolynomial& p, Complex seed, double step,
                    long max_steps,
                    const std::optional<Window>& window = std::nullopt);

struct Circle {
  Complex center{0.0, 0.0};
  double radius = 0.0;
};

struct FigureData {
  Window window;
  std::vector<Complex> zeros;
  std::vector<Complex> crits;
  std::optional<Complex> xi;
  // Plane images of the chart circles of radius N^(-1 -/+ 1/10) about xi.
  std::optional<Circle> annulus_inner;
  std::optional<Circle> annulus_outer;
  std::vector<FlowLine> flowlines;
};

// Figure payload: all zeros and critical points of p, flow lines seeded on a
// boundary grid (seeds_per_side per window edge), and, when xi is given, the
// pairing annulus mapped from normal coordinates at xi.
FigureData flow_figure(const ComplexPolynomial& p, const Window& window,
                       long seeds_per_side,
                       std::optional<Complex> xi = std::nullopt);

}  // namespace critpairs
