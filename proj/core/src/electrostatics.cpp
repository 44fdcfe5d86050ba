#include "critpairs/electrostatics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "critpairs/roots.hpp"

namespace critpairs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_abs2(const ComplexPolynomial& p, Complex z) {
  const ScaledEval se = eval_scaled(p, z);
  const double am = std::abs(se.mantissa);
  if (am == 0.0) return -kInf;
  return 2.0 * (std::log(am) + static_cast<double>(se.exp2) * std::numbers::ln2);
}

Complex velocity(const ComplexPolynomial& p, Complex z) {
  return -2.0 * std::conj(newton_log_derivative(p, z));
}

std::vector<Complex> expand_roots(const RootSet& rs) {
  std::vector<Complex> pts;
  pts.reserve(static_cast<std::size_t>(rs.total_count()));
  for (std::size_t i = 0; i < rs.roots.size(); ++i)
    for (int m = 0; m < rs.multiplicities[i]; ++m) pts.push_back(rs.roots[i]);
  return pts;
}

std::pair<double, long> nearest(const std::vector<Complex>& pts, Complex z) {
  double best = kInf;
  long idx = -1;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = std::abs(z - pts[i]);
    if (d < best) {
      best = d;
      idx = static_cast<long>(i);
    }
  }
  return {best, idx};
}

FlowLine trace_core(const ComplexPolynomial& p,
                    const std::vector<Complex>& zero_pts,
                    const std::vector<Complex>& crit_pts, Complex seed,
                    double step, long max_steps,
                    const std::optional<Window>& window) {
  FlowLine fl;
  fl.seed_point = seed;
  fl.points.push_back(seed);

  Complex z = seed;
  double g = log_abs2(p, z);

  for (long k = 0; k < max_steps; ++k) {
    const double scale = 1.0 + std::abs(z);
    const auto [dz, iz] = nearest(zero_pts, z);
    if (dz < 1e-7 * scale) {
      fl.terminal = FlowLine::Terminal::zero;
      fl.terminal_index = iz;
      return fl;
    }
    const Complex v = velocity(p, z);
    const double speed = std::abs(v);
    const auto [dc, ic] = nearest(crit_pts, z);
    if (ic >= 0 && dc < 1e-7 * scale && speed < 1.0) {
      fl.terminal = FlowLine::Terminal::critical;
      fl.terminal_index = ic;
      return fl;
    }
    if (!std::isfinite(speed) || speed == 0.0) {
      fl.stalled = true;
      break;
    }

    double dt = std::min(step, 0.1 * std::min(dz, dc)) / speed;
    bool advanced = false;
    for (int h = 0; h < 60; ++h) {
      const Complex k1 = v;
      const Complex k2 = velocity(p, z + (0.5 * dt) * k1);
      const Complex k3 = velocity(p, z + (0.5 * dt) * k2);
      const Complex k4 = velocity(p, z + dt * k3);
      const Complex znew = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (std::isfinite(znew.real()) && std::isfinite(znew.imag())) {
        const double gnew = log_abs2(p, znew);
        if (gnew <= g + 1e-12) {
          if (std::abs(znew - z) < 1e-15 * scale) break;  // step underflow
          z = znew;
          g = gnew;
          fl.points.push_back(z);
          advanced = true;
          break;
        }
      }
      dt *= 0.5;
      if (dt * speed < 1e-15 * scale) break;  // step underflow
    }
    if (!advanced) {
      fl.stalled = true;  // separatrix stall: report, never retry
      break;
    }
    if (window && !window->contains(z)) {
      fl.terminal = FlowLine::Terminal::left_domain;
      return fl;
    }
  }
  fl.terminal = FlowLine::Terminal::max_steps;
  return fl;
}

// Plane image of the chart circle |u| = r about xi under the Moebius map
// u -> (u + xi)/(1 - conj(xi) u). Moebius maps send circles to circles, so
// three image points determine it.
Circle chart_circle_image(Complex xi, double r) {
  const auto g = [&](Complex u) { return (u + xi) / (1.0 - std::conj(xi) * u); };
  const Complex a = g(Complex{r, 0.0});
  const Complex b = g(Complex{0.0, r});
  const Complex c = g(Complex{-r, 0.0});
  const double d = 2.0 * (a.real() * (b.imag() - c.imag()) +
                          b.real() * (c.imag() - a.imag()) +
                          c.real() * (a.imag() - b.imag()));
  Circle out;
  if (d == 0.0) {
    out.center = (a + b + c) / 3.0;
  } else {
    const double na = std::norm(a), nb = std::norm(b), nc = std::norm(c);
    out.center = Complex{
        (na * (b.imag() - c.imag()) + nb * (c.imag() - a.imag()) +
         nc * (a.imag() - b.imag())) /
            d,
        (na * (c.real() - b.real()) + nb * (a.real() - c.real()) +
         nc * (b.real() - a.real())) /
            d};
  }
  out.radius = std::abs(a - out.center);
  return out;
}

}  // namespace

long ChargeConfiguration::total_charge() const {
  long s = 0;
  for (const ChargeEntry& e : charges) s += e.charge;
  return s;
}

ChargeConfiguration divisor_of(const std::vector<Complex>& zeros) {
  ChargeConfiguration cc;
  cc.charges.reserve(zeros.size() + 1);
  for (Complex z : zeros) cc.charges.push_back({z, +1, false});
  cc.charges.push_back(
      {Complex{0.0, 0.0}, -static_cast<long>(zeros.size()), true});
  return cc;
}

Complex field(const ChargeConfiguration& cc, Complex z) {
  Complex acc{0.0, 0.0};
  for (const ChargeEntry& e : cc.charges) {
    if (e.at_infinity) continue;
    const Complex d = z - e.location;
    if (d == Complex{0.0, 0.0})
      throw PoleEvaluationError("field evaluated at a charge location");
    acc += static_cast<double>(e.charge) / d;
  }
  return acc;
}

double equilibrium_residual(const ComplexPolynomial& p, Complex c) {
  if (numerical_degree(p) < 1)
    throw std::invalid_argument("equilibrium residual needs degree >= 1");
  if (relative_residual(p, c) < 1e-13)
    throw ZeroCollisionError("equilibrium residual at a zero of p");
  return std::abs(newton_log_derivative(p, c));
}

bool Window::contains(Complex z) const {
  return z.real() >= x0 && z.real() <= x1 && z.imag() >= y0 && z.imag() <= y1;
}

FlowLine flow_trace(const ComplexPolynomial& p, Complex seed, double step,
                    long max_steps, const std::optional<Window>& window) {
  const long deg = numerical_degree(p);
  if (deg < 1) throw std::invalid_argument("flow needs degree >= 1");
  if (!(step > 0.0)) throw std::invalid_argument("flow step must be positive");
  if (relative_residual(p, seed) < 1e-13)
    throw std::invalid_argument("flow seed is a zero of p");
  const std::vector<Complex> zero_pts = expand_roots(roots(p));
  const std::vector<Complex> crit_pts =
      deg >= 2 ? expand_roots(roots(derivative(p))) : std::vector<Complex>{};
  return trace_core(p, zero_pts, crit_pts, seed, step, max_steps, window);
}

FigureData flow_figure(const ComplexPolynomial& p, const Window& window,
                       long seeds_per_side, std::optional<Complex> xi) {
  const long deg = numerical_degree(p);
  if (deg < 1) throw std::invalid_argument("figure needs degree >= 1");
  if (seeds_per_side < 0)
    throw std::invalid_argument("seeds_per_side must be >= 0");

  FigureData fd;
  fd.window = window;
  fd.zeros = expand_roots(roots(p));
  if (deg >= 2) fd.crits = expand_roots(roots(derivative(p)));
  fd.xi = xi;
  if (xi) {
    const double n = static_cast<double>(deg);
    fd.annulus_inner = chart_circle_image(*xi, std::pow(n, -1.1));
    fd.annulus_outer = chart_circle_image(*xi, std::pow(n, -0.9));
  }

  const double step = 0.01 * std::max(window.width(), window.height());
  const long max_steps = 8000;
  const auto trace = [&](Complex seed) {
    if (relative_residual(p, seed) < 1e-13) return;  // seed on a zero
    fd.flowlines.push_back(
        trace_core(p, fd.zeros, fd.crits, seed, step, max_steps, window));
  };
  for (long i = 0; i < seeds_per_side; ++i) {
    const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(seeds_per_side);
    trace(Complex{window.x0 + t * window.width(), window.y0});
    trace(Complex{window.x0 + t * window.width(), window.y1});
    trace(Complex{window.x0, window.y0 + t * window.height()});
    trace(Complex{window.x1, window.y0 + t * window.height()});
  }
  return fd;
}

}  // namespace critpairs
