#include "critpairs/count_formulas.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "critpairs/pairwise.hpp"

namespace critpairs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void validate(const QuadratureSpec& q) {
  if (q.nodes < 16) throw std::invalid_argument("quadrature: nodes must be >= 16");
  if (q.nodes % 2 != 0) throw std::invalid_argument("quadrature: nodes must be even");
  if (q.rule != QuadratureSpec::Rule::trapezoid_periodic)
    throw std::invalid_argument("quadrature: unknown rule");
}

void check_radius(Complex xi, double r, CoordMode mode) {
  if (!(r > 0.0)) throw std::invalid_argument("contour radius must be positive");
  if (mode == CoordMode::fs_normal && r >= 0.9 * chart_pole_radius(xi))
    throw std::invalid_argument("contour radius outside the chart validity disk");
}

Complex pairwise_csum(const std::vector<Complex>& v) { return pairwise_sum(v); }

// Diagonal data at one contour node.
struct NodeData {
  Complex z;        // ambient point
  Complex gp;       // chart jacobian g'(u)
  Complex phase;    // e^{i theta}
  double logF;      // log D11(z,z)
  Complex ratio21;  // D21(z,z)/D11(z,z)
};

NodeData eval_node(const BergmanKernel& k, Complex xi, double r, double theta,
                   CoordMode mode) {
  NodeData nd;
  nd.phase = std::polar(1.0, theta);
  const Complex u = r * nd.phase;
  if (mode == CoordMode::fs_normal) {
    nd.z = mobius_from(xi, u);
    nd.gp = dmobius_from(xi, u);
  } else {
    nd.z = xi + u;
    nd.gp = Complex{1.0, 0.0};
  }
  const KernelDerivatives d = kernel_derivs(k, nd.z, nd.z);
  const LogComplex& f = d.D[1][1];
  if (f.is_zero() || std::cos(f.phase) <= 0.0)
    throw KernelDegeneracyError("second-derivative diagonal not positive on contour");
  nd.logF = f.log_mod;
  nd.ratio21 = (d.D[2][1] / f).value();
  return nd;
}

Complex expected_sum(const BergmanKernel& k, Complex xi, double r, long n,
                     CoordMode mode) {
  std::vector<Complex> terms(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const NodeData nd = eval_node(k, xi, r,
                                  kTwoPi * static_cast<double>(i) /
                                      static_cast<double>(n),
                                  mode);
    terms[static_cast<std::size_t>(i)] = nd.gp * nd.ratio21 * nd.phase;
  }
  return (r / static_cast<double>(n)) * pairwise_csum(terms);
}

// One pass of the double contour sum at n nodes per circle. Prefactor
// r^2/pi^2 from writing Var as a double contour integral of d_z d_w of the
// log-covariance 4(G(P)-G(0)); the r->0 Bernoulli limit Var/E -> 1 and an
// exact small-N Monte Carlo pin it down (see tests).
Complex variance_sum(const BergmanKernel& k, Complex xi, double r, long n,
                     bool offset_pair, CoordMode mode) {
  const double step = kTwoPi / static_cast<double>(n);
  const double off = offset_pair ? 0.5 : 0.0;
  std::vector<NodeData> g1(static_cast<std::size_t>(n)), g2(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    g1[static_cast<std::size_t>(i)] =
        eval_node(k, xi, r, step * static_cast<double>(i), mode);
    g2[static_cast<std::size_t>(i)] =
        eval_node(k, xi, r, step * (static_cast<double>(i) + off), mode);
  }
  auto pair_I = [&](const NodeData& a, double theta2_shift, long j) -> Complex {
    const NodeData& b = g2[static_cast<std::size_t>(j)];
    Complex w = b.z;
    Complex gpw = b.gp;
    double logFw = b.logF;
    Complex ratio21w = b.ratio21;
    KernelDerivatives d = kernel_derivs(k, a.z, w);
    double logP = d.D[1][1].log_mod - 0.5 * (a.logF + logFw);
    double one_m_p2 = -std::expm1(2.0 * logP);
    if (one_m_p2 < 1e-12) {
      // Limiting form: evaluate at a slightly inflated angular separation;
      // the integrand is bounded and Lipschitz across the diagonal.
      const double theta2 = theta2_shift + 1e-5 * step;
      const NodeData nb = eval_node(k, xi, r, theta2, mode);
      w = nb.z;
      gpw = nb.gp;
      logFw = nb.logF;
      ratio21w = nb.ratio21;
      d = kernel_derivs(k, a.z, w);
      logP = d.D[1][1].log_mod - 0.5 * (a.logF + logFw);
      one_m_p2 = -std::expm1(2.0 * logP);
      if (one_m_p2 < 1e-12)
        throw QuadratureFailure("variance integrand degenerate at inflated separation");
    }
    const Complex cz = 0.5 * ((d.D[2][1] / d.D[1][1]).value() - a.ratio21);
    const Complex cw =
        0.5 * (std::conj((d.D[1][2] / d.D[1][1]).value()) - ratio21w);
    return std::exp(2.0 * logP) * (a.gp * cz) * (gpw * cw) / one_m_p2;
  };
  std::vector<Complex> terms;
  terms.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const NodeData& a = g1[static_cast<std::size_t>(i)];
    for (long j = 0; j < n; ++j) {
      const double theta2 = step * (static_cast<double>(j) + off);
      const Complex I = pair_I(a, theta2, j);
      terms.push_back(a.phase * std::polar(1.0, theta2) * I);
    }
  }
  // r^2/pi^2 is pinned by two independent checks: Var/E -> 1 as r -> 0
  // (the count becomes Bernoulli) and direct Monte Carlo at degree 2.
  const double pref = r * r / (std::numbers::pi * std::numbers::pi);
  const double h2 = step * step;
  return pref * h2 * pairwise_csum(terms);
}

}  // namespace

double scaled_radius(double chart_r, long N) {
  return chart_r * std::sqrt(static_cast<double>(N));
}

double chart_radius(double scaled_r, long N) {
  return scaled_r / std::sqrt(static_cast<double>(N));
}

double expected_count(const BergmanKernel& k_xi, Complex xi, double r,
                      const QuadratureSpec& q, CoordMode mode) {
  validate(q);
  check_radius(xi, r, mode);
  Complex prev = expected_sum(k_xi, xi, r, q.nodes, mode);
  long n = 2 * q.nodes;
  Complex cur = expected_sum(k_xi, xi, r, n, mode);
  while (std::abs(cur - prev) > 1e-6 * std::max(1.0, std::abs(cur))) {
    if (n >= 16 * q.nodes)
      throw QuadratureFailure("expected_count did not converge under node doubling");
    prev = cur;
    n *= 2;
    cur = expected_sum(k_xi, xi, r, n, mode);
  }
  const double scale = std::max(1.0, std::abs(cur));
  if (std::abs(cur.imag()) > 1e-6 * scale)
    throw QuadratureFailure("expected_count has non-real residual");
  return cur.real();
}

double variance_count(const BergmanKernel& k_xi, Complex xi, double r,
                      const QuadratureSpec& q, CoordMode mode) {
  validate(q);
  check_radius(xi, r, mode);
  Complex vn = variance_sum(k_xi, xi, r, q.nodes, q.offset_pair, mode);
  Complex v2n = variance_sum(k_xi, xi, r, 2 * q.nodes, q.offset_pair, mode);
  Complex v = q.richardson ? (4.0 * v2n - vn) / 3.0 : v2n;
  long n = 2 * q.nodes;
  while (true) {
    const Complex v4n =
        variance_sum(k_xi, xi, r, 2 * n, q.offset_pair, mode);
    const Complex next = q.richardson ? (4.0 * v4n - v2n) / 3.0 : v4n;
    if (std::abs(next - v) <= 1e-5 * std::max(1.0, std::abs(next))) {
      v = next;
      break;
    }
    if (n >= 8 * q.nodes)
      throw QuadratureFailure("variance_count did not converge under node doubling");
    vn = v2n;
    v2n = v4n;
    v = next;
    n *= 2;
  }
  const double scale = std::max(1.0, std::abs(v));
  if (std::abs(v.imag()) > 1e-6 * scale)
    throw QuadratureFailure("variance_count has non-real residual");
  if (v.real() < -1e-6)
    throw QuadratureFailure("variance_count negative beyond tolerance");
  return v.real();
}

double argument_principle_count(const ComplexPolynomial& p, Complex center,
                                double r, const QuadratureSpec& q) {
  validate(q);
  if (!(r > 0.0)) throw std::invalid_argument("contour radius must be positive");
  const long deg = numerical_degree(p);
  if (deg < 0) throw std::invalid_argument("argument principle of the zero polynomial");
  if (deg == 0) return 0.0;
  const double big_ratio =
      static_cast<double>(deg) / (1e-6 * r);  // root within 1e-6 r of contour
  auto winding = [&](long n) {
    std::vector<Complex> terms(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
      const Complex ph = std::polar(1.0, kTwoPi * static_cast<double>(i) /
                                             static_cast<double>(n));
      const Complex ratio = newton_log_derivative(p, center + r * ph);
      if (std::abs(ratio) >= big_ratio)
        throw ContourCollisionError("root too close to the counting contour");
      terms[static_cast<std::size_t>(i)] = ratio * ph;
    }
    return (r / static_cast<double>(n)) * pairwise_csum(terms);
  };
  Complex prev = winding(q.nodes);
  Complex cur = winding(2 * q.nodes);
  long n = 2 * q.nodes;
  while (std::abs(cur - prev) > 1e-8 && n < 16 * q.nodes) {
    n *= 2;
    prev = cur;
    cur = winding(n);
  }
  const double rounded = std::round(cur.real());
  if (std::abs(cur - Complex(rounded, 0.0)) > 1e-6)
    throw ContourCollisionError("winding number did not settle on an integer");
  return cur.real();
}

}  // namespace critpairs
