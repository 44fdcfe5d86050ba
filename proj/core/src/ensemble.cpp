#include "critpairs/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace critpairs {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp(const std::vector<double>& v) {
  double mx = kNegInf;
  for (double x : v) mx = std::max(mx, x);
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

// Radial density of the curvature form against dr, already including the
// polar Jacobian split used below: m_j = int r^{2j+1} e^{-N phi} mu(r) dr.
double radial_density(const RadialWeight& w, double r) {
  if (w.measure == RadialWeight::Measure::lebesgue) return 2.0;
  if (r == 0.0) return w.d2phi(0.0);  // phi'(r)/r -> phi''(0) for smooth phi
  return 0.5 * (w.d2phi(r) + w.dphi(r) / r);
}

// log integrand of m_j after r = e^t.
double log_integrand(const RadialWeight& w, long N, long j, double t) {
  const double r = std::exp(t);
  const double mu = radial_density(w, r);
  if (!(mu > 0.0)) return kNegInf;
  return (2.0 * j + 2.0) * t - static_cast<double>(N) * w.phi(r) + std::log(mu);
}

double log_moment_quadrature(const RadialWeight& w, long N, long j,
                             long nodes) {
  // Coarse mode scan, then window expansion until the integrand has fallen
  // 60 log-units on both sides. Failure to fall off on the right is the
  // divergence signal.
  double t_mode = 0.0, f_mode = kNegInf;
  for (double t = -40.0; t <= 40.0; t += 0.25) {
    const double f = log_integrand(w, N, j, t);
    if (f > f_mode) {
      f_mode = f;
      t_mode = t;
    }
  }
  if (f_mode == kNegInf)
    throw WeightInadmissibleError(
        "make_radial: integrand vanished everywhere for moment j=" +
            std::to_string(j),
        j);
  const double drop = 60.0;
  double t_hi = t_mode;
  {
    double step = 0.5;
    while (log_integrand(w, N, j, t_hi) > f_mode - drop) {
      t_hi += step;
      step = std::min(2.0 * step, 8.0);
      if (t_hi > t_mode + 200.0)
        throw WeightInadmissibleError(
            "make_radial: moment divergent (integrand does not decay) at j=" +
                std::to_string(j),
            j);
    }
  }
  double t_lo = t_mode;
  {
    double step = 0.5;
    while (log_integrand(w, N, j, t_lo) > f_mode - drop) {
      t_lo -= step;
      step = std::min(2.0 * step, 8.0);
      if (t_lo < t_mode - 400.0) break;  // integrand flat toward r=0: harmless
    }
  }

  auto trapezoid = [&](long m) {
    const double h = (t_hi - t_lo) / static_cast<double>(m - 1);
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(m));
    for (long i = 0; i < m; ++i) {
      double f = log_integrand(w, N, j, t_lo + h * static_cast<double>(i));
      if (i == 0 || i == m - 1) f -= std::numbers::ln2;
      terms.push_back(f);
    }
    return logsumexp(terms) + std::log(h);
  };

  long m = std::max(nodes, 16L);
  double prev = trapezoid(m);
  for (int pass = 0; pass < 10; ++pass) {
    m *= 2;
    const double cur = trapezoid(m);
    const double rel = std::abs(cur - prev);
    prev = cur;
    if (rel <= 1e-9) return cur;
  }
  throw std::runtime_error(
      "make_radial: moment quadrature failed to converge at j=" +
      std::to_string(j));
}

}  // namespace

RadialWeight fs_weight(bool exact_moments) {
  RadialWeight w;
  w.name = "fs";
  w.phi = [](double r) { return std::log1p(r * r); };
  w.dphi = [](double r) { return 2.0 * r / (1.0 + r * r); };
  w.d2phi = [](double r) {
    const double q = 1.0 + r * r;
    return 2.0 * (1.0 - r * r) / (q * q);
  };
  w.kappa = 1.0;
  w.measure = RadialWeight::Measure::curvature;
  if (exact_moments)
    w.exact_log_moment = [](long j, long N) {
      // int_0^inf 2 r^{2j+1} (1+r^2)^{-N-2} dr = B(j+1, N+1-j)
      return std::lgamma(j + 1.0) + std::lgamma(N + 1.0 - j) -
             std::lgamma(N + 2.0);
    };
  return w;
}

RadialWeight gaussian_planar_weight() {
  RadialWeight w;
  w.name = "gaussian-planar";
  w.phi = [](double r) { return r * r; };
  w.dphi = [](double r) { return 2.0 * r; };
  w.d2phi = [](double) { return 2.0; };
  w.kappa = 8.0;
  w.measure = RadialWeight::Measure::curvature;
  w.exact_log_moment = [](long j, long N) {
    // int_0^inf 2 r^{2j+1} e^{-N r^2} dr = j! / N^{j+1}
    return std::lgamma(j + 1.0) - (j + 1.0) * std::log(static_cast<double>(N));
  };
  return w;
}

std::vector<double> GaussianEnsemble::log_multiplier() const {
  std::vector<double> lm = basis_norms;
  const double mx = *std::max_element(lm.begin(), lm.end());
  for (double& x : lm) x -= mx;
  return lm;
}

double GaussianEnsemble::phi_metric(double r) const {
  if (kind == Kind::su2) return std::log1p(r * r);
  return weight->phi(r);
}

double GaussianEnsemble::dphi_metric(double r) const {
  if (kind == Kind::su2) return 2.0 * r / (1.0 + r * r);
  return weight->dphi(r);
}

GaussianEnsemble make_su2(long N) {
  if (N < 1) throw std::invalid_argument("make_su2: N must be >= 1");
  GaussianEnsemble e;
  e.N = N;
  e.kind = GaussianEnsemble::Kind::su2;
  e.basis_norms.resize(static_cast<std::size_t>(N) + 1);
  const double lgN = std::lgamma(static_cast<double>(N) + 1.0);
  for (long j = 0; j <= N; ++j)
    e.basis_norms[static_cast<std::size_t>(j)] =
        0.5 * (lgN - std::lgamma(j + 1.0) - std::lgamma(N - j + 1.0));
  return e;
}

GaussianEnsemble make_radial(long N, const RadialWeight& w, long quad_nodes) {
  if (N < 1) throw std::invalid_argument("make_radial: N must be >= 1");
  if (!w.exact_log_moment && (!w.phi || !w.dphi || !w.d2phi))
    throw std::invalid_argument(
        "make_radial: weight needs phi, dphi, d2phi (or exact moments)");
  GaussianEnsemble e;
  e.N = N;
  e.kind = GaussianEnsemble::Kind::radial;
  e.weight = w;
  e.basis_norms.resize(static_cast<std::size_t>(N) + 1);
  for (long j = 0; j <= N; ++j) {
    const double log_m = w.exact_log_moment
                             ? w.exact_log_moment(j, N)
                             : log_moment_quadrature(w, N, j, quad_nodes);
    e.basis_norms[static_cast<std::size_t>(j)] = -0.5 * log_m;
  }
  return e;
}

ComplexPolynomial sample(const GaussianEnsemble& e, CounterRng& rng) {
  const std::vector<double> lm = e.log_multiplier();
  ComplexPolynomial p;
  p.coeffs.resize(lm.size());
  for (std::size_t j = 0; j < lm.size(); ++j)
    p.coeffs[j] = rng.complex_gaussian() * std::exp(lm[j]);
  return p;
}

ConditionalEnsemble condition_at(const GaussianEnsemble& e, Complex xi) {
  ConditionalEnsemble ce;
  ce.base = e;
  ce.xi = xi;
  const std::vector<double> lm = e.log_multiplier();
  const std::size_t n = lm.size();
  ce.deflation_vector.assign(n, Complex(0.0, 0.0));
  const double axi = std::abs(xi);
  if (axi == 0.0) {
    // K(z,0)/K(0,0) = 1: only the constant coefficient survives.
    ce.deflation_vector[0] = Complex(1.0, 0.0);
    return ce;
  }
  const double lax = std::log(axi);
  const double phase = std::arg(xi);
  std::vector<double> terms(n);
  for (std::size_t j = 0; j < n; ++j)
    terms[j] = 2.0 * lm[j] + 2.0 * static_cast<double>(j) * lax;
  const double log_k = logsumexp(terms);
  for (std::size_t j = 0; j < n; ++j) {
    const double lmag =
        2.0 * lm[j] + static_cast<double>(j) * lax - log_k;
    const double ang = -phase * static_cast<double>(j);
    ce.deflation_vector[j] =
        std::exp(lmag) * Complex(std::cos(ang), std::sin(ang));
  }
  return ce;
}

ComplexPolynomial sample_conditional(const ConditionalEnsemble& ce,
                                     CounterRng& rng) {
  ComplexPolynomial p = sample(ce.base, rng);
  const ScaledEval s = eval_scaled(p, ce.xi);
  for (std::size_t j = 0; j < p.coeffs.size(); ++j) {
    const Complex t = s.mantissa * ce.deflation_vector[j];
    p.coeffs[j] -= Complex(std::ldexp(t.real(), static_cast<int>(s.exp2)),
                           std::ldexp(t.imag(), static_cast<int>(s.exp2)));
  }
  return p;
}

ReferenceSection make_reference(const GaussianEnsemble& e,
                                ComplexPolynomial sigma) {
  if (numerical_degree(sigma) < 0)
    throw std::invalid_argument("make_reference: sigma is identically zero");
  if (numerical_degree(sigma) > e.N)
    throw std::invalid_argument("make_reference: deg(sigma) exceeds N");
  ReferenceSection rs;
  rs.sigma = std::move(sigma);
  rs.N = e.N;
  rs.kind = e.kind;
  rs.weight = e.weight;
  return rs;
}

namespace {
double phi_metric_of(const ReferenceSection& rs, double r) {
  if (rs.kind == GaussianEnsemble::Kind::su2) return std::log1p(r * r);
  return rs.weight->phi(r);
}
double dphi_metric_of(const ReferenceSection& rs, double r) {
  if (rs.kind == GaussianEnsemble::Kind::su2) return 2.0 * r / (1.0 + r * r);
  return rs.weight->dphi(r);
}
}  // namespace

double phi_sigma(const ReferenceSection& rs, Complex z,
                 PotentialConvention conv) {
  const ScaledEval e = eval_scaled(rs.sigma, z);
  if (e.mantissa == Complex(0.0, 0.0))
    throw PotentialSingularityError("phi_sigma: z is a zero of sigma");
  const double log_sigma = std::log(std::abs(e.mantissa)) +
                           static_cast<double>(e.exp2) * std::numbers::ln2;
  const double v = log_sigma -
                   0.5 * static_cast<double>(rs.N) * phi_metric_of(rs, std::abs(z));
  return conv == PotentialConvention::section_log ? v : -2.0 * v;
}

Complex dphi_sigma(const ReferenceSection& rs, Complex z,
                   PotentialConvention conv) {
  const ScaledEval e = eval_scaled(rs.sigma, z);
  if (e.mantissa == Complex(0.0, 0.0))
    throw PotentialSingularityError("dphi_sigma: z is a zero of sigma");
  const double r = std::abs(z);
  // d/dz of phi(|z|) is phi'(r) zbar / (2r); smooth radial phi has phi'(0)=0.
  const Complex dmetric =
      r == 0.0 ? Complex(0.0, 0.0)
               : Complex(dphi_metric_of(rs, r) / (2.0 * r)) * std::conj(z);
  const Complex v = 0.5 * newton_log_derivative(rs.sigma, z) -
                    0.5 * static_cast<double>(rs.N) * dmetric;
  return conv == PotentialConvention::section_log ? v : -2.0 * v;
}

double efield_condition_margin(const ReferenceSection& rs, Complex xi,
                               double gamma) {
  if (!(gamma >= 0.0 && gamma < 0.5))
    throw std::invalid_argument(
        "efield_condition_margin: gamma must lie in [0, 1/2)");
  const Complex d = dphi_sigma(rs, xi, PotentialConvention::section_log);
  return std::abs(d) / std::pow(static_cast<double>(rs.N), 1.0 - gamma);
}

}  // namespace critpairs
