#include "critpairs/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace critpairs {

namespace {

double falling(long x, long k) {
  double p = 1.0;
  for (long i = 0; i < k; ++i) p *= static_cast<double>(x - i);
  return p;
}

double binom_small(long n, long k) {
  if (k < 0 || k > n) return 0.0;
  double p = 1.0;
  for (long i = 0; i < k; ++i)
    p *= static_cast<double>(n - i) / static_cast<double>(i + 1);
  return p;
}

// d^a/dz^a d^b/dwbar^b (1 + z wbar)^N.
LogComplex su2_D(long N, long a, long b, Complex z, Complex w) {
  const Complex s = z * std::conj(w);
  LogComplex acc = LogComplex::zero();
  const long kmax = std::min(a, b);
  for (long k = 0; k <= kmax; ++k) {
    const double coef = binom_small(b, k) * falling(a, k) * falling(N, a + b - k);
    if (coef == 0.0) continue;
    LogComplex term = LogComplex::from_real(coef);
    term = term * pow_int(LogComplex::from(std::conj(w)), a - k);
    term = term * pow_int(LogComplex::from(z), b - k);
    term = term * pow_int(log1p_complex_as_log(s), N - a - b + k);
    acc = acc + term;
  }
  return acc;
}

// Termwise monomial sum over log_norm2.
LogComplex radial_D(const std::vector<double>& ln2, long a, long b, Complex z,
                    Complex w) {
  const Complex wb = std::conj(w);
  const bool z0 = (z == Complex(0.0, 0.0));
  const bool w0 = (wb == Complex(0.0, 0.0));
  const double lz = z0 ? 0.0 : std::log(std::abs(z));
  const double az = z0 ? 0.0 : std::arg(z);
  const double lw = w0 ? 0.0 : std::log(std::abs(wb));
  const double aw = w0 ? 0.0 : std::arg(wb);
  LogComplex acc = LogComplex::zero();
  double peak = -std::numeric_limits<double>::infinity();
  const long n = static_cast<long>(ln2.size());
  for (long j = std::max(a, b); j < n; ++j) {
    if (z0 && j != a) continue;  // z^{j-a} factor
    if (w0 && j != b) continue;  // wbar^{j-b} factor
    const double fab = falling(j, a) * falling(j, b);
    if (fab == 0.0) continue;
    const double lm = ln2[static_cast<std::size_t>(j)] + std::log(fab) +
                      static_cast<double>(j - a) * lz +
                      static_cast<double>(j - b) * lw;
    const double ph = static_cast<double>(j - a) * az +
                      static_cast<double>(j - b) * aw;
    acc = acc + LogComplex::from_polar(lm, ph);
    peak = std::max(peak, std::max(acc.log_mod, lm));
  }
  // Cumulative cancellation across the whole sum: fewer than twelve digits
  // survive relative to the largest intermediate.
  if (!acc.is_zero() && acc.log_mod < peak - 12.0 * std::numbers::ln10)
    acc.warn = true;
  return acc;
}

LogComplex base_D(const BergmanKernel& k, BergmanKernel::Kind kind, long a,
                  long b, Complex z, Complex w) {
  LogComplex r = (kind == BergmanKernel::Kind::su2_exact)
                     ? su2_D(k.N, a, b, z, w)
                     : radial_D(k.log_norm2, a, b, z, w);
  r.log_mod += k.log_scale;
  return r;
}

LogComplex single_D(const BergmanKernel& k, long a, long b, Complex z,
                    Complex w) {
  if (k.kind != BergmanKernel::Kind::deflated)
    return base_D(k, k.kind, a, b, z, w);
  const LogComplex full = base_D(k, k.base_kind, a, b, z, w);
  const LogComplex left = base_D(k, k.base_kind, a, 0, z, k.xi);
  const LogComplex right = base_D(k, k.base_kind, 0, b, k.xi, w);
  const LogComplex kxx = base_D(k, k.base_kind, 0, 0, k.xi, k.xi);
  return full - left * right / kxx;
}

}  // namespace

BergmanKernel su2_kernel(long N) {
  if (N < 1) throw std::invalid_argument("su2_kernel: N must be >= 1");
  BergmanKernel k;
  k.kind = BergmanKernel::Kind::su2_exact;
  k.N = N;
  return k;
}

BergmanKernel radial_kernel(const GaussianEnsemble& e) {
  if (e.basis_norms.empty())
    throw std::invalid_argument("radial_kernel: ensemble has no basis norms");
  BergmanKernel k;
  k.kind = BergmanKernel::Kind::radial_sum;
  k.N = e.N;
  k.log_norm2.resize(e.basis_norms.size());
  for (std::size_t j = 0; j < e.basis_norms.size(); ++j)
    k.log_norm2[j] = 2.0 * (e.basis_norms[j] - e.basis_norms[0]);
  return k;
}

BergmanKernel deflate(const BergmanKernel& k, Complex xi) {
  if (k.kind == BergmanKernel::Kind::deflated)
    throw std::invalid_argument("deflate: kernel is already deflated");
  if (!std::isfinite(xi.real()) || !std::isfinite(xi.imag()))
    throw std::invalid_argument("deflate: xi must be finite");
  BergmanKernel d = k;
  d.kind = BergmanKernel::Kind::deflated;
  d.base_kind = k.kind;
  d.xi = xi;
  return d;
}

BergmanKernel with_log_scale(BergmanKernel k, double log_scale) {
  k.log_scale = log_scale;
  return k;
}

LogComplex kernel_eval(const BergmanKernel& k, Complex z, Complex w) {
  return single_D(k, 0, 0, z, w);
}

KernelDerivatives kernel_derivs(const BergmanKernel& k, Complex z, Complex w) {
  KernelDerivatives out;
  if (k.kind != BergmanKernel::Kind::deflated) {
    for (long a = 0; a < 3; ++a)
      for (long b = 0; b < 3; ++b) out.D[a][b] = base_D(k, k.kind, a, b, z, w);
    return out;
  }
  // Rank-one deflation is sesquianalytic, so derivatives act factorwise.
  const LogComplex kxx = base_D(k, k.base_kind, 0, 0, k.xi, k.xi);
  LogComplex left[3], right[3];
  for (long a = 0; a < 3; ++a) left[a] = base_D(k, k.base_kind, a, 0, z, k.xi);
  for (long b = 0; b < 3; ++b) right[b] = base_D(k, k.base_kind, 0, b, k.xi, w);
  for (long a = 0; a < 3; ++a)
    for (long b = 0; b < 3; ++b)
      out.D[a][b] =
          base_D(k, k.base_kind, a, b, z, w) - left[a] * right[b] / kxx;
  return out;
}

double normalized_P(const BergmanKernel& k_xi, Complex z, Complex w) {
  const LogComplex dzz = single_D(k_xi, 1, 1, z, z);
  if (dzz.is_zero() || std::cos(dzz.phase) <= 0.0)
    throw DegenerateDiagonalError("normalized_P: degenerate diagonal at z");
  if (z == w) return 1.0;
  const LogComplex dww = single_D(k_xi, 1, 1, w, w);
  if (dww.is_zero() || std::cos(dww.phase) <= 0.0)
    throw DegenerateDiagonalError("normalized_P: degenerate diagonal at w");
  const LogComplex dzw = single_D(k_xi, 1, 1, z, w);
  if (dzw.is_zero()) return 0.0;
  return std::exp(dzw.log_mod - 0.5 * (dzz.log_mod + dww.log_mod));
}

double universal_P(Complex u, Complex v) {
  if (u == v) return 1.0;
  const double tu = std::norm(u);
  const double tv = std::norm(v);
  if (tu == 0.0 || tv == 0.0) {
    const double t = tu + tv;
    if (t == 0.0) return 1.0;
    return std::sqrt(t) * std::exp(-0.5 * t) / std::sqrt(-std::expm1(-t));
  }
  const Complex s = u * std::conj(v);
  double log_num;
  if (std::abs(s) < 1e-6) {
    // 1 - e^{-s} = s (1 - s/2 + s^2/6 + O(s^3)).
    const Complex corr = 1.0 - 0.5 * s + s * s / 6.0;
    log_num = std::log(std::abs(s)) + std::log(std::abs(corr));
  } else if (s.real() >= -30.0) {
    const double re = 2.0 * std::pow(std::sin(0.5 * s.imag()), 2) -
                      std::expm1(-s.real()) * std::cos(s.imag());
    const double im = std::exp(-s.real()) * std::sin(s.imag());
    log_num = std::log(std::hypot(re, im));
  } else {
    // e^{-s} dominates: |1 - e^{-s}| = e^{-Re s} |1 - e^{s}|.
    const double re = 2.0 * std::pow(std::sin(0.5 * s.imag()), 2) -
                      std::expm1(s.real()) * std::cos(s.imag());
    const double im = -std::exp(s.real()) * std::sin(s.imag());
    log_num = -s.real() + std::log(std::hypot(re, im));
  }
  const double log_den =
      0.5 * (std::log(-std::expm1(-tu)) + std::log(-std::expm1(-tv)));
  return std::exp(log_num - 0.5 * std::norm(u - v) - log_den);
}

PotentialJet fs_potential_jet(Complex xi, long N, double gamma) {
  if (N < 1) throw std::invalid_argument("fs_potential_jet: N must be >= 1");
  PotentialJet jet;
  const double dn = static_cast<double>(N);
  jet.phi0 = dn * std::log1p(std::norm(xi));
  jet.dphi = dn * std::conj(xi);
  jet.d2phi = dn * std::conj(xi) * std::conj(xi);
  jet.ddbar = dn;
  jet.N = N;
  jet.gamma = gamma;
  return jet;
}

namespace {

struct JetCoeffs {
  Complex a;  // 2 dphi / sqrt(N)
  Complex b;  // 2 d2phi / N
  double c;   // ddbar / N
};

JetCoeffs jet_coeffs(const PotentialJet& pot) {
  const double dn = static_cast<double>(pot.N);
  return {2.0 * pot.dphi / std::sqrt(dn), 2.0 * pot.d2phi / dn,
          pot.ddbar / dn};
}

}  // namespace

Complex asymptotic_T(Complex z, Complex w, const PotentialJet& pot) {
  const JetCoeffs jc = jet_coeffs(pot);
  const Complex zb = std::conj(z);
  const Complex wb = std::conj(w);
  const Complex A = jc.a + jc.b * z + jc.c * zb - zb + 2.0 * wb;
  const Complex B = std::conj(jc.a) + std::conj(jc.b) * wb + jc.c * w - w +
                    2.0 * z;
  const Complex E = std::exp(-z * wb);
  return (1.0 - E) * (1.0 + 0.25 * A * B) +
         E * (1.0 - z * wb + 0.5 * z * A + 0.5 * wb * B);
}

double asymptotic_T_diagonal(Complex z, const PotentialJet& pot) {
  const JetCoeffs jc = jet_coeffs(pot);
  const Complex S = jc.a + jc.b * z + (jc.c + 1.0) * std::conj(z);
  const double r2 = std::norm(z);
  const double E = std::exp(-r2);
  return (1.0 - E) * (1.0 + 0.25 * std::norm(S)) +
         E * (1.0 - r2 + (z * S).real());
}

Complex dlog_T_diagonal(double r, double theta, const PotentialJet& pot) {
  if (!(r > 0.0))
    throw std::domain_error("dlog_T_diagonal: radius must be positive");
  const JetCoeffs jc = jet_coeffs(pot);
  const double q = jc.c + 1.0;
  const Complex z = std::polar(r, theta);
  const Complex zb = std::conj(z);
  const Complex S = jc.a + jc.b * z + q * zb;
  const Complex Sb = std::conj(S);
  const double E = std::exp(-r * r);
  const Complex F = 1.0 + 0.25 * S * Sb;
  const Complex G2 = 1.0 - r * r + 0.5 * z * S + 0.5 * zb * Sb;
  const Complex T = (1.0 - E) * F + E * G2;
  const Complex dT = zb * E * F + (1.0 - E) * 0.25 * (jc.b * Sb + q * S) -
                     zb * E * G2 +
                     E * (-zb + 0.5 * S + 0.5 * jc.b * z + 0.5 * q * zb);
  if (T == Complex(0.0, 0.0))
    throw std::domain_error("dlog_T_diagonal: T vanishes at this point");
  return dT / T;
}

}  // namespace critpairs
