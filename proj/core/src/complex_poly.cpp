#include "critpairs/complex_poly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace critpairs {

namespace {

constexpr double kRenormHi = 0x1p500;
constexpr double kRenormLo = 0x1p-500;

inline void renorm(Complex& v, double& s, long& e2) {
  const double m =
      std::max(std::max(std::abs(v.real()), std::abs(v.imag())), s);
  if (m > kRenormHi) {
    v *= 0x1p-512;
    s *= 0x1p-512;
    e2 += 512;
  } else if (m > 0.0 && m < kRenormLo) {
    v *= 0x1p512;
    s *= 0x1p512;
    e2 -= 512;
  }
}

}  // namespace

long numerical_degree(const ComplexPolynomial& p) {
  for (std::size_t j = p.coeffs.size(); j-- > 0;)
    if (p.coeffs[j] != Complex(0.0, 0.0)) return static_cast<long>(j);
  return -1;
}

Complex eval(const ComplexPolynomial& p, Complex z) {
  const auto& c = p.coeffs;
  if (c.empty()) return {0.0, 0.0};
  if (c.size() < 257) {
    Complex r = c.back();
    for (std::size_t j = c.size() - 1; j-- > 0;) r = r * z + c[j];
    return r;
  }
  // Kahan-compensated coefficient accumulation.
  Complex r = c.back();
  Complex comp{0.0, 0.0};
  for (std::size_t j = c.size() - 1; j-- > 0;) {
    const Complex prod = r * z;
    const Complex y = c[j] - comp;
    const Complex t = prod + y;
    comp = (t - prod) - y;
    r = t;
  }
  return r;
}

ScaledEval eval_scaled(const ComplexPolynomial& p, Complex z) {
  ScaledEval out;
  const auto& c = p.coeffs;
  if (c.empty()) return out;
  const double az = std::abs(z);
  Complex v = c.back();
  double s = std::abs(c.back());
  long e2 = 0;
  for (std::size_t j = c.size() - 1; j-- > 0;) {
    // Coefficients live in the unscaled frame; bring each into the current
    // 2^e2 frame before adding. ldexp flushing to zero is exact here: a
    // coefficient that underflows the frame is negligible against s.
    Complex cj = c[j];
    double sj = std::abs(c[j]);
    if (e2 != 0) {
      while (e2 < 0 && sj > std::ldexp(kRenormHi, static_cast<int>(
                                                      std::max(e2, -900L)))) {
        v *= 0x1p-512;
        s *= 0x1p-512;
        e2 += 512;
      }
      const int sh = static_cast<int>(std::clamp(e2, -3000L, 3000L));
      cj = {std::ldexp(cj.real(), -sh), std::ldexp(cj.imag(), -sh)};
      sj = std::ldexp(sj, -sh);
    }
    v = v * z + cj;
    s = s * az + sj;
    renorm(v, s, e2);
  }
  out.mantissa = v;
  out.scale_mantissa = s;
  out.exp2 = e2;
  return out;
}

double relative_residual(const ComplexPolynomial& p, Complex z) {
  const ScaledEval e = eval_scaled(p, z);
  if (e.scale_mantissa == 0.0) return 0.0;
  return std::abs(e.mantissa) / e.scale_mantissa;
}

double log_sample_scale(const ComplexPolynomial& p, Complex z) {
  const ScaledEval e = eval_scaled(p, z);
  if (e.scale_mantissa == 0.0)
    return -std::numeric_limits<double>::infinity();
  return std::log(e.scale_mantissa) +
         static_cast<double>(e.exp2) * std::numbers::ln2;
}

Complex newton_log_derivative(const ComplexPolynomial& p, Complex z) {
  const long n = numerical_degree(p);
  if (n < 0) throw std::invalid_argument("newton_log_derivative: zero polynomial");
  if (n == 0) return {0.0, 0.0};
  const double az = std::abs(z);
  if (az <= 1.0) {
    ComplexPolynomial trimmed;
    trimmed.coeffs.assign(p.coeffs.begin(), p.coeffs.begin() + n + 1);
    const ScaledEval ev = eval_scaled(trimmed, z);
    const ScaledEval ed = eval_scaled(derivative(trimmed), z);
    if (ev.mantissa == Complex(0.0, 0.0)) {
      const double inf = std::numeric_limits<double>::infinity();
      return {inf, inf};
    }
    Complex r = ed.mantissa / ev.mantissa;
    return {std::ldexp(r.real(), static_cast<int>(ed.exp2 - ev.exp2)),
            std::ldexp(r.imag(), static_cast<int>(ed.exp2 - ev.exp2))};
  }
  // p(z) = z^n q(1/z)  =>  p'/p = n/z - q'(u)/q(u) * u^2,  u = 1/z.
  ComplexPolynomial q;
  q.coeffs.resize(static_cast<std::size_t>(n) + 1);
  for (long k = 0; k <= n; ++k)
    q.coeffs[static_cast<std::size_t>(k)] =
        p.coeffs[static_cast<std::size_t>(n - k)];
  const Complex u = 1.0 / z;
  const ScaledEval ev = eval_scaled(q, u);
  const ScaledEval ed = eval_scaled(derivative(q), u);
  if (ev.mantissa == Complex(0.0, 0.0)) {
    const double inf = std::numeric_limits<double>::infinity();
    return {inf, inf};
  }
  Complex r = ed.mantissa / ev.mantissa;
  r = {std::ldexp(r.real(), static_cast<int>(ed.exp2 - ev.exp2)),
       std::ldexp(r.imag(), static_cast<int>(ed.exp2 - ev.exp2))};
  return static_cast<double>(n) * u - r * u * u;
}

ComplexPolynomial derivative(const ComplexPolynomial& p) {
  ComplexPolynomial d;
  if (p.coeffs.size() <= 1) return d;
  d.coeffs.resize(p.coeffs.size() - 1);
  for (std::size_t j = 1; j < p.coeffs.size(); ++j)
    d.coeffs[j - 1] = static_cast<double>(j) * p.coeffs[j];
  return d;
}

ComplexPolynomial multiply(const ComplexPolynomial& a,
                           const ComplexPolynomial& b) {
  ComplexPolynomial r;
  if (a.coeffs.empty() || b.coeffs.empty()) return r;
  r.coeffs.assign(a.coeffs.size() + b.coeffs.size() - 1, Complex(0.0, 0.0));
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
    if (a.coeffs[i] == Complex(0.0, 0.0)) continue;
    for (std::size_t j = 0; j < b.coeffs.size(); ++j)
      r.coeffs[i + j] += a.coeffs[i] * b.coeffs[j];
  }
  return r;
}

ComplexPolynomial critical_polynomial(const ComplexPolynomial& s,
                                      const ComplexPolynomial& sigma) {
  if (numerical_degree(sigma) <= 0) return derivative(s);
  ComplexPolynomial q = multiply(derivative(s), sigma);
  const ComplexPolynomial t = multiply(s, derivative(sigma));
  if (t.coeffs.size() > q.coeffs.size())
    q.coeffs.resize(t.coeffs.size(), Complex(0.0, 0.0));
  for (std::size_t j = 0; j < t.coeffs.size(); ++j) q.coeffs[j] -= t.coeffs[j];
  while (!q.coeffs.empty() && q.coeffs.back() == Complex(0.0, 0.0))
    q.coeffs.pop_back();
  return q;
}

}  // namespace critpairs
