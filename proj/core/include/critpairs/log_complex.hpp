#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace critpairs {

namespace detail {
// Wrap into (-pi, pi].
inline double wrap_phase(double ph) {
  double w = std::remainder(ph, 2.0 * std::numbers::pi);
  if (w <= -std::numbers::pi) w += 2.0 * std::numbers::pi;
  return w;
}
}  // namespace detail

// Complex value carried as (log-modulus, phase). Exact zero is log_mod = -inf.
// The `warn` flag marks values that went through a subtraction losing more
// than twelve digits of relative accuracy; it propagates through arithmetic.
struct LogComplex {
  double log_mod = -std::numeric_limits<double>::infinity();
  double phase = 0.0;
  bool warn = false;

  static LogComplex zero() { return {}; }

  static LogComplex one() { return {0.0, 0.0, false}; }

  static LogComplex from(std::complex<double> v) {
    if (v == std::complex<double>(0.0, 0.0)) return zero();
    return {std::log(std::abs(v)), std::arg(v), false};
  }

  static LogComplex from_polar(double lm, double ph, bool w = false) {
    return {lm, detail::wrap_phase(ph), w};
  }

  static LogComplex from_real(double x) {
    if (x == 0.0) return zero();
    return {std::log(std::abs(x)), x > 0.0 ? 0.0 : std::numbers::pi, false};
  }

  bool is_zero() const { return std::isinf(log_mod) && log_mod < 0.0; }

  // May overflow/underflow double range; callers handling extreme scales
  // should shift by a known log offset first.
  std::complex<double> value() const {
    if (is_zero()) return {0.0, 0.0};
    const double m = std::exp(log_mod);
    return {m * std::cos(phase), m * std::sin(phase)};
  }

  std::complex<double> value_shifted(double log_shift) const {
    if (is_zero()) return {0.0, 0.0};
    const double m = std::exp(log_mod - log_shift);
    return {m * std::cos(phase), m * std::sin(phase)};
  }

  LogComplex conj() const { return {log_mod, detail::wrap_phase(-phase), warn}; }

  LogComplex neg() const {
    return {log_mod, detail::wrap_phase(phase + std::numbers::pi), warn};
  }
};

inline LogComplex operator*(const LogComplex& a, const LogComplex& b) {
  if (a.is_zero() || b.is_zero()) {
    LogComplex z = LogComplex::zero();
    z.warn = a.warn || b.warn;
    return z;
  }
  return {a.log_mod + b.log_mod, detail::wrap_phase(a.phase + b.phase),
          a.warn || b.warn};
}

inline LogComplex operator/(const LogComplex& a, const LogComplex& b) {
  return {a.log_mod - b.log_mod, detail::wrap_phase(a.phase - b.phase),
          a.warn || b.warn};
}

inline LogComplex pow_int(const LogComplex& a, long n) {
  if (a.is_zero()) return n == 0 ? LogComplex::one() : LogComplex::zero();
  return {a.log_mod * static_cast<double>(n),
          detail::wrap_phase(a.phase * static_cast<double>(n)), a.warn};
}

inline LogComplex scale(const LogComplex& a, double s) {
  if (s == 0.0 || a.is_zero()) {
    LogComplex z = LogComplex::zero();
    z.warn = a.warn;
    return z;
  }
  return {a.log_mod + std::log(std::abs(s)),
          detail::wrap_phase(a.phase + (s > 0.0 ? 0.0 : std::numbers::pi)),
          a.warn};
}

// Stable log-sum: a + b evaluated without leaving the log domain. Relative
// cancellation below 1e-12 marks the result.
inline LogComplex operator+(const LogComplex& a, const LogComplex& b) {
  const bool w = a.warn || b.warn;
  if (a.is_zero()) {
    LogComplex r = b;
    r.warn = w;
    return r;
  }
  if (b.is_zero()) {
    LogComplex r = a;
    r.warn = w;
    return r;
  }
  const LogComplex& big = (a.log_mod >= b.log_mod) ? a : b;
  const LogComplex& small = (a.log_mod >= b.log_mod) ? b : a;
  const double dm = std::exp(small.log_mod - big.log_mod);  // <= 1
  const double dph = small.phase - big.phase;
  const std::complex<double> s(1.0 + dm * std::cos(dph), dm * std::sin(dph));
  const double mag = std::abs(s);
  if (mag == 0.0) {
    LogComplex z = LogComplex::zero();
    z.warn = true;
    return z;
  }
  LogComplex r{big.log_mod + std::log(mag),
               detail::wrap_phase(big.phase + std::arg(s)), w};
  if (mag < 1e-12 * (1.0 + dm)) r.warn = true;
  return r;
}

inline LogComplex operator-(const LogComplex& a, const LogComplex& b) {
  return a + b.neg();
}

// log(1 + u) for complex u, stable for small |u|; requires 1 + u != 0.
inline LogComplex log1p_complex_as_log(const std::complex<double>& u) {
  // Returns LogComplex representing (1+u), i.e. log_mod = log|1+u|.
  const double t = 2.0 * u.real() + std::norm(u);
  LogComplex r;
  r.log_mod = 0.5 * std::log1p(t);
  r.phase = std::atan2(u.imag(), 1.0 + u.real());
  return r;
}

}  // namespace critpairs
