#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace critpairs {

using Complex = std::complex<double>;

// Dense polynomial sum_j coeffs[j] z^j. Coefficients may span the full double
// range (normalized ensemble samples reach ~1e-80 at the ends), so evaluation
// paths that can see large |z| must use the scaled or reversed forms below.
struct ComplexPolynomial {
  std::vector<Complex> coeffs;

  ComplexPolynomial() = default;
  explicit ComplexPolynomial(std::vector<Complex> c) : coeffs(std::move(c)) {}

  bool empty() const { return coeffs.empty(); }
};

// Index of the last exactly nonzero coefficient; -1 for the zero polynomial.
long numerical_degree(const ComplexPolynomial& p);

// Plain Horner value. Uses compensated accumulation from degree 256 up.
Complex eval(const ComplexPolynomial& p, Complex z);

// Horner with a shared power-of-two exponent so that values of huge modulus
// never overflow. value = mantissa * 2^exp2, scale = sum_j |c_j||z|^j in the
// same exponent frame (the natural backward-error denominator).
struct ScaledEval {
  Complex mantissa{0.0, 0.0};
  double scale_mantissa = 0.0;
  long exp2 = 0;
};
ScaledEval eval_scaled(const ComplexPolynomial& p, Complex z);

// |p(z)| / sum_j |c_j||z|^j, the relative backward residual at z.
double relative_residual(const ComplexPolynomial& p, Complex z);

// sum_j |c_j| |z|^j as a log (finite for nonzero p), usable at any scale.
double log_sample_scale(const ComplexPolynomial& p, Complex z);

// p'(z)/p(z), evaluated through the reversed polynomial when |z| > 1 so the
// ratio stays accurate for roots far from the unit circle. Returns an
// infinite value if p(z) = 0 to working precision.
Complex newton_log_derivative(const ComplexPolynomial& p, Complex z);

ComplexPolynomial derivative(const ComplexPolynomial& p);

ComplexPolynomial multiply(const ComplexPolynomial& a,
                           const ComplexPolynomial& b);

// Numerator of d/dz (s/sigma): q = s' sigma - s sigma'. Zeros of q away from
// the zeros of sigma are the critical points of the pencil. For constant
// sigma this is just s'.
ComplexPolynomial critical_polynomial(const ComplexPolynomial& s,
                                      const ComplexPolynomial& sigma);

}  // namespace critpairs
