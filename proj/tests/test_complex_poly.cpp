#include <cmath>
#include <complex>
#include <vector>

#include "critpairs/chart.hpp"
#include "critpairs/complex_poly.hpp"
#include "critpairs/ensemble.hpp"
#include "critpairs/log_complex.hpp"
#include "critpairs/rng.hpp"
#include "doctest.h"

using namespace critpairs;
using C = std::complex<double>;

TEST_CASE("polynomial arithmetic basics") {
  ComplexPolynomial p(std::vector<C>{C{1, 0}, C{2, 0}, C{3, 0}});
  CHECK(eval(p, C{2, 0}) == C{17, 0});
  CHECK(numerical_degree(p) == 2);

  ComplexPolynomial dp = derivative(p);
  REQUIRE(dp.coeffs.size() == 2);
  CHECK(dp.coeffs[0] == C{2, 0});
  CHECK(dp.coeffs[1] == C{6, 0});

  // (1 + z)(1 - z) = 1 - z^2
  ComplexPolynomial a(std::vector<C>{C{1, 0}, C{1, 0}});
  ComplexPolynomial b(std::vector<C>{C{1, 0}, C{-1, 0}});
  ComplexPolynomial ab = multiply(a, b);
  REQUIRE(ab.coeffs.size() == 3);
  CHECK(ab.coeffs[0] == C{1, 0});
  CHECK(std::abs(ab.coeffs[1]) == 0.0);
  CHECK(ab.coeffs[2] == C{-1, 0});

  ComplexPolynomial trail(std::vector<C>{C{1, 0}, C{0, 0}, C{0, 0}});
  CHECK(numerical_degree(trail) == 0);
  CHECK(numerical_degree(ComplexPolynomial{}) == -1);
}

TEST_CASE("scaled evaluation survives magnitudes beyond double range") {
  // z^600 at z = 2: |value| = 2^600 overflows double, the scaled form must
  // carry it exactly in (mantissa, exp2).
  ComplexPolynomial p;
  p.coeffs.assign(601, C{0, 0});
  p.coeffs[600] = C{1, 0};
  ScaledEval se = eval_scaled(p, C{2, 0});
  const double lv =
      std::log(std::abs(se.mantissa)) + se.exp2 * std::log(2.0);
  CHECK(std::abs(lv - 600.0 * std::log(2.0)) < 1e-9);
  CHECK(std::abs(log_sample_scale(p, C{2, 0}) - 600.0 * std::log(2.0)) < 1e-9);
  CHECK(relative_residual(p, C{2, 0}) == doctest::Approx(1.0));
}

TEST_CASE("relative residual vanishes at a root and is order one away") {
  // p = (z - 1)(z - 3) = 3 - 4z + z^2
  ComplexPolynomial p(std::vector<C>{C{3, 0}, C{-4, 0}, C{1, 0}});
  CHECK(relative_residual(p, C{1, 0}) == 0.0);
  CHECK(relative_residual(p, C{3, 0}) == 0.0);
  CHECK(relative_residual(p, C{0, 1}) > 1e-2);
}

TEST_CASE("newton log derivative equals p'/p inside and outside the circle") {
  auto e = make_su2(64);
  CounterRng rng = derive_stream(11, 64, 0);
  ComplexPolynomial p = sample(e, rng);
  ComplexPolynomial dp = derivative(p);
  for (C z : {C{0.3, -0.4}, C{0.9, 0.1}, C{2.5, 1.0}, C{-4.0, 3.0}}) {
    const C want = eval(dp, z) / eval(p, z);
    const C got = newton_log_derivative(p, z);
    CHECK(std::abs(got - want) < 1e-9 * (1.0 + std::abs(want)));
  }
}

TEST_CASE("critical polynomial reduces to p' for constant sections") {
  ComplexPolynomial s(std::vector<C>{C{0, 0}, C{0, 0}, C{0, 0}, C{1, 0}});
  ComplexPolynomial one(std::vector<C>{C{1, 0}});
  ComplexPolynomial q = critical_polynomial(s, one);
  ComplexPolynomial ds = derivative(s);
  REQUIRE(q.coeffs.size() >= ds.coeffs.size());
  for (size_t j = 0; j < ds.coeffs.size(); ++j)
    CHECK(std::abs(q.coeffs[j] - ds.coeffs[j]) == 0.0);
}

TEST_CASE("critical polynomial for a moving section") {
  // s = z^2, sigma = 1 + z: q = s' sigma - s sigma' = 2z + z^2.
  ComplexPolynomial s(std::vector<C>{C{0, 0}, C{0, 0}, C{1, 0}});
  ComplexPolynomial sig(std::vector<C>{C{1, 0}, C{1, 0}});
  ComplexPolynomial q = critical_polynomial(s, sig);
  REQUIRE(numerical_degree(q) == 2);
  CHECK(std::abs(q.coeffs[0]) == 0.0);
  CHECK(q.coeffs[1] == C{2, 0});
  CHECK(q.coeffs[2] == C{1, 0});
}

TEST_CASE("log-domain complex arithmetic") {
  LogComplex a = LogComplex::from(C{3, 4});
  CHECK(std::abs(a.value() - C{3, 4}) < 1e-14);
  CHECK(std::abs((a * a).value() - C{-7, 24}) < 1e-12);
  CHECK(std::abs((a / a).value() - C{1, 0}) < 1e-15);
  CHECK(std::abs(pow_int(a, 3).value() - C{-117, 44}) < 1e-11);
  CHECK(std::abs(a.conj().value() - C{3, -4}) < 1e-14);
  CHECK(std::abs(a.neg().value() + C{3, 4}) < 1e-14);
  CHECK(std::abs(scale(a, -2.0).value() + C{6, 8}) < 1e-13);

  LogComplex z = LogComplex::zero();
  CHECK(z.is_zero());
  CHECK((z * a).is_zero());
  CHECK(std::abs((z + a).value() - C{3, 4}) < 1e-14);
  CHECK(pow_int(z, 0).value() == C{1, 0});
}

TEST_CASE("log-domain sums flag catastrophic cancellation") {
  LogComplex one = LogComplex::one();
  LogComplex close = LogComplex::from(C{-1.0 + 1e-14, 0.0});
  LogComplex s = one + close;
  CHECK(s.warn);
  // 1 + (-1): at best exact zero, at worst an O(eps) remainder from the
  // trig round trip; either way the flag must be set.
  LogComplex exact = one + one.neg();
  CHECK(exact.warn);
  CHECK((exact.is_zero() || exact.log_mod < -30.0));
  // benign sums stay clean and the flag propagates through products
  LogComplex ok = one + one;
  CHECK(!ok.warn);
  CHECK((s * ok).warn);
}

TEST_CASE("log1p in the log domain is accurate for tiny arguments") {
  const C u{1e-12, -3e-13};
  LogComplex r = log1p_complex_as_log(u);
  CHECK(std::abs(r.log_mod - u.real()) < 1e-24 + 1e-15 * std::abs(u.real()));
  CHECK(std::abs(r.value() - (C{1, 0} + u)) < 1e-15);
}

TEST_CASE("normal chart round trips and its jacobian matches differences") {
  const C xi{1.0, 1.0};
  Chart ch{CoordMode::fs_normal, xi};
  for (C u : {C{0.1, -0.2}, C{0.05, 0.3}, C{-0.25, -0.1}}) {
    const C z = ch.to_ambient(u);
    CHECK(std::abs(ch.from_ambient(z) - u) < 1e-14);
    const double h = 1e-7;
    const C fd = (ch.to_ambient(u + h) - ch.to_ambient(u - h)) / (2.0 * h);
    CHECK(std::abs(fd - ch.jacobian(u)) < 1e-6 * (1.0 + std::abs(fd)));
  }
  CHECK(ch.to_ambient(C{0, 0}) == xi);
  CHECK(std::abs(ch.jacobian(C{0, 0}) - C{3, 0}) < 1e-15);  // 1 + |xi|^2
  CHECK(ch.max_radius() < chart_pole_radius(xi));

  Chart eu{CoordMode::euclidean, xi};
  CHECK(eu.to_ambient(C{0.5, 0}) == xi + C{0.5, 0});
  CHECK(eu.jacobian(C{0.5, 0}) == C{1, 0});
}

TEST_CASE("counting radii follow the power law in N") {
  CHECK(std::abs(pairing_radius(100, 0.0, 0.1, +1) - std::pow(100.0, -0.9)) <
        1e-15);
  CHECK(std::abs(pairing_radius(100, 0.0, 0.1, -1) - std::pow(100.0, -1.1)) <
        1e-15);
  CHECK(std::abs(pairing_radius(64, 0.2, 0.05, +1) -
                 std::pow(64.0, 0.2 + 0.05 - 1.0)) < 1e-15);
  CHECK(pairing_radius(1, 0.0, 0.1, +1) == 1.0);
  CHECK_THROWS_AS(pairing_radius(0, 0.0, 0.1, +1), std::invalid_argument);
}
