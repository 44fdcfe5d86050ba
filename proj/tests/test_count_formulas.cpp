#include <cmath>
#include <complex>
#include <vector>

#include "critpairs/chart.hpp"
#include "critpairs/count_formulas.hpp"
#include "critpairs/ensemble.hpp"
#include "critpairs/kernel.hpp"
#include "critpairs/rng.hpp"
#include "critpairs/roots.hpp"
#include "doctest.h"

using namespace critpairs;
using C = std::complex<double>;

TEST_CASE("winding counts for explicit polynomials") {
  QuadratureSpec q;
  ComplexPolynomial p(std::vector<C>{C{0, 0}, C{0, 0}, C{0, 0}, C{1, 0}});
  CHECK(std::abs(argument_principle_count(p, {0, 0}, 1.0, q) - 3.0) < 1e-6);
  ComplexPolynomial p2(std::vector<C>{C{-4, 0}, C{0, 0}, C{1, 0}});
  CHECK(std::abs(argument_principle_count(p2, {0, 0}, 1.0, q)) < 1e-6);
  CHECK_THROWS_AS(argument_principle_count(p2, {0, 0}, 2.0, q),
                  ContourCollisionError);
}

TEST_CASE("winding counts agree with direct root counts on random samples") {
  QuadratureSpec q;
  CounterRng rng = derive_stream(321, 7, 0);
  auto ens = make_su2(24);
  int done = 0;
  for (int t = 0; t < 50; ++t) {
    auto p = sample(ens, rng);
    auto rs = roots(p);
    const C center{2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
    const double r = 0.3 + 0.7 * rng.uniform();
    double dmin = 1e300;
    for (const auto& z : rs.roots)
      dmin = std::min(dmin, std::abs(std::abs(z - center) - r));
    if (dmin < 0.02 * r) continue;  // contour too close for the quadrature
    const long direct = count_in_disk(rs.roots, center, r).count;
    CHECK(std::abs(argument_principle_count(p, center, r, q) -
                   double(direct)) < 1e-6);
    ++done;
  }
  CHECK(done >= 40);
}

TEST_CASE("chart and scaled radii are inverse conventions") {
  const long N = 144;
  const double rc = 0.03;
  CHECK(std::abs(chart_radius(scaled_radius(rc, N), N) - rc) < 1e-15);
  CHECK(std::abs(scaled_radius(rc, N) - rc * 12.0) < 1e-15);
}

TEST_CASE("expected counts at the counting radii match frozen values") {
  // Conditioned round-metric ensemble at xi = 1+1i, eps = 0.1, chart radii.
  const C xi{1.0, 1.0};
  QuadratureSpec q;
  const struct {
    long N;
    double ep, em, vp;
  } table[] = {
      {64, 1.015711, 0.107286, 0.015466},
      {128, 1.009522, 0.025818, 0.009432},
      {256, 1.005630, 0.007239, 0.005598},
  };
  for (const auto& row : table) {
    auto kd = deflate(su2_kernel(row.N), xi);
    const double rp = pairing_radius(row.N, 0.0, 0.1, +1);
    const double rm = pairing_radius(row.N, 0.0, 0.1, -1);
    CHECK(std::abs(expected_count(kd, xi, rp, q) - row.ep) < 1e-5);
    CHECK(std::abs(expected_count(kd, xi, rm, q) - row.em) < 1e-5);
    CHECK(std::abs(variance_count(kd, xi, rp, q) - row.vp) < 1e-5);
  }
}

TEST_CASE("contour quadrature is stable under node doubling") {
  const C xi{1.0, 1.0};
  auto kd = deflate(su2_kernel(128), xi);
  const double r = pairing_radius(128, 0.0, 0.1, +1);
  QuadratureSpec qa;
  qa.nodes = 32;
  QuadratureSpec qb;
  qb.nodes = 64;
  CHECK(std::abs(expected_count(kd, xi, r, qa) -
                 expected_count(kd, xi, r, qb)) < 1e-6);
}

TEST_CASE("count variance approaches the mean for shrinking disks") {
  // A vanishing disk holds at most one point, so the count is Bernoulli and
  // Var/E must tend to 1; this pins the variance formula's normalization.
  const C xi{1.0, 1.0};
  QuadratureSpec q;
  auto kd = deflate(su2_kernel(64), xi);
  for (double r : {1e-4, 3e-5}) {
    const double e = expected_count(kd, xi, r, q);
    const double v = variance_count(kd, xi, r, q);
    CHECK(std::abs(v / e - 1.0) < 0.01);
  }
}

TEST_CASE("degree-two counts validate both contour formulas by Monte Carlo") {
  const C xi{1.0, 1.0};
  const long N = 2;
  auto ens = make_su2(N);
  auto ce = condition_at(ens, xi);
  auto kd = deflate(su2_kernel(N), xi);
  const double r = 0.25;  // chart radius
  QuadratureSpec q;
  CounterRng rng = derive_stream(777, 2, 0);
  const long M = 400000;
  long cnt = 0;
  Chart ch{CoordMode::fs_normal, xi};
  for (long t = 0; t < M; ++t) {
    auto p = sample_conditional(ce, rng);
    const C c = -p.coeffs[1] / (2.0 * p.coeffs[2]);
    if (ch.distance(c) <= r) ++cnt;
  }
  const double mean = double(cnt) / double(M);
  const double var = mean - mean * mean;  // indicator count
  const double se_mean = std::sqrt(var / double(M));
  const double e = expected_count(kd, xi, r, q);
  const double v = variance_count(kd, xi, r, q);
  double se_var = std::sqrt(mean * (1 - mean)) * (1 - 2 * mean) /
                  std::sqrt(double(M));
  se_var = std::abs(se_var) + 2.0 * var / double(M);
  CHECK(std::abs(mean - e) < 3 * se_mean);
  CHECK(std::abs(var - v) < 3 * se_var);
}

TEST_CASE("count variance at the outer radius decreases with degree") {
  const C xi{1.0, 1.0};
  QuadratureSpec q;
  double prev = 1e300;
  for (long N : {64L, 128L, 256L}) {
    auto kd = deflate(su2_kernel(N), xi);
    const double v = variance_count(kd, xi, pairing_radius(N, 0.0, 0.1, +1), q);
    CHECK(v >= -1e-6);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("count variance is negligible on sub-resolution disks") {
  const C xi{1.0, 1.0};
  QuadratureSpec q;
  auto kd = deflate(su2_kernel(128), xi);
  const double rm = pairing_radius(128, 0.0, 0.1, -1);
  CHECK(variance_count(kd, xi, 5e-2 * rm, q) < 1e-4);
}
