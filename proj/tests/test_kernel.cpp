#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "critpairs/ensemble.hpp"
#include "critpairs/kernel.hpp"
#include "critpairs/rng.hpp"
#include "doctest.h"

using namespace critpairs;
using C = std::complex<double>;

namespace {
C lc_val(const LogComplex& v) { return v.value(); }
}  // namespace

TEST_CASE("round-metric kernel closed forms") {
  auto k = su2_kernel(10);
  auto v = kernel_eval(k, {0, 0}, {0, 0});
  CHECK(std::abs(v.log_mod) < 1e-15);
  CHECK(std::abs(v.phase) < 1e-15);

  auto k400 = su2_kernel(400);
  auto v2 = kernel_eval(k400, {2, 0}, {2, 0});
  CHECK(std::abs(v2.log_mod - 400 * std::log(5.0)) < 1e-9);

  // D11 = N (1+s)^{N-2} (1+Ns), s = z conj(w); D21 and D12 one order up.
  const long N = 23;
  const C z{0.4, -0.3}, w{-0.2, 0.7};
  auto d = kernel_derivs(su2_kernel(N), z, w);
  const C s = z * std::conj(w);
  const C want11 = double(N) * std::pow(1.0 + s, N - 2) * (1.0 + double(N) * s);
  CHECK(std::abs(lc_val(d.D[1][1]) - want11) < 1e-12 * std::abs(want11));
  const C want21 = double(N) * double(N - 1) * std::conj(w) *
                   std::pow(1.0 + s, N - 3) * (2.0 + double(N) * s);
  CHECK(std::abs(lc_val(d.D[2][1]) - want21) < 1e-12 * std::abs(want21));
  const C want12 = double(N) * double(N - 1) * z * std::pow(1.0 + s, N - 3) *
                   (2.0 + double(N) * s);
  CHECK(std::abs(lc_val(d.D[1][2]) - want12) < 1e-12 * std::abs(want12));
}

namespace {

// Wirtinger finite differences: K is holomorphic in z, antiholomorphic in w.
void fd_check(const BergmanKernel& k, C z, C w) {
  const double h = 1e-5;
  auto K = [&](C zz, C ww) { return lc_val(kernel_eval(k, zz, ww)); };
  auto d = kernel_derivs(k, z, w);

  const C d10 = (K(z + h, w) - K(z - h, w)) / (2 * h);
  const C g10 = lc_val(d.D[1][0]);
  CHECK(std::abs(d10 - g10) < 2e-6 * (1.0 + std::abs(g10)));

  const C du = (K(z, w + h) - K(z, w - h)) / (2 * h);
  const C dv = (K(z, w + C{0, h}) - K(z, w - C{0, h})) / (2 * h);
  const C d01 = 0.5 * (du + C{0, 1} * dv);
  const C g01 = lc_val(d.D[0][1]);
  CHECK(std::abs(d01 - g01) < 2e-6 * (1.0 + std::abs(g01)));

  const C d20 = (K(z + h, w) - 2.0 * K(z, w) + K(z - h, w)) / (h * h);
  const C g20 = lc_val(d.D[2][0]);
  CHECK(std::abs(d20 - g20) < 1e-4 * (1.0 + std::abs(g20)));

  auto Kd = [&](C zz, C ww) { return lc_val(kernel_derivs(k, zz, ww).D[1][0]); };
  const C du1 = (Kd(z, w + h) - Kd(z, w - h)) / (2 * h);
  const C dv1 = (Kd(z, w + C{0, h}) - Kd(z, w - C{0, h})) / (2 * h);
  const C d11 = 0.5 * (du1 + C{0, 1} * dv1);
  const C g11 = lc_val(d.D[1][1]);
  CHECK(std::abs(d11 - g11) < 2e-6 * (1.0 + std::abs(g11)));

  auto K20 = [&](C zz, C ww) { return lc_val(kernel_derivs(k, zz, ww).D[2][0]); };
  const C du2 = (K20(z, w + h) - 2.0 * K20(z, w) + K20(z, w - h)) / (h * h);
  const C dv2 =
      (K20(z, w + C{0, h}) - 2.0 * K20(z, w) + K20(z, w - C{0, h})) / (h * h);
  const C cross = (K20(z, w + C{h, h}) - K20(z, w + C{h, -h}) -
                   K20(z, w + C{-h, h}) + K20(z, w + C{-h, -h})) /
                  (4 * h * h);
  const C d22 = 0.25 * (du2 - dv2 + C{0, 2} * cross);
  const C g22 = lc_val(d.D[2][2]);
  CHECK(std::abs(d22 - g22) < 5e-3 * (1.0 + std::abs(g22)));
}

}  // namespace

TEST_CASE("analytic kernel derivatives match finite differences") {
  const C z{0.31, -0.42}, w{-0.15, 0.27};
  fd_check(su2_kernel(12), z, w);
  fd_check(radial_kernel(make_radial(12, fs_weight())), z, w);
  fd_check(deflate(su2_kernel(12), C{0.5, 0.5}), z, w);
}

TEST_CASE("termwise round-metric kernel equals the closed form") {
  const long N = 32;
  auto kr = radial_kernel(make_radial(N, fs_weight()));
  auto ks = su2_kernel(N);
  CounterRng rng = derive_stream(987, 1, 1);
  double worst = 0.0;
  const C c0{0.6, 0.25};
  for (int t = 0; t < 20; ++t) {
    const C z = c0 + C{0.5 * rng.uniform() - 0.25, 0.5 * rng.uniform() - 0.25};
    const C w = c0 + C{0.5 * rng.uniform() - 0.25, 0.5 * rng.uniform() - 0.25};
    auto a = kernel_eval(kr, z, w);
    auto b = kernel_eval(ks, z, w);
    worst = std::max(worst, std::abs(lc_val(a - b)) / std::abs(lc_val(b)));
  }
  CHECK(worst < 1e-8);

  // near z conj(w) = -1 the power-series sum cancels; the flag must say so
  auto bad = kernel_eval(kr, C{1.05, 0.0}, C{-0.9, 0.1});
  CHECK(bad.warn);

  const C z{0.7, 0.2}, w{0.45, 0.4};
  auto da = kernel_derivs(kr, z, w);
  auto db = kernel_derivs(ks, z, w);
  for (int a2 = 0; a2 < 3; ++a2)
    for (int b2 = 0; b2 < 3; ++b2) {
      const double rel = std::abs(lc_val(da.D[a2][b2] - db.D[a2][b2])) /
                         std::abs(lc_val(db.D[a2][b2]));
      CHECK(rel < 1e-8);
    }
}

TEST_CASE("quadrature and exact moments give the same kernel") {
  const long N = 16;
  auto kq = radial_kernel(make_radial(N, fs_weight(false)));
  auto ke = radial_kernel(make_radial(N, fs_weight(true)));
  auto a = kernel_eval(kq, {0.8, 0.3}, {0.8, 0.3});
  auto b = kernel_eval(ke, {0.8, 0.3}, {0.8, 0.3});
  CHECK(std::abs(a.log_mod - b.log_mod) < 1e-8);
}

TEST_CASE("conditioned kernel: rank-one closed form and row vanishing") {
  const C xi{0.6, -0.8};
  auto kd = deflate(su2_kernel(1), xi);
  const C z{0.3, 0.1}, w{-0.2, 0.5};
  const C want = (z - xi) * std::conj(w - xi) / (1.0 + std::norm(xi));
  const C got = lc_val(kernel_eval(kd, z, w));
  CHECK(std::abs(got - want) < 1e-14 * (1 + std::abs(want)));

  auto kd8 = deflate(su2_kernel(8), xi);
  auto vz = kernel_eval(kd8, xi, w);
  auto vw = kernel_eval(kd8, z, xi);
  auto ref = kernel_eval(su2_kernel(8), z, w);
  CHECK((vz.is_zero() || vz.log_mod - ref.log_mod < -11.0));
  CHECK((vz.warn || vz.is_zero()));
  CHECK((vw.is_zero() || vw.log_mod - ref.log_mod < -11.0));
}

TEST_CASE("normalized correlation coefficient is a true correlation") {
  const C xi{1.0, 1.0};
  auto kd = deflate(su2_kernel(64), xi);
  const C z = xi + C{0.05, 0.02};
  CHECK(normalized_P(kd, z, z) == 1.0);
  const C w = xi + C{-0.03, 0.06};
  const double p = normalized_P(kd, z, w);
  CHECK(p > 0.0);
  CHECK(p < 1.0 + 1e-10);
  CHECK(std::abs(normalized_P(kd, w, z) - p) < 1e-12);
  // invariant under a global rescaling of the kernel
  auto kd2 = deflate(with_log_scale(su2_kernel(64), 3.7), xi);
  CHECK(std::abs(normalized_P(kd2, z, w) - p) < 1e-11);
}

TEST_CASE("limit correlation: symmetry, range, series branch, v to 0") {
  CHECK(universal_P({0.7, 0.2}, {0.7, 0.2}) == 1.0);
  const C u{0.9, -0.4}, v{-0.3, 0.8};
  const double a = universal_P(u, v);
  CHECK(std::abs(a - universal_P(v, u)) < 1e-14);
  CHECK(a > 0);
  CHECK(a < 1);

  // series branch against the direct expression at small arguments
  const C u1{1e-4, 3e-5}, v1{-2e-5, 1e-4};
  const double ps = universal_P(u1, v1);
  const C s = u1 * std::conj(v1);
  const double re = 2.0 * std::pow(std::sin(0.5 * s.imag()), 2) -
                    std::expm1(-s.real()) * std::cos(s.imag());
  const double num = std::hypot(re, std::exp(-s.real()) * std::sin(s.imag()));
  const double den = std::sqrt(-std::expm1(-std::norm(u1))) *
                     std::sqrt(-std::expm1(-std::norm(v1)));
  const double pd = num * std::exp(-0.5 * std::norm(u1 - v1)) / den;
  CHECK(std::abs(ps - pd) < 1e-10 * pd + 1e-12);

  const double lim = universal_P(u, C{0, 0});
  const double near = universal_P(u, C{1e-9, -1e-9});
  CHECK(std::abs(lim - near) < 1e-6);
  const double want_lim = std::abs(u) * std::exp(-0.5 * std::norm(u)) /
                          std::sqrt(-std::expm1(-std::norm(u)));
  CHECK(std::abs(lim - want_lim) < 1e-14);
}

TEST_CASE("normalized conditioned kernel approaches its scaling limit") {
  const C xi{1.0, 1.0};
  const long N = 4096;
  auto kd = deflate(su2_kernel(N), xi);
  const double h = 1.0 / std::sqrt(double(N));
  const C u{0.9, 0.3}, v{-0.5, 0.7};
  auto amb = [&](C uu) {
    const C t = uu * h;
    return (t + xi) / (1.0 - std::conj(xi) * t);
  };
  const double got = normalized_P(kd, amb(u), amb(v));
  const double want = universal_P(u, v);
  CHECK(std::abs(got - want) < 0.05);
}

TEST_CASE("second-derivative correlation surrogate has the right shape") {
  const C xi{1.0, 1.0};
  for (long N : {64L, 256L, 1024L}) {
    auto kd = deflate(su2_kernel(N), xi);
    auto jet = fs_potential_jet(xi, N, 0.0);
    const double h = 1.0 / std::sqrt(double(N));
    auto amb = [&](C uu) {
      const C t = uu * h;
      return (t + xi) / (1.0 - std::conj(xi) * t);
    };
    auto jac = [&](C uu) {
      const C t = uu * h;
      const C gp = (1.0 + std::norm(xi)) /
                   ((1.0 - std::conj(xi) * t) * (1.0 - std::conj(xi) * t));
      return std::norm(gp) * h * h;
    };
    const C z1{0.6, 0.2}, z2{1.1, -0.4};
    auto d1 = kernel_derivs(kd, amb(z1), amb(z1));
    auto d2 = kernel_derivs(kd, amb(z2), amb(z2));
    const double k1 = kernel_eval(su2_kernel(N), amb(z1), amb(z1)).log_mod;
    const double k2 = kernel_eval(su2_kernel(N), amb(z2), amb(z2)).log_mod;
    const double exact_ratio =
        std::exp((d1.D[1][1].log_mod + std::log(jac(z1)) - k1) -
                 (d2.D[1][1].log_mod + std::log(jac(z2)) - k2));
    const double asym_ratio =
        asymptotic_T_diagonal(z1, jet) / asymptotic_T_diagonal(z2, jet);
    if (N >= 1024) CHECK(std::abs(exact_ratio / asym_ratio - 1.0) < 0.15);
  }
}

TEST_CASE("log-derivative of the surrogate diagonal") {
  const C xi{1.0, 1.0};
  const long N = 256;
  auto jet = fs_potential_jet(xi, N, 0.0);
  auto kd = deflate(su2_kernel(N), xi);
  const double rtN = std::sqrt(double(N));
  auto log_T_exact = [&](C z) {
    const C zh = z / rtN;
    const C den = 1.0 - std::conj(xi) * zh;
    const C amb = (zh + xi) / den;
    const double lj =
        2.0 * (std::log1p(std::norm(xi)) - 2.0 * std::log(std::abs(den)));
    const double ld = kernel_derivs(kd, amb, amb).D[1][1].log_mod;
    const double lphi = double(N) * std::log1p(std::norm(amb));
    return lj + ld - lphi;
  };

  // against the exact conditioned kernel at the outer counting radius
  const double r = std::pow(double(N), 0.1 - 0.5);
  for (double th : {0.3, 2.0, -1.7}) {
    const C z = std::polar(r, th);
    const double h = 1e-5 * r;
    const double du = (log_T_exact(z + h) - log_T_exact(z - h)) / (2 * h);
    const double dv =
        (log_T_exact(z + C{0, h}) - log_T_exact(z - C{0, h})) / (2 * h);
    const C exact = 0.5 * C{du, -dv};
    const C dl = dlog_T_diagonal(r, th, jet);
    CHECK(std::abs(dl - exact) / std::abs(exact) < 0.2);
  }

  // small-radius leading coefficient: r^2 N^{-1} (1 + |dphi|^2)
  {
    const long Nb = 1000000;
    auto jb = fs_potential_jet(xi, Nb, 0.0);
    const double rb = std::pow(double(Nb), -0.2);
    double tavg = 0.0;
    const int M = 64;
    for (int i = 0; i < M; ++i)
      tavg += asymptotic_T_diagonal(
          std::polar(rb, 2 * std::numbers::pi * i / M), jb);
    tavg /= M;
    const double lead = rb * rb / double(Nb) * (1.0 + std::norm(jb.dphi));
    CHECK(std::abs(tavg / lead - 1.0) < 0.1);
  }

  CHECK_THROWS_AS(dlog_T_diagonal(0.0, 0.0, jet), std::domain_error);

  // internal consistency with differences of the surrogate itself
  const double rr = 0.5, th = 0.9;
  const C z = std::polar(rr, th);
  const double hh = 1e-6;
  auto lt = [&](C zz) { return std::log(asymptotic_T_diagonal(zz, jet)); };
  const double du = (lt(z + hh) - lt(z - hh)) / (2 * hh);
  const double dv = (lt(z + C{0, hh}) - lt(z - C{0, hh})) / (2 * hh);
  const C fd = 0.5 * C{du, -dv};
  const C an = dlog_T_diagonal(rr, th, jet);
  CHECK(std::abs(fd - an) < 1e-5 * (1 + std::abs(an)));
}

TEST_CASE("surrogate kernel is Hermitian with a real diagonal") {
  auto jet = fs_potential_jet({1.0, 1.0}, 100, 0.0);
  const C z{0.4, 0.6}, w{-0.3, 0.2};
  const C a = asymptotic_T(z, w, jet);
  const C b = asymptotic_T(w, z, jet);
  CHECK(std::abs(a - std::conj(b)) < 1e-12 * (1 + std::abs(a)));
  const C d = asymptotic_T(z, z, jet);
  CHECK(std::abs(d.imag()) < 1e-12 * (1 + std::abs(d)));
  CHECK(std::abs(d.real() - asymptotic_T_diagonal(z, jet)) <
        1e-12 * (1 + std::abs(d)));
}
