#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "critpairs/complex_poly.hpp"
#include "critpairs/ensemble.hpp"
#include "critpairs/rng.hpp"
#include "critpairs/roots.hpp"
#include "doctest.h"

using namespace critpairs;
using C = std::complex<double>;

namespace {

ComplexPolynomial from_roots(const std::vector<C>& rs) {
  ComplexPolynomial p;
  p.coeffs = {C{1, 0}};
  for (C r : rs) {
    std::vector<C> nc(p.coeffs.size() + 1, C{0, 0});
    for (size_t j = 0; j < p.coeffs.size(); ++j) {
      nc[j + 1] += p.coeffs[j];
      nc[j] -= r * p.coeffs[j];
    }
    p.coeffs = nc;
  }
  return p;
}

double worst_match(const RootSet& rs, const std::vector<C>& truth) {
  double worst = 0.0;
  for (const C& z : rs.roots) {
    double best = 1e300;
    for (const C& t : truth) best = std::min(best, std::abs(z - t));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

TEST_CASE("simple cubic roots are recovered to solver tolerance") {
  const std::vector<C> truth{C{1, 0}, C{0, 2}, C{-3, 0}};
  RootSet rs = roots(from_roots(truth));
  REQUIRE(rs.total_count() == 3);
  REQUIRE(rs.roots.size() == 3);
  CHECK(worst_match(rs, truth) < 1e-8);
  for (int m : rs.multiplicities) CHECK(m == 1);
  for (double r : rs.residuals) CHECK(r < 1e-8);
}

TEST_CASE("triple root clusters to one entry of multiplicity three") {
  RootSet rs = roots(from_roots({C{1, 0}, C{1, 0}, C{1, 0}}));
  CHECK(rs.total_count() == 3);
  for (const C& z : rs.roots) CHECK(std::abs(z - C{1, 0}) < 1e-2);
}

TEST_CASE("clustered real spectrum stays accurate") {
  std::vector<C> truth;
  for (int k = 1; k <= 20; ++k) truth.emplace_back(k / 10.0, 0.0);
  RootSet rs = roots(from_roots(truth));
  CHECK(rs.total_count() == 20);
  // Monomial coefficients of a clustered real spectrum are ill-conditioned;
  // coefficient rounding alone moves the middle roots by ~1e-3.
  CHECK(worst_match(rs, truth) < 5e-3);
}

TEST_CASE("high-degree derivative solves recover the full critical set") {
  for (long N : {256L, 512L}) {
    auto e = make_su2(N);
    CounterRng rng = derive_stream(777, N, 0);
    ComplexPolynomial p = sample(e, rng);
    RootSet rs = roots(derivative(p));
    CHECK(rs.total_count() == N - 1);
    double worst = 0.0;
    for (double r : rs.residuals) worst = std::max(worst, r);
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("degenerate inputs are rejected") {
  ComplexPolynomial zero;
  CHECK_THROWS(roots(zero));
  ComplexPolynomial constant(std::vector<C>{C{2, 0}});
  CHECK_THROWS(roots(constant));
}

TEST_CASE("disk counts respect the metric mode") {
  // Points straddling the euclidean and chart disks about xi = 1+1i.
  const C xi{1, 1};
  const std::vector<C> pts{xi + C{0.2, 0.0}, xi + C{0.0, 0.9}, C{0, 0}};
  CHECK(count_in_disk(pts, xi, 0.5, CoordMode::euclidean).count == 1);
  // chart distance of xi+0.2 is |0.2 / (1 + conj(xi)(xi+0.2))| ~ 0.0623
  CHECK(count_in_disk(pts, xi, 0.1, CoordMode::fs_normal).count == 1);
  CHECK(count_in_disk(pts, xi, 3.0, CoordMode::euclidean).count == 3);
}

TEST_CASE("boundary grazing sets the ambiguity flag") {
  const std::vector<C> pts{C{1.0, 0.0}};
  DiskCount dc = count_in_disk(pts, C{0, 0}, 1.0, CoordMode::euclidean);
  CHECK(dc.boundary_ambiguous);
  DiskCount in = count_in_disk(pts, C{0, 0}, 1.5, CoordMode::euclidean);
  CHECK(in.count == 1);
  CHECK(!in.boundary_ambiguous);
}
