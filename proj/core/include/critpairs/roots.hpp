#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "critpairs/complex_poly.hpp"

namespace critpairs {

struct RootSolveOptions {
  double tol = 1e-10;        // relative backward-residual target
  int max_iterations = 200;  // Aberth sweep cap before fallback
  bool allow_fallback = true;
  // Initial points: per-ring Newton-polygon radii when true, otherwise the
  // single circle |coeffs[0]/coeffs[n]|^(1/n). Both get 1e-3 angular jitter.
  bool newton_polygon_init = true;
};

// Roots with multiplicities. Clustered roots within 10*tol^(1/m) of each
// other are reported once with multiplicity m; sum of multiplicities always
// equals the numerical degree.
struct RootSet {
  std::vector<Complex> roots;
  std::vector<int> multiplicities;
  std::vector<double> residuals;  // relative backward residual per root
  int iterations = 0;
  bool used_fallback = false;

  long total_count() const {
    long s = 0;
    for (int m : multiplicities) s += m;
    return s;
  }
};

struct RootSolveFailure : std::runtime_error {
  RootSolveFailure(const std::string& msg, RootSet best)
      : std::runtime_error(msg), best_iterate(std::move(best)) {}
  RootSet best_iterate;
};

// All roots of the numerical-degree part of p. Degree -1 (zero polynomial)
// and degree 0 are invalid inputs.
RootSet roots(const ComplexPolynomial& p, const RootSolveOptions& opts = {});

enum class CoordMode { euclidean, fs_normal };

struct DiskCount {
  long count = 0;
  bool boundary_ambiguous = false;
};

// Number of roots (with multiplicity) at mode-distance < radius from center.
// fs_normal measures |(z - center) / (1 + conj(center) z)|. Roots landing
// within a 1e-9 relative shell of the boundary set the ambiguity flag.
DiskCount count_in_disk(const RootSet& rs, Complex center, double radius,
                        CoordMode mode = CoordMode::euclidean);
DiskCount count_in_disk(const std::vector<Complex>& pts, Complex center,
                        double radius, CoordMode mode = CoordMode::euclidean);

}  // namespace critpairs
