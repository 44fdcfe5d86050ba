#pragma once

#include <stdexcept>
#include <vector>

#include "critpairs/complex_poly.hpp"
#include "critpairs/ensemble.hpp"
#include "critpairs/log_complex.hpp"

namespace critpairs {

// Covariance kernel of a Gaussian ensemble relative to the monomial frame,
// normalized so K(0,0) = e^{log_scale} (log_scale defaults to 0). su2_exact
// uses the closed form (1+z wbar)^N; radial_sum evaluates the monomial sum
// termwise in log domain; deflated applies the rank-one conditioning at xi.
struct BergmanKernel {
  enum class Kind { su2_exact, radial_sum, deflated };
  Kind kind = Kind::su2_exact;
  Kind base_kind = Kind::su2_exact;  // meaningful when kind == deflated
  long N = 0;
  // log n_j^2 shifted so the j=0 entry is 0; radial_sum and radial bases only.
  std::vector<double> log_norm2;
  double log_scale = 0.0;
  Complex xi{0.0, 0.0};  // deflation point when kind == deflated
};

BergmanKernel su2_kernel(long N);
BergmanKernel radial_kernel(const GaussianEnsemble& e);
BergmanKernel deflate(const BergmanKernel& k, Complex xi);
BergmanKernel with_log_scale(BergmanKernel k, double log_scale);

LogComplex kernel_eval(const BergmanKernel& k, Complex z, Complex w);

// D[a][b] = d^a/dz^a d^b/dwbar^b K(z,w), 0 <= a,b <= 2.
struct KernelDerivatives {
  LogComplex D[3][3];
};
KernelDerivatives kernel_derivs(const BergmanKernel& k, Complex z, Complex w);

struct DegenerateDiagonalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// |D11(z,w)| / sqrt(D11(z,z) D11(w,w)), log-domain; exactly 1 on the
// diagonal. Throws DegenerateDiagonalError when a diagonal D11 vanishes.
double normalized_P(const BergmanKernel& k_xi, Complex z, Complex w);

// Scaling limit of normalized_P in sqrt(N)-scaled normal coordinates:
// |1-e^{-u vbar}| e^{-|u-v|^2/2} / sqrt((1-e^{-|u|^2})(1-e^{-|v|^2})),
// with series evaluation below 1e-6 magnitudes and explicit zero limits.
double universal_P(Complex u, Complex v);

// 2-jet of the weight potential at the conditioning point, in Kahler normal
// coordinates, plus scaling data. fs_potential_jet builds the round-metric
// jet for the constant reference section: dphi = N xibar, d2phi = N xibar^2,
// ddbar = N (exact normal-chart pullback identities).
struct PotentialJet {
  double phi0 = 0.0;
  Complex dphi{0.0, 0.0};
  Complex d2phi{0.0, 0.0};
  double ddbar = 0.0;
  long N = 1;
  double gamma = 0.0;
};

PotentialJet fs_potential_jet(Complex xi, long N, double gamma = 0.0);

// Leading-order factor T(z,w) of the conditional second-derivative
// kernel; z,w are the sqrt(N)-scaled normal coordinates.
Complex asymptotic_T(Complex z, Complex w, const PotentialJet& pot);
double asymptotic_T_diagonal(Complex z, const PotentialJet& pot);
// Wirtinger d/dz log T(z,z) at z = r e^{i theta}; r = 0 is singular.
Complex dlog_T_diagonal(double r, double theta, const PotentialJet& pot);

}  // namespace critpairs
