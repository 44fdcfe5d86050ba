#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "critpairs/complex_poly.hpp"
#include "critpairs/rng.hpp"

namespace critpairs {

// Radial metric potential phi(|z|) with enough derivative data to integrate
// against the curvature form. kappa certifies phi(r) >= 2*kappa*log r for
// large r; it bounds the quadrature window and the admissibility precheck.
struct RadialWeight {
  std::string name;
  std::function<double(double)> phi;
  std::function<double(double)> dphi;
  std::function<double(double)> d2phi;
  double kappa = 1.0;
  enum class Measure { curvature, lebesgue } measure = Measure::curvature;
  // Optional closed form for log m_j(N); bypasses quadrature when present.
  std::function<double(long, long)> exact_log_moment;
};

RadialWeight fs_weight(bool exact_moments = true);
RadialWeight gaussian_planar_weight();

struct WeightInadmissibleError : std::runtime_error {
  WeightInadmissibleError(const std::string& msg, long failing_j)
      : std::runtime_error(msg), j(failing_j) {}
  long j;
};

struct GaussianEnsemble {
  enum class Kind { su2, radial };
  long N = 0;
  Kind kind = Kind::su2;
  // basis_norms[j] = log of the L2 normalization of z^j (raw, not shifted).
  std::vector<double> basis_norms;
  std::optional<RadialWeight> weight;

  // Sampling multiplier exponents, shifted so the largest is 0.
  std::vector<double> log_multiplier() const;
  double phi_metric(double r) const;
  double dphi_metric(double r) const;  // radial derivative phi'(r)
};

GaussianEnsemble make_su2(long N);
GaussianEnsemble make_radial(long N, const RadialWeight& w,
                             long quad_nodes = 512);

ComplexPolynomial sample(const GaussianEnsemble& e, CounterRng& rng);

struct ConditionalEnsemble {
  GaussianEnsemble base;
  Complex xi{0.0, 0.0};
  // Coefficients of z -> K(z,xi)/K(xi,xi) in the shifted monomial frame, so
  // deflation acts directly on sampled coefficient vectors.
  std::vector<Complex> deflation_vector;
};

ConditionalEnsemble condition_at(const GaussianEnsemble& e, Complex xi);
ComplexPolynomial sample_conditional(const ConditionalEnsemble& ce,
                                     CounterRng& rng);

struct PotentialSingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ReferenceSection {
  ComplexPolynomial sigma;
  long N = 0;
  GaussianEnsemble::Kind kind = GaussianEnsemble::Kind::su2;
  std::optional<RadialWeight> weight;
};

ReferenceSection make_reference(const GaussianEnsemble& e,
                                ComplexPolynomial sigma);

// log |sigma(z)| - (N/2) phi(|z|); the proof-side convention is -2x that.
enum class PotentialConvention { section_log, proof_weight };

double phi_sigma(const ReferenceSection& rs, Complex z,
                 PotentialConvention conv = PotentialConvention::section_log);
Complex dphi_sigma(const ReferenceSection& rs, Complex z,
                   PotentialConvention conv = PotentialConvention::section_log);

// |dphi_sigma(xi)| / N^{1-Gamma}, always in the section_log convention.
double efield_condition_margin(const ReferenceSection& rs, Complex xi,
                               double gamma);

}  // namespace critpairs
