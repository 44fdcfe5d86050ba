#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "critpairs/complex_poly.hpp"
#include "critpairs/ensemble.hpp"
#include "critpairs/rng.hpp"
#include "critpairs/roots.hpp"

namespace critpairs {

// Shared Monte Carlo configuration. sigma empty means the constant section 1,
// for which the critical polynomial is just p'. Radii are N^(-1+Gamma-eps)
// and N^(-1+Gamma+eps), measured per coord_mode.
struct PairingConfig {
  std::vector<long> N_list{64, 128, 256};
  Complex xi{1.0, 1.0};
  double eps = 0.1;
  double gamma = 0.0;
  GaussianEnsemble::Kind kind = GaussianEnsemble::Kind::su2;
  std::optional<RadialWeight> weight;  // radial kind only
  std::optional<ComplexPolynomial> sigma;
  long trials = 10000;
  std::uint64_t master_seed = 1;
  CoordMode coord_mode = CoordMode::euclidean;
  int workers = 1;

  // Almost-sure pairing along the full sequence N needs 2*Gamma + 3*eps < 1/2;
  // outside it single-N statistics remain meaningful, so this is a flag.
  bool in_summable_regime() const { return 2.0 * gamma + 3.0 * eps < 0.5; }
};

struct TrialOutcome {
  long n_inner = 0;
  long n_outer = 0;
  bool success = false;  // n_outer == 1 and n_inner == 0
  bool valid = true;     // false: solver failure or degenerate sample
  Complex nearest_crit{0.0, 0.0};
  Complex displacement{0.0, 0.0};  // nearest_crit - xi
};

// All trials at one N. Outcomes are indexed by trial; entry i is produced
// from the stream (master_seed, N, i) regardless of worker count.
struct TrialSet {
  long N = 0;
  double r_minus = 0.0;
  double r_plus = 0.0;
  std::vector<TrialOutcome> outcomes;
  long invalid_count = 0;
};

TrialSet run_trials(const PairingConfig& cfg, long N);
TrialSet run_trials_radii(const PairingConfig& cfg, long N, double r_minus,
                          double r_plus);

struct PerNStats {
  long N = 0;
  long trials = 0;
  long invalid = 0;
  long success_count = 0;
  double p_fail = 0.0;
  double se_fail = 0.0;  // binomial
  double mean_outer = 0.0;
  double se_mean_outer = 0.0;
  double var_outer = 0.0;
  double se_var_outer = 0.0;  // jackknife
  double mean_inner = 0.0;
  double se_mean_inner = 0.0;
};

// Weighted least squares of log p_fail on log N; band = slope +- 1.96 se.
// Rows with p_fail of exactly 0 or 1 carry no information and are skipped.
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  long points_used = 0;
};

struct PairingReport {
  PairingConfig config;
  std::vector<PerNStats> per_n;
  SlopeFit fail_slope;
  bool outside_summable_regime = false;
};

// Invalid trials are excluded from every statistic and reported; more than 1%
// invalid at any N aborts (solver failures must not bias the estimate).
PairingReport run_pairing(const PairingConfig& cfg);
PairingReport aggregate_pairing(const PairingConfig& cfg,
                                const std::vector<TrialSet>& sets);

enum class RadiusRule { r_minus, r_plus, explicit_r };

struct MomentRow {
  long N = 0;
  double radius = 0.0;  // per cfg.coord_mode
  long trials = 0;
  long invalid = 0;
  double mc_mean = 0.0;
  double se_mean = 0.0;
  double mc_var = 0.0;
  double se_var = 0.0;  // jackknife
  double formula_mean = 0.0;
  double formula_var = 0.0;
};

struct MomentReport {
  PairingConfig config;
  RadiusRule rule = RadiusRule::r_plus;
  double explicit_radius = 0.0;
  std::vector<MomentRow> rows;
};

// Monte Carlo count moments next to the contour-integral values computed
// from the deflated kernel in the same coordinates.
MomentReport count_moments(const PairingConfig& cfg, RadiusRule rule,
                           double explicit_radius = 0.0);
MomentReport moments_from_sets(const PairingConfig& cfg,
                               const std::vector<TrialSet>& sets,
                               RadiusRule rule);

struct DisplacementRow {
  long N = 0;
  long successes = 0;
  double median_scaled = 0.0;  // median of N * |displacement|
  double circ_mean_arg = 0.0;  // circular mean of arg(displacement)
  double circ_sd = 0.0;
  double frac_inward = 0.0;  // fraction with |nearest_crit| < |xi|
};

struct DisplacementReport {
  PairingConfig config;
  std::vector<DisplacementRow> rows;
};

// Geometry of the paired critical point over successful trials only.
DisplacementReport displacement_stats(const PairingConfig& cfg);
DisplacementReport displacement_from_sets(const PairingConfig& cfg,
                                          const std::vector<TrialSet>& sets);

struct MeanFieldResult {
  Complex mean{0.0, 0.0};
  double se_re = 0.0;
  double se_im = 0.0;
  double sd_re = 0.0;  // per-trial spread, grows like sqrt(N)
  double sd_im = 0.0;
  long excluded = 0;
  long used = 0;
};

// MC average of the sample's electric co-field at `point`, poles of the
// reference section removed: p'/p(point) - sigma'/sigma(point). Trials with
// a sample zero within 1e-8 of `point` are excluded and counted.
MeanFieldResult mean_field(const PairingConfig& cfg, Complex point,
                           long trials);

struct CorrEstimate {
  double estimate = 0.0;
  double se = 0.0;
};

// MC estimate of E[log|<a,u>| log|<a,v>|] for a standard complex Gaussian a.
// u, v must be unit vectors to 1e-12.
CorrEstimate loggauss_corr(const std::vector<Complex>& u,
                           const std::vector<Complex>& v, long trials,
                           CounterRng& rng);

}  // namespace critpairs
