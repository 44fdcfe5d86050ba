#include "critpairs/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "critpairs/chart.hpp"
#include "critpairs/count_formulas.hpp"
#include "critpairs/kernel.hpp"

namespace critpairs {

namespace {

GaussianEnsemble build_ensemble(const PairingConfig& cfg, long N) {
  if (cfg.kind == GaussianEnsemble::Kind::su2) return make_su2(N);
  return make_radial(N, cfg.weight ? *cfg.weight : fs_weight());
}

ComplexPolynomial sigma_or_one(const PairingConfig& cfg) {
  if (cfg.sigma) return *cfg.sigma;
  return ComplexPolynomial(std::vector<Complex>{Complex{1.0, 0.0}});
}

std::vector<Complex> expand_roots(const RootSet& rs) {
  std::vector<Complex> pts;
  pts.reserve(static_cast<std::size_t>(rs.total_count()));
  for (std::size_t i = 0; i < rs.roots.size(); ++i)
    for (int m = 0; m < rs.multiplicities[i]; ++m) pts.push_back(rs.roots[i]);
  return pts;
}

void check_field_hypothesis(const PairingConfig& cfg,
                            const GaussianEnsemble& ens,
                            const ComplexPolynomial& sig) {
  const ReferenceSection ref = make_reference(ens, sig);
  if (!(efield_condition_margin(ref, cfg.xi, cfg.gamma) > 0.0))
    throw std::invalid_argument(
        "conditioning point violates the field hypothesis dphi_sigma(xi) != 0"
        " (for the constant section this means xi = 0)");
}

struct TrialContext {
  const PairingConfig* cfg = nullptr;
  long N = 0;
  ConditionalEnsemble ce;
  ComplexPolynomial sigma;
  std::vector<Complex> sigma_zeros;
  long expected_crit_degree = -1;  // -1: no structural degree check
  double r_minus = 0.0;
  double r_plus = 0.0;
};

TrialContext make_context(const PairingConfig& cfg, long N, double rm,
                          double rp) {
  if (N < 2) throw std::invalid_argument("pairing trials need N >= 2");
  if (cfg.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (!(rm > 0.0) || !(rp >= rm))
    throw std::invalid_argument("radii must satisfy 0 < r_minus <= r_plus");
  TrialContext tc;
  tc.cfg = &cfg;
  tc.N = N;
  const GaussianEnsemble ens = build_ensemble(cfg, N);
  tc.sigma = sigma_or_one(cfg);
  check_field_hypothesis(cfg, ens, tc.sigma);
  tc.ce = condition_at(ens, cfg.xi);
  if (numerical_degree(tc.sigma) >= 1)
    tc.sigma_zeros = expand_roots(roots(tc.sigma));
  else
    tc.expected_crit_degree = N - 1;
  tc.r_minus = rm;
  tc.r_plus = rp;
  return tc;
}

TrialOutcome one_trial(const TrialContext& tc, long index) {
  CounterRng rng =
      derive_stream(tc.cfg->master_seed, static_cast<std::uint64_t>(tc.N),
                    static_cast<std::uint64_t>(index));
  const ComplexPolynomial p = sample_conditional(tc.ce, rng);
  TrialOutcome out;
  const ComplexPolynomial q = critical_polynomial(p, tc.sigma);
  if (tc.expected_crit_degree >= 0 &&
      numerical_degree(q) != tc.expected_crit_degree) {
    out.valid = false;
    return out;
  }
  RootSet rs;
  try {
    rs = roots(q);
  } catch (const RootSolveFailure&) {
    out.valid = false;
    return out;
  }
  std::vector<Complex> crits;
  crits.reserve(static_cast<std::size_t>(rs.total_count()));
  for (std::size_t i = 0; i < rs.roots.size(); ++i) {
    const Complex c = rs.roots[i];
    bool on_sigma = false;
    for (const Complex sz : tc.sigma_zeros)
      if (std::abs(c - sz) < 1e-8 * (1.0 + std::abs(c))) {
        on_sigma = true;
        break;
      }
    if (on_sigma) continue;
    for (int m = 0; m < rs.multiplicities[i]; ++m) crits.push_back(c);
  }
  if (crits.empty()) {
    out.valid = false;
    return out;
  }

  const CoordMode mode = tc.cfg->coord_mode;
  out.n_inner = count_in_disk(crits, tc.cfg->xi, tc.r_minus, mode).count;
  out.n_outer = count_in_disk(crits, tc.cfg->xi, tc.r_plus, mode).count;
  out.success = out.n_outer == 1 && out.n_inner == 0;

  Complex best = crits.front();
  double best_d = std::abs(best - tc.cfg->xi);
  for (std::size_t i = 1; i < crits.size(); ++i) {
    const double d = std::abs(crits[i] - tc.cfg->xi);
    if (d < best_d || (d == best_d && std::arg(crits[i] - tc.cfg->xi) <
                                          std::arg(best - tc.cfg->xi))) {
      best = crits[i];
      best_d = d;
    }
  }
  out.nearest_crit = best;
  out.displacement = best - tc.cfg->xi;
  return out;
}

// Index-addressed parallel loop. Work items write disjoint slots, so the
// result is identical for every worker count.
void parallel_for(long n, int workers, const std::function<void(long)>& fn) {
  const int w = std::max(1, workers);
  if (w == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(w));
  for (int t = 0; t < w; ++t)
    pool.emplace_back([&] {
      try {
        for (long i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
      }
    });
  for (std::thread& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

struct CountStats {
  long n = 0;
  double mean = 0.0;
  double se_mean = 0.0;
  double var = 0.0;
  double se_var = 0.0;
};

// Mean/variance with a leave-one-out jackknife SE for the variance; counts
// are small integers, so plain double sums are exact.
CountStats count_stats(const std::vector<double>& x) {
  CountStats cs;
  cs.n = static_cast<long>(x.size());
  if (cs.n == 0) return cs;
  double s1 = 0.0, s2 = 0.0;
  for (const double v : x) {
    s1 += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(cs.n);
  cs.mean = s1 / n;
  if (cs.n < 2) return cs;
  cs.var = (s2 - s1 * s1 / n) / (n - 1.0);
  cs.se_mean = std::sqrt(std::max(0.0, cs.var) / n);
  if (cs.n < 3) return cs;
  const double np = n - 1.0;
  double loo_sum = 0.0;
  std::vector<double> loo(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s1p = s1 - x[i];
    const double s2p = s2 - x[i] * x[i];
    loo[i] = (s2p - s1p * s1p / np) / (np - 1.0);
    loo_sum += loo[i];
  }
  const double loo_bar = loo_sum / n;
  double ss = 0.0;
  for (const double v : loo) ss += (v - loo_bar) * (v - loo_bar);
  cs.se_var = std::sqrt((n - 1.0) / n * ss);
  return cs;
}

void check_invalid_budget(const TrialSet& ts) {
  const double frac = static_cast<double>(ts.invalid_count) /
                      static_cast<double>(ts.outcomes.size());
  if (frac > 0.01)
    throw std::runtime_error("more than 1% invalid trials at N=" +
                             std::to_string(ts.N));
}

SlopeFit fit_fail_slope(const std::vector<PerNStats>& per_n) {
  SlopeFit fit;
  std::vector<double> xs, ys, ws;
  for (const PerNStats& st : per_n) {
    if (!(st.p_fail > 0.0) || !(st.p_fail < 1.0)) continue;
    const double valid = static_cast<double>(st.trials - st.invalid);
    xs.push_back(std::log(static_cast<double>(st.N)));
    ys.push_back(std::log(st.p_fail));
    // Var(log p_hat) = (1 - p)/(p n) by the delta method.
    ws.push_back(st.p_fail * valid / (1.0 - st.p_fail));
  }
  fit.points_used = static_cast<long>(xs.size());
  if (fit.points_used < 2) return fit;
  double W = 0.0, xw = 0.0, yw = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    W += ws[i];
    xw += ws[i] * xs[i];
    yw += ws[i] * ys[i];
  }
  xw /= W;
  yw /= W;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += ws[i] * (xs[i] - xw) * (xs[i] - xw);
    sxy += ws[i] * (xs[i] - xw) * (ys[i] - yw);
  }
  fit.slope = sxy / sxx;
  fit.intercept = yw - fit.slope * xw;
  fit.slope_se = 1.0 / std::sqrt(sxx);
  return fit;
}

BergmanKernel deflated_kernel(const PairingConfig& cfg, long N) {
  if (cfg.kind == GaussianEnsemble::Kind::su2)
    return deflate(su2_kernel(N), cfg.xi);
  return deflate(radial_kernel(build_ensemble(cfg, N)), cfg.xi);
}

}  // namespace

TrialSet run_trials_radii(const PairingConfig& cfg, long N, double r_minus,
                          double r_plus) {
  const TrialContext tc = make_context(cfg, N, r_minus, r_plus);
  TrialSet ts;
  ts.N = N;
  ts.r_minus = r_minus;
  ts.r_plus = r_plus;
  ts.outcomes.resize(static_cast<std::size_t>(cfg.trials));
  parallel_for(cfg.trials, cfg.workers,
               [&](long i) { ts.outcomes[static_cast<std::size_t>(i)] = one_trial(tc, i); });
  for (const TrialOutcome& o : ts.outcomes)
    if (!o.valid) ++ts.invalid_count;
  return ts;
}

TrialSet run_trials(const PairingConfig& cfg, long N) {
  return run_trials_radii(cfg, N, pairing_radius(N, cfg.gamma, cfg.eps, -1),
                          pairing_radius(N, cfg.gamma, cfg.eps, +1));
}

PairingReport aggregate_pairing(const PairingConfig& cfg,
                                const std::vector<TrialSet>& sets) {
  PairingReport rep;
  rep.config = cfg;
  rep.outside_summable_regime = !cfg.in_summable_regime();
  for (const TrialSet& ts : sets) {
    check_invalid_budget(ts);
    PerNStats st;
    st.N = ts.N;
    st.trials = static_cast<long>(ts.outcomes.size());
    st.invalid = ts.invalid_count;
    std::vector<double> outer, inner;
    outer.reserve(ts.outcomes.size());
    inner.reserve(ts.outcomes.size());
    for (const TrialOutcome& o : ts.outcomes) {
      if (!o.valid) continue;
      if (o.success) ++st.success_count;
      outer.push_back(static_cast<double>(o.n_outer));
      inner.push_back(static_cast<double>(o.n_inner));
    }
    const double valid = static_cast<double>(outer.size());
    st.p_fail = 1.0 - static_cast<double>(st.success_count) / valid;
    st.se_fail = std::sqrt(std::max(0.0, st.p_fail * (1.0 - st.p_fail)) / valid);
    const CountStats co = count_stats(outer);
    st.mean_outer = co.mean;
    st.se_mean_outer = co.se_mean;
    st.var_outer = co.var;
    st.se_var_outer = co.se_var;
    const CountStats ci = count_stats(inner);
    st.mean_inner = ci.mean;
    st.se_mean_inner = ci.se_mean;
    rep.per_n.push_back(st);
  }
  rep.fail_slope = fit_fail_slope(rep.per_n);
  return rep;
}

PairingReport run_pairing(const PairingConfig& cfg) {
  if (cfg.N_list.empty())
    throw std::invalid_argument("pairing needs a nonempty N list");
  std::vector<TrialSet> sets;
  sets.reserve(cfg.N_list.size());
  for (const long N : cfg.N_list) sets.push_back(run_trials(cfg, N));
  return aggregate_pairing(cfg, sets);
}

MomentReport moments_from_sets(const PairingConfig& cfg,
                               const std::vector<TrialSet>& sets,
                               RadiusRule rule) {
  if (rule == RadiusRule::explicit_r)
    throw std::invalid_argument(
        "explicit-radius moments need count_moments, not stored trial sets");
  MomentReport rep;
  rep.config = cfg;
  rep.rule = rule;
  const QuadratureSpec q;
  for (const TrialSet& ts : sets) {
    check_invalid_budget(ts);
    MomentRow row;
    row.N = ts.N;
    row.radius = rule == RadiusRule::r_minus ? ts.r_minus : ts.r_plus;
    row.trials = static_cast<long>(ts.outcomes.size());
    row.invalid = ts.invalid_count;
    std::vector<double> counts;
    counts.reserve(ts.outcomes.size());
    for (const TrialOutcome& o : ts.outcomes) {
      if (!o.valid) continue;
      counts.push_back(static_cast<double>(
          rule == RadiusRule::r_minus ? o.n_inner : o.n_outer));
    }
    const CountStats cs = count_stats(counts);
    row.mc_mean = cs.mean;
    row.se_mean = cs.se_mean;
    row.mc_var = cs.var;
    row.se_var = cs.se_var;
    const BergmanKernel kd = deflated_kernel(cfg, ts.N);
    row.formula_mean =
        expected_count(kd, cfg.xi, row.radius, q, cfg.coord_mode);
    row.formula_var = variance_count(kd, cfg.xi, row.radius, q, cfg.coord_mode);
    rep.rows.push_back(row);
  }
  return rep;
}

MomentReport count_moments(const PairingConfig& cfg, RadiusRule rule,
                           double explicit_radius) {
  if (cfg.N_list.empty())
    throw std::invalid_argument("moments need a nonempty N list");
  std::vector<TrialSet> sets;
  sets.reserve(cfg.N_list.size());
  if (rule == RadiusRule::explicit_r) {
    if (!(explicit_radius > 0.0))
      throw std::invalid_argument("explicit radius must be positive");
    for (const long N : cfg.N_list)
      sets.push_back(
          run_trials_radii(cfg, N, explicit_radius, explicit_radius));
    MomentReport rep = moments_from_sets(cfg, sets, RadiusRule::r_plus);
    rep.rule = RadiusRule::explicit_r;
    rep.explicit_radius = explicit_radius;
    return rep;
  }
  for (const long N : cfg.N_list) sets.push_back(run_trials(cfg, N));
  return moments_from_sets(cfg, sets, rule);
}

DisplacementReport displacement_from_sets(const PairingConfig& cfg,
                                          const std::vector<TrialSet>& sets) {
  DisplacementReport rep;
  rep.config = cfg;
  for (const TrialSet& ts : sets) {
    check_invalid_budget(ts);
    DisplacementRow row;
    row.N = ts.N;
    std::vector<double> scaled;
    Complex dir_sum{0.0, 0.0};
    long inward = 0;
    for (const TrialOutcome& o : ts.outcomes) {
      if (!o.valid || !o.success) continue;
      scaled.push_back(static_cast<double>(ts.N) * std::abs(o.displacement));
      dir_sum += o.displacement / std::abs(o.displacement);
      if (std::abs(o.nearest_crit) < std::abs(cfg.xi)) ++inward;
    }
    row.successes = static_cast<long>(scaled.size());
    if (row.successes > 0) {
      std::sort(scaled.begin(), scaled.end());
      const std::size_t m = scaled.size();
      row.median_scaled = m % 2 == 1
                              ? scaled[m / 2]
                              : 0.5 * (scaled[m / 2 - 1] + scaled[m / 2]);
      row.circ_mean_arg = std::arg(dir_sum);
      const double rbar = std::abs(dir_sum) / static_cast<double>(m);
      row.circ_sd = rbar > 0.0
                        ? std::sqrt(std::max(0.0, -2.0 * std::log(rbar)))
                        : std::numeric_limits<double>::infinity();
      row.frac_inward =
          static_cast<double>(inward) / static_cast<double>(row.successes);
    }
    rep.rows.push_back(row);
  }
  return rep;
}

DisplacementReport displacement_stats(const PairingConfig& cfg) {
  if (cfg.N_list.empty())
    throw std::invalid_argument("displacement needs a nonempty N list");
  std::vector<TrialSet> sets;
  sets.reserve(cfg.N_list.size());
  for (const long N : cfg.N_list) sets.push_back(run_trials(cfg, N));
  return displacement_from_sets(cfg, sets);
}

MeanFieldResult mean_field(const PairingConfig& cfg, Complex point,
                           long trials) {
  if (cfg.N_list.empty())
    throw std::invalid_argument("mean field needs a nonempty N list");
  if (trials < 2) throw std::invalid_argument("mean field needs >= 2 trials");
  const long N = cfg.N_list.front();
  if (std::abs(point - cfg.xi) < 1e-8)
    throw std::invalid_argument("probe point must differ from xi");
  const GaussianEnsemble ens = build_ensemble(cfg, N);
  const ComplexPolynomial sig = sigma_or_one(cfg);
  check_field_hypothesis(cfg, ens, sig);
  Complex sig_term{0.0, 0.0};
  if (numerical_degree(sig) >= 1) {
    for (const Complex sz : expand_roots(roots(sig)))
      if (std::abs(point - sz) < 1e-8)
        throw std::invalid_argument(
            "reference section vanishes at the probe point");
    sig_term = newton_log_derivative(sig, point);
  }
  const ConditionalEnsemble ce = condition_at(ens, cfg.xi);

  MeanFieldResult res;
  std::vector<Complex> vals;
  vals.reserve(static_cast<std::size_t>(trials));
  for (long i = 0; i < trials; ++i) {
    CounterRng rng = derive_stream(
        cfg.master_seed,
        (1ull << 32) | static_cast<std::uint64_t>(N),  // distinct from trials
        static_cast<std::uint64_t>(i));
    const ComplexPolynomial p = sample_conditional(ce, rng);
    const Complex nd = newton_log_derivative(p, point);
    const double mag = std::abs(nd);
    // Newton distance 1/|p'/p| underestimates the gap to the nearest zero
    // only when several zeros crowd the point, which is the case to exclude.
    if (!std::isfinite(mag) || 1.0 / mag < 1e-8) {
      ++res.excluded;
      continue;
    }
    vals.push_back(nd - sig_term);
  }
  res.used = static_cast<long>(vals.size());
  if (res.used < 2) throw std::runtime_error("all mean-field trials excluded");
  Complex sum{0.0, 0.0};
  for (const Complex v : vals) sum += v;
  res.mean = sum / static_cast<double>(res.used);
  double sre = 0.0, sim = 0.0;
  for (const Complex v : vals) {
    sre += (v.real() - res.mean.real()) * (v.real() - res.mean.real());
    sim += (v.imag() - res.mean.imag()) * (v.imag() - res.mean.imag());
  }
  const double n = static_cast<double>(res.used);
  res.sd_re = std::sqrt(sre / (n - 1.0));
  res.sd_im = std::sqrt(sim / (n - 1.0));
  res.se_re = res.sd_re / std::sqrt(n);
  res.se_im = res.sd_im / std::sqrt(n);
  return res;
}

CorrEstimate loggauss_corr(const std::vector<Complex>& u,
                           const std::vector<Complex>& v, long trials,
                           CounterRng& rng) {
  if (u.empty() || u.size() != v.size())
    throw std::invalid_argument("vectors must be nonempty and equal length");
  if (trials < 2) throw std::invalid_argument("needs >= 2 trials");
  double nu = 0.0, nv = 0.0;
  for (const Complex c : u) nu += std::norm(c);
  for (const Complex c : v) nv += std::norm(c);
  if (std::abs(std::sqrt(nu) - 1.0) > 1e-12 ||
      std::abs(std::sqrt(nv) - 1.0) > 1e-12)
    throw std::invalid_argument("vectors must be unit norm to 1e-12");

  double s1 = 0.0, s2 = 0.0;
  for (long t = 0; t < trials; ++t) {
    Complex au{0.0, 0.0}, av{0.0, 0.0};
    for (std::size_t k = 0; k < u.size(); ++k) {
      const Complex a = rng.complex_gaussian();
      au += a * std::conj(u[k]);
      av += a * std::conj(v[k]);
    }
    const double prod = std::log(std::abs(au)) * std::log(std::abs(av));
    s1 += prod;
    s2 += prod * prod;
  }
  CorrEstimate est;
  const double n = static_cast<double>(trials);
  est.estimate = s1 / n;
  est.se = std::sqrt(std::max(0.0, (s2 - s1 * s1 / n) / (n - 1.0)) / n);
  return est;
}

}  // namespace critpairs
