#include "critpairs/roots.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace critpairs {

namespace {

struct PreparedPoly {
  ComplexPolynomial p;        // trimmed, degree n >= 1
  ComplexPolynomial reversed; // coefficients in reverse order
  long n = 0;
};

PreparedPoly prepare(const ComplexPolynomial& p, long n) {
  PreparedPoly pp;
  pp.n = n;
  pp.p.coeffs.assign(p.coeffs.begin(), p.coeffs.begin() + n + 1);
  pp.reversed.coeffs.assign(pp.p.coeffs.rbegin(), pp.p.coeffs.rend());
  return pp;
}

// Fused Horner for value and derivative with a shared power-of-two exponent.
// Only the ratio dp/p is consumed, so the exponent cancels. Coefficients are
// rescaled into the current frame before each add; flush-to-zero is exact
// since a coefficient below the frame is negligible against the partial sum.
inline Complex ratio_dp_p(const std::vector<Complex>& c, Complex z,
                          bool& at_root) {
  Complex p = c.back();
  Complex dp{0.0, 0.0};
  int e2 = 0;
  for (std::size_t j = c.size() - 1; j-- > 0;) {
    dp = dp * z + p;
    Complex cj = c[j];
    if (e2 != 0) cj = {std::ldexp(cj.real(), -e2), std::ldexp(cj.imag(), -e2)};
    p = p * z + cj;
    const double m = std::max(std::max(std::abs(p.real()), std::abs(p.imag())),
                              std::max(std::abs(dp.real()), std::abs(dp.imag())));
    if (m > 0x1p500) {
      p *= 0x1p-512;
      dp *= 0x1p-512;
      e2 += 512;
    }
  }
  if (p == Complex(0.0, 0.0)) {
    at_root = true;
    return {0.0, 0.0};
  }
  at_root = false;
  return dp / p;
}

// p'(z)/p(z) with the reversed-polynomial form outside the unit circle.
inline Complex log_deriv(const PreparedPoly& pp, Complex z, bool& at_root) {
  if (std::norm(z) <= 1.0) return ratio_dp_p(pp.p.coeffs, z, at_root);
  const Complex u = 1.0 / z;
  const Complex qr = ratio_dp_p(pp.reversed.coeffs, u, at_root);
  if (at_root) return {0.0, 0.0};
  return static_cast<double>(pp.n) * u - qr * u * u;
}

std::vector<Complex> initial_points(const PreparedPoly& pp, bool polygon) {
  const long n = pp.n;
  std::vector<Complex> z(static_cast<std::size_t>(n));
  std::vector<double> radii(static_cast<std::size_t>(n), 1.0);
  if (!polygon) {
    const double a0 = std::abs(pp.p.coeffs.front());
    const double an = std::abs(pp.p.coeffs.back());
    double r = 1.0;
    if (a0 > 0.0 && an > 0.0)
      r = std::exp((std::log(a0) - std::log(an)) / static_cast<double>(n));
    std::fill(radii.begin(), radii.end(), r);
  } else {
    // Upper convex hull of (j, log|c_j|); each hull edge of width k yields k
    // starting moduli at the edge's local root scale.
    std::vector<std::pair<double, double>> pts;
    pts.reserve(pp.p.coeffs.size());
    for (std::size_t j = 0; j < pp.p.coeffs.size(); ++j) {
      const double a = std::abs(pp.p.coeffs[j]);
      if (a > 0.0) pts.emplace_back(static_cast<double>(j), std::log(a));
    }
    std::vector<std::pair<double, double>> hull;
    for (const auto& pt : pts) {
      while (hull.size() >= 2) {
        const auto& a = hull[hull.size() - 2];
        const auto& b = hull[hull.size() - 1];
        const double cross = (b.first - a.first) * (pt.second - a.second) -
                             (b.second - a.second) * (pt.first - a.first);
        if (cross >= 0.0)
          hull.pop_back();
        else
          break;
      }
      hull.push_back(pt);
    }
    std::size_t idx = 0;
    for (std::size_t e = 0; e + 1 < hull.size(); ++e) {
      const long k = static_cast<long>(hull[e + 1].first - hull[e].first);
      const double r =
          std::exp((hull[e].second - hull[e + 1].second) / static_cast<double>(k));
      for (long i = 0; i < k && idx < radii.size(); ++i) radii[idx++] = r;
    }
    while (idx < radii.size()) radii[idx++] = 1.0;
  }
  for (long i = 0; i < n; ++i) {
    // Deterministic angles: golden-ratio spread plus 1e-3 jitter so no two
    // starts coincide and no start sits on a coordinate axis.
    const double golden = 0.61803398874989484820;
    const double angle =
        2.0 * std::numbers::pi *
            (static_cast<double>(i) / static_cast<double>(n) +
             golden * static_cast<double>(i % 7) / 7.0) +
        1e-3 * std::sin(static_cast<double>(3 * i + 1));
    z[static_cast<std::size_t>(i)] =
        radii[static_cast<std::size_t>(i)] *
        Complex(std::cos(angle), std::sin(angle));
  }
  return z;
}

std::vector<Complex> companion_eigenvalues(const PreparedPoly& pp) {
  const long n = pp.n;
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
  const Complex lead = pp.p.coeffs.back();
  for (long j = 0; j < n; ++j)
    A(j, n - 1) = -pp.p.coeffs[static_cast<std::size_t>(j)] / lead;
  for (long j = 1; j < n; ++j) A(j, j - 1) = 1.0;

  // Parlett-Reinsch balancing with power-of-two factors.
  const double radix = 2.0;
  bool changed = true;
  int guard = 0;
  while (changed && guard++ < 100) {
    changed = false;
    for (long i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (long j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(A(j, i));
        r += std::abs(A(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      const double s = c + r;
      double f = 1.0;
      while (c < r / radix) {
        c *= radix;
        r /= radix;
        f *= radix;
      }
      while (c >= r * radix) {
        c /= radix;
        r *= radix;
        f /= radix;
      }
      if ((c + r) < 0.95 * s) {
        changed = true;
        A.col(i) *= f;
        A.row(i) /= f;
      }
    }
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A, false);
  std::vector<Complex> out(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
  return out;
}

void polish(const PreparedPoly& pp, std::vector<Complex>& z, int passes) {
  for (int pass = 0; pass < passes; ++pass) {
    for (auto& zi : z) {
      bool at_root = false;
      const Complex r = log_deriv(pp, zi, at_root);
      if (at_root) continue;
      if (r == Complex(0.0, 0.0)) continue;
      const Complex step = 1.0 / r;
      if (std::abs(step) < 1.0 + std::abs(zi)) zi -= step;
    }
  }
}

struct AberthResult {
  std::vector<Complex> z;
  int iterations = 0;
  bool converged = false;
};

AberthResult aberth(const PreparedPoly& pp, const RootSolveOptions& opts) {
  AberthResult res;
  res.z = initial_points(pp, opts.newton_polygon_init);
  const std::size_t n = res.z.size();
  std::vector<char> locked(n, 0);
  std::vector<double> step_history;
  std::vector<std::size_t> lock_history;
  std::vector<double> xs(n), ys(n);

  for (int sweep = 0; sweep < opts.max_iterations; ++sweep) {
    res.iterations = sweep + 1;
    double max_rel_step = 0.0;
    std::size_t n_locked = 0;
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = res.z[i].real();
      ys[i] = res.z[i].imag();
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (locked[i]) {
        ++n_locked;
        continue;
      }
      bool at_root = false;
      const Complex r = log_deriv(pp, res.z[i], at_root);
      if (at_root) {
        locked[i] = 1;
        ++n_locked;
        continue;
      }
      double s_re = 0.0, s_im = 0.0;
      const double xi = res.z[i].real(), yi = res.z[i].imag();
      bool collided = false;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double dx = xi - xs[j];
        const double dy = yi - ys[j];
        const double d2 = dx * dx + dy * dy;
        if (d2 == 0.0) {
          collided = true;
          continue;
        }
        s_re += dx / d2;
        s_im += -dy / d2;
      }
      if (collided) {
        // Coincident iterates: nudge and retry next sweep.
        res.z[i] += Complex(1e-6 * (1.0 + std::abs(res.z[i])),
                            1e-6 * (1.0 + std::abs(res.z[i])));
        max_rel_step = std::max(max_rel_step, 1.0);
        continue;
      }
      const Complex denom = r - Complex(s_re, s_im);
      if (denom == Complex(0.0, 0.0)) continue;
      const Complex delta = 1.0 / denom;
      res.z[i] -= delta;
      xs[i] = res.z[i].real();
      ys[i] = res.z[i].imag();
      const double rel =
          std::abs(delta) / (std::abs(res.z[i]) + 1e-300);
      max_rel_step = std::max(max_rel_step, rel);
      if (rel < 4e-15) {
        locked[i] = 1;
        ++n_locked;
      }
    }
    step_history.push_back(max_rel_step);
    lock_history.push_back(n_locked);
    if (n_locked == n) {
      res.converged = true;
      break;
    }
    // Stagnation: no root has locked and the step size has gone flat for a
    // whole window. While locking still progresses the sweep is healthy.
    const std::size_t h = step_history.size();
    if (h >= 21 && lock_history[h - 1] == lock_history[h - 21] &&
        step_history[h - 1] > 1e-2 * step_history[h - 21] &&
        step_history[h - 1] > 1e-10)
      break;
  }
  if (!res.converged) {
    // Accept anyway if every point is individually converged by step size.
    bool all_small = true;
    for (std::size_t i = 0; i < n; ++i)
      if (!locked[i]) all_small = false;
    res.converged = all_small;
  }
  return res;
}

struct Cluster {
  Complex centroid;
  int size;
};

std::vector<Cluster> cluster_roots(std::vector<Complex> pts, double tol) {
  std::vector<Cluster> cl;
  cl.reserve(pts.size());
  for (const Complex& p : pts) cl.push_back({p, 1});
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < cl.size() && !merged; ++i) {
      for (std::size_t j = i + 1; j < cl.size() && !merged; ++j) {
        const int m = cl[i].size + cl[j].size;
        const double thresh =
            10.0 * std::pow(tol, 1.0 / static_cast<double>(m));
        if (std::abs(cl[i].centroid - cl[j].centroid) <= thresh) {
          const double wi = static_cast<double>(cl[i].size) / m;
          const double wj = static_cast<double>(cl[j].size) / m;
          cl[i].centroid = wi * cl[i].centroid + wj * cl[j].centroid;
          cl[i].size = m;
          cl.erase(cl.begin() + static_cast<long>(j));
          merged = true;
        }
      }
    }
  }
  return cl;
}

RootSet finalize(const PreparedPoly& pp, const std::vector<Complex>& pts,
                 const RootSolveOptions& opts, int iterations, bool fallback) {
  const auto clusters = cluster_roots(pts, opts.tol);
  RootSet rs;
  rs.iterations = iterations;
  rs.used_fallback = fallback;
  for (const auto& c : clusters) {
    rs.roots.push_back(c.centroid);
    rs.multiplicities.push_back(c.size);
    rs.residuals.push_back(relative_residual(pp.p, c.centroid));
  }
  return rs;
}

}  // namespace

RootSet roots(const ComplexPolynomial& p, const RootSolveOptions& opts) {
  const long full_degree = numerical_degree(p);
  if (full_degree < 1)
    throw std::invalid_argument("roots: polynomial must have degree >= 1");

  // Exact zeros at the origin come off first.
  std::size_t lead_zeros = 0;
  while (p.coeffs[lead_zeros] == Complex(0.0, 0.0)) ++lead_zeros;
  ComplexPolynomial shifted;
  shifted.coeffs.assign(p.coeffs.begin() + static_cast<long>(lead_zeros),
                        p.coeffs.begin() + full_degree + 1);
  const long n = full_degree - static_cast<long>(lead_zeros);

  RootSet rs;
  if (n == 0) {
    rs.iterations = 0;
  } else if (n == 1) {
    const Complex r = -shifted.coeffs[0] / shifted.coeffs[1];
    rs.roots.push_back(r);
    rs.multiplicities.push_back(1);
    rs.residuals.push_back(relative_residual(shifted, r));
  } else if (n == 2) {
    const Complex a = shifted.coeffs[2], b = shifted.coeffs[1],
                  c = shifted.coeffs[0];
    const Complex disc = std::sqrt(b * b - 4.0 * a * c);
    const Complex q =
        (std::norm(b + disc) >= std::norm(b - disc)) ? -0.5 * (b + disc)
                                                     : -0.5 * (b - disc);
    std::vector<Complex> pts;
    if (q == Complex(0.0, 0.0)) {
      pts = {Complex(0.0, 0.0), Complex(0.0, 0.0)};
    } else {
      pts = {q / a, c / q};
    }
    const PreparedPoly pp = prepare(shifted, n);
    rs = finalize(pp, pts, opts, 0, false);
  } else {
    const PreparedPoly pp = prepare(shifted, n);
    AberthResult ar = aberth(pp, opts);
    RootSet candidate = finalize(pp, ar.z, opts, ar.iterations, false);
    // Residuals are the acceptance criterion; the sweep-convergence flag only
    // matters as a hint (stagnation with clean residuals is still a solve).
    bool ok = true;
    for (double r : candidate.residuals)
      if (!(r <= opts.tol)) ok = false;
    if (!ok) {
      if (!opts.allow_fallback)
        throw RootSolveFailure("roots: Aberth iteration failed to converge",
                               candidate);
      std::vector<Complex> ev = companion_eigenvalues(pp);
      polish(pp, ev, 3);
      candidate = finalize(pp, ev, opts, ar.iterations, true);
      for (double r : candidate.residuals)
        if (!(r <= opts.tol))
          throw RootSolveFailure(
              "roots: residuals above tolerance after companion fallback",
              candidate);
    }
    rs = std::move(candidate);
  }

  if (lead_zeros > 0) {
    rs.roots.push_back(Complex(0.0, 0.0));
    rs.multiplicities.push_back(static_cast<int>(lead_zeros));
    rs.residuals.push_back(0.0);
  }
  return rs;
}

namespace {
DiskCount count_impl(const std::vector<Complex>& pts,
                     const std::vector<int>& mult, Complex center,
                     double radius, CoordMode mode) {
  if (!(radius > 0.0))
    throw std::invalid_argument("count_in_disk: radius must be positive");
  DiskCount dc;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double d;
    if (mode == CoordMode::euclidean) {
      d = std::abs(pts[i] - center);
    } else {
      const Complex den = 1.0 + std::conj(center) * pts[i];
      if (den == Complex(0.0, 0.0)) {
        d = std::numeric_limits<double>::infinity();
      } else {
        d = std::abs((pts[i] - center) / den);
      }
    }
    if (std::abs(d - radius) <= 1e-9 * radius) dc.boundary_ambiguous = true;
    if (d < radius) dc.count += mult.empty() ? 1 : mult[i];
  }
  return dc;
}
}  // namespace

DiskCount count_in_disk(const RootSet& rs, Complex center, double radius,
                        CoordMode mode) {
  return count_impl(rs.roots, rs.multiplicities, center, radius, mode);
}

DiskCount count_in_disk(const std::vector<Complex>& pts, Complex center,
                        double radius, CoordMode mode) {
  return count_impl(pts, {}, center, radius, mode);
}

}  // namespace critpairs
