#include "critpairs/special.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace critpairs {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

// Power series sum_{k>=1} x^k/k^2, valid and fast for x <= 1/2.
double dilog_series(double x) {
  double term = x;
  double sum = x;
  for (int k = 2; k < 200; ++k) {
    term *= x;
    const double add = term / (static_cast<double>(k) * k);
    sum += add;
    if (std::abs(add) < 1e-18 * (1.0 + std::abs(sum))) break;
  }
  return sum;
}

}  // namespace

double dilog(double x) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::domain_error("dilog: argument must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return std::numbers::pi * std::numbers::pi / 6.0;
  if (x <= 0.5) return dilog_series(x);
  // Reflection: Li2(x) + Li2(1-x) = pi^2/6 - ln(x) ln(1-x).
  const double y = 1.0 - x;
  return std::numbers::pi * std::numbers::pi / 6.0 -
         std::log(x) * std::log1p(-x) - dilog_series(y);
}

double gfun(double t) {
  if (!(t >= 0.0 && t <= 1.0))
    throw std::domain_error("gfun: argument must lie in [0, 1]");
  return kEulerGamma * kEulerGamma / 4.0 + dilog(t * t) / 4.0;
}

double gfun_d1(double t) {
  if (!(t >= 0.0 && t < 1.0))
    throw std::domain_error("gfun_d1: argument must lie in [0, 1)");
  if (t < 1e-4) {
    // -log(1-t^2)/(2t) = t/2 + t^3/4 + t^5/6 + ...
    const double t2 = t * t;
    return 0.5 * t * (1.0 + t2 / 2.0 + t2 * t2 / 3.0);
  }
  return -std::log1p(-t * t) / (2.0 * t);
}

double gfun_d2(double t) {
  if (!(t >= 0.0 && t < 1.0))
    throw std::domain_error("gfun_d2: argument must lie in [0, 1)");
  if (t < 1e-4) {
    // 1/(1-t^2) + log(1-t^2)/(2t^2) = 1/2 + 3t^2/4 + 5t^4/6 + ...
    const double t2 = t * t;
    return 0.5 + 0.75 * t2 + (5.0 / 6.0) * t2 * t2;
  }
  const double s = -std::log1p(-t * t);  // = -log(1-t^2) >= 0
  return 1.0 / (1.0 - t * t) - s / (2.0 * t * t);
}

}  // namespace critpairs
