#pragma once

namespace critpairs {

// Dilogarithm Li2(x) on [0, 1], absolute error <= 1e-12.
double dilog(double x);

// Correlation of log-moduli of two jointly Gaussian unit-variance complex
// scalars whose correlation coefficient has modulus t:
//   E[log|X| log|Y|] = G(t) = gamma^2/4 + Li2(t^2)/4.
// Domain: 0 <= t <= 1 for gfun, 0 <= t < 1 for the derivatives.
double gfun(double t);
double gfun_d1(double t);  // G'(t)  = -log(1-t^2) / (2t)
double gfun_d2(double t);  // G''(t) = 1/(1-t^2) + log(1-t^2)/(2t^2)

}  // namespace critpairs
