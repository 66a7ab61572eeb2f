#pragma once

#include <cmath>
#include <vector>

namespace pinlab {

// Riemann zeta for real s != 1.
// s >= 0.5: Euler-Maclaurin (partial sums + integral tail + Bernoulli
// corrections), absolute accuracy ~1e-15 for s in [0.5, 60].
// s < 0.5: functional equation, which only ever recurses once.
double riemann_zeta(double s);

// sin(pi*x) with exact zeros at integer x (argument reduction done on x).
double sin_pi(double x);

// log(e^a + e^b), safe for -inf inputs.
double log_add_exp(double a, double b);

// log(sum_i e^{x_i}) by max shift; returns -inf for an empty or all -inf input.
double log_sum_exp(const std::vector<double>& xs);

// Regularized incomplete gamma functions: P(a,x) lower, Q(a,x) = 1 - P upper.
// Series / continued-fraction split at x = a+1 (a > 0, x >= 0).
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

// Polylogarithm on the exponential ray: Li_s(e^{-b}) = sum_{n>=1} n^{-s} e^{-bn}
// for s > 1, b >= 0.  Direct summation for b > 1; for 0 < b <= 1 the
// Gamma-function series around b = 0, which keeps full relative accuracy on
// the deficit Li_s(1) - Li_s(e^{-b}) even for b as small as 1e-12.  Accuracy
// degrades to ~1e-8 within 1e-8 of integer s (the expansion switches to its
// logarithmic form there) and near s = 1.
double polylog_exp(double s, double b);

// Kolmogorov distribution tail Q(t) = 2 sum_{j>=1} (-1)^{j-1} e^{-2 j^2 t^2}.
double kolmogorov_tail(double t);

}  // namespace pinlab
