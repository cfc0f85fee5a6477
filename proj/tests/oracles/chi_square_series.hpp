#pragma once

// Chi-square upper quantile from the power series of the regularized lower
// incomplete gamma function, inverted by bisection.

#include <cmath>
#include <stdexcept>

namespace oracle {

inline double chi_square_cdf(double x, int k) {
  if (x <= 0.0) return 0.0;
  const double a = 0.5 * k;
  const double h = 0.5 * x;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= h / (a + n);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return std::exp(a * std::log(h) - h - std::lgamma(a)) * sum;
}

/// x with P(X > x) = significance for X ~ chi-square(k).
inline double chi_square_upper_quantile(int k, double significance) {
  double lo = 0.0;
  double hi = 1.0;
  while (1.0 - chi_square_cdf(hi, k) > significance) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (1.0 - chi_square_cdf(mid, k) > significance ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracle
