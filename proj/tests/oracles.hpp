#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library's numeric paths: sums are plain long double loops on the
// natural scale, roots come from plain bisection on a sign change.

#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

/// sum_{z=0}^{terms} lambda^z / (z!)^nu in long double, term by term.
inline long double cmp_series(long double lambda, long double nu, int terms = 2000) {
  long double sum = 0.0L, term = 1.0L;
  for (int z = 0; z <= terms; ++z) {
    if (z > 0) term *= lambda / std::pow(static_cast<long double>(z), nu);
    sum += term;
    if (z > 10 && term < sum * 1e-30L) break;
  }
  return sum;
}

/// sum_z lambda^z / (z!)^nu (z - x) in long double.
inline long double cmp_condition(long double lambda, long double nu, long double x) {
  long double sum = 0.0L, term = 1.0L;
  for (int z = 0; z <= 4000; ++z) {
    if (z > 0) term *= lambda / std::pow(static_cast<long double>(z), nu);
    sum += term * (static_cast<long double>(z) - x);
    if (z > x + 10 && term < 1e-40L) break;
  }
  return sum;
}

inline long double cmp_mean(long double lambda, long double nu) {
  long double s0 = 0.0L, s1 = 0.0L, term = 1.0L;
  for (int z = 0; z <= 4000; ++z) {
    if (z > 0) term *= lambda / std::pow(static_cast<long double>(z), nu);
    s0 += term;
    s1 += term * z;
    if (z > 10 && term < s0 * 1e-30L) break;
  }
  return s1 / s0;
}

inline long double cmp_variance_at(long double lambda, long double nu) {
  long double s0 = 0.0L, s1 = 0.0L, s2 = 0.0L, term = 1.0L;
  for (int z = 0; z <= 4000; ++z) {
    if (z > 0) term *= lambda / std::pow(static_cast<long double>(z), nu);
    s0 += term;
    s1 += term * z;
    s2 += term * z * z;
    if (z > 10 && term < s0 * 1e-30L) break;
  }
  const long double m = s1 / s0;
  return s2 / s0 - m * m;
}

/// Root of the mean condition by bisection on the natural lambda scale.
inline long double cmp_lambda(long double x, long double nu) {
  if (x == 0.0L) return 0.0L;
  long double lo = 0.0L, hi = 1.0L;
  while (cmp_condition(hi, nu, x) < 0.0L) hi *= 2.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    (cmp_condition(mid, nu, x) < 0.0L ? lo : hi) = mid;
  }
  return 0.5L * (lo + hi);
}

/// K^CMP_{x,h}(z) by natural-scale summation.
inline long double cmp_pmf(long double x, long double h, int z) {
  const long double nu = 1.0L / h;
  const long double lambda = cmp_lambda(x, nu);
  if (lambda == 0.0L) return z == 0 ? 1.0L : 0.0L;
  long double term = 1.0L;
  for (int k = 1; k <= z; ++k) term *= lambda / std::pow(static_cast<long double>(k), nu);
  return term / cmp_series(lambda, nu);
}

inline long double binomial_pmf(int trials, long double p, int z) {
  if (z < 0 || z > trials) return 0.0L;
  long double c = 1.0L;
  for (int i = 1; i <= z; ++i) c = c * (trials - z + i) / i;
  return c * std::pow(p, z) * std::pow(1.0L - p, trials - z);
}

inline long double binomial_kernel(int x, long double h, int z) {
  return binomial_pmf(x + 1, (x + h) / (x + 1), z);
}

inline long double poisson_pmf(long double rate, int x) {
  long double p = std::exp(-rate);
  for (int k = 1; k <= x; ++k) p *= rate / k;
  return p;
}

}  // namespace oracle
