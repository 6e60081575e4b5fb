#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace disckern {

using Count = std::int64_t;

/// Tolerances and bounds shared by every kernel and estimator routine.
struct NumericPolicy {
  double tail_tol = 1e-8;            // mass allowed outside a truncated support
  double solve_tol = 1e-10;          // |mean - target| accepted by the lambda solver
  Count max_support = 1'000'000;     // hard cap on any truncated support
};

namespace numeric {

/// Pairwise summation in a fixed order, so results do not depend on how the
/// inputs were produced.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline double log_factorial(Count z) {
  return std::lgamma(static_cast<double>(z) + 1.0);
}

/// log(exp(a) + exp(b)) without overflow.
inline double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

/// Least-squares slope of log(y) against log(x), skipping non-positive y.
/// Returns nullopt when fewer than two usable points remain.
inline std::optional<double> loglog_slope(std::span<const double> x,
                                          std::span<const double> y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (y[i] > 0.0 && x[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return std::nullopt;
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

/// Value at x = 0 of the interpolating polynomial through (x[i], y[i])
/// (Neville's scheme).
inline double extrapolate_to_zero(std::span<const double> x,
                                  std::span<const double> y) {
  std::vector<double> p(y.begin(), y.end());
  const std::size_t n = p.size();
  for (std::size_t m = 1; m < n; ++m) {
    for (std::size_t i = 0; i + m < n; ++i) {
      const double xi = x[i], xj = x[i + m];
      p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
    }
  }
  return n == 0 ? 0.0 : p[0];
}

}  // namespace numeric
}  // namespace disckern
