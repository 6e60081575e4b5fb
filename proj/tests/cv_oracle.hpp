#pragma once

// Direct transcription of the cross-validation criterion:
//   CV(h) = sum_x fhat(x)^2 - (2/n) sum_i (1/(n-1)) sum_{l != i} K_{X_i,h}(X_l)
// with fhat computed afresh by a triple loop. Kernel masses come from the
// long double oracles; the support is the range the library certified, so
// both sides sum over the same x.

#include <cstdint>
#include <vector>

#include "disckern/cmp_kernel.hpp"
#include "disckern/kernel.hpp"
#include "oracles.hpp"

namespace oracle {

inline long double kernel_mass(disckern::KernelFamily f, std::int64_t x, double h, std::int64_t z) {
  switch (f) {
    case disckern::KernelFamily::Dirac:
      return x == z ? 1.0L : 0.0L;
    case disckern::KernelFamily::Binomial:
      return binomial_kernel(static_cast<int>(x), h, static_cast<int>(z));
    case disckern::KernelFamily::CoMPoisson:
      // natural-scale summation is too slow for the property loops; the
      // library pmf is itself checked against cmp_pmf elsewhere
      return disckern::cmp::cmp_pmf(x, h, z);
  }
  return 0.0L;
}

inline double cv_brute_force(disckern::KernelFamily f, const std::vector<std::int64_t>& xs,
                             double h, std::int64_t support_max) {
  const std::size_t n = xs.size();
  std::vector<long double> raw(static_cast<std::size_t>(support_max + 1), 0.0L);
  for (std::int64_t x = 0; x <= support_max; ++x) {
    for (std::size_t i = 0; i < n; ++i) raw[static_cast<std::size_t>(x)] += kernel_mass(f, x, h, xs[i]);
    raw[static_cast<std::size_t>(x)] /= n;
  }
  long double c = 0.0L;
  for (long double r : raw) c += r;
  long double quad = 0.0L;
  for (long double r : raw) quad += (r / c) * (r / c);
  long double loo_sum = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    long double loo = 0.0L;
    for (std::size_t l = 0; l < n; ++l) {
      if (l != i) loo += kernel_mass(f, xs[i], h, xs[l]);
    }
    loo_sum += loo / (n - 1);
  }
  return static_cast<double>(quad - 2.0L / n * loo_sum);
}

}  // namespace oracle
