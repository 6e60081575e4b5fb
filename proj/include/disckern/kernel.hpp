#pragma once

// Discrete associated kernels on count supports: Dirac, binomial and the
// mean-parametrized CoM-Poisson kernel, plus diagnostics of how the kernel
// moments behave as the bandwidth shrinks.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "disckern/cmp_kernel.hpp"
#include "disckern/error.hpp"
#include "disckern/numeric.hpp"

namespace disckern {

enum class KernelFamily { Dirac, Binomial, CoMPoisson };

inline std::string_view to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::Dirac: return "dirac";
    case KernelFamily::Binomial: return "binomial";
    case KernelFamily::CoMPoisson: return "cmp";
  }
  return "unknown";
}

inline KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "dirac") return KernelFamily::Dirac;
  if (name == "binomial") return KernelFamily::Binomial;
  if (name == "cmp" || name == "compoisson") return KernelFamily::CoMPoisson;
  fail(ErrorKind::InvalidArgument, "unknown kernel '" + std::string(name) + "'");
}

struct KernelSpec {
  KernelFamily family = KernelFamily::CoMPoisson;
  NumericPolicy policy{};

  static KernelSpec dirac() { return {KernelFamily::Dirac, {}}; }
  static KernelSpec binomial() { return {KernelFamily::Binomial, {}}; }
  static KernelSpec cmp(NumericPolicy p = {}) { return {KernelFamily::CoMPoisson, p}; }
};

/// Whether h is a valid bandwidth for the family. The binomial kernel is only
/// defined for h in (0, 1).
inline bool admissible(const KernelSpec& spec, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) return false;
  return spec.family != KernelFamily::Binomial || h < 1.0;
}

inline void require_admissible(const KernelSpec& spec, double h) {
  if (!admissible(spec, h)) {
    fail(ErrorKind::InvalidArgument, "bandwidth " + std::to_string(h) +
                                         " is not admissible for the " +
                                         std::string(to_string(spec.family)) + " kernel");
  }
  if (spec.family == KernelFamily::CoMPoisson &&
      !(spec.policy.tail_tol > 0.0 && std::isfinite(spec.policy.tail_tol) &&
        spec.policy.solve_tol > 0.0 && std::isfinite(spec.policy.solve_tol))) {
    fail(ErrorKind::InvalidArgument, "CoM-Poisson kernel needs positive finite tolerances");
  }
}

inline void require_target(Count x) {
  if (x < 0) fail(ErrorKind::InvalidArgument, "target x must be non-negative");
}

//------------------------------------------------------------------------------
// Closed forms

inline double dirac_kernel_pmf(Count x, Count z) { return z == x ? 1.0 : 0.0; }

namespace detail {

// Binomial(trials, p) mass at z. Uses an exact product for the coefficient
// while it stays representable, logs otherwise.
inline double binomial_mass(Count trials, double p, Count z) {
  if (z < 0 || z > trials) return 0.0;
  const double q = 1.0 - p;
  if (trials <= 1000) {
    const Count k = std::min(z, trials - z);
    double coef = 1.0;
    for (Count i = 1; i <= k; ++i) {
      coef = coef * static_cast<double>(trials - k + i) / static_cast<double>(i);
    }
    return coef * std::pow(p, static_cast<double>(z)) *
           std::pow(q, static_cast<double>(trials - z));
  }
  const double lc = numeric::log_factorial(trials) - numeric::log_factorial(z) -
                    numeric::log_factorial(trials - z);
  return std::exp(lc + static_cast<double>(z) * std::log(p) +
                  static_cast<double>(trials - z) * std::log(q));
}

}  // namespace detail

/// Binomial kernel: Binomial(x + 1, (x + h) / (x + 1)) mass at z.
inline double binomial_kernel_pmf(Count x, double h, Count z) {
  require_target(x);
  if (!(h > 0.0 && h < 1.0)) {
    fail(ErrorKind::InvalidArgument, "binomial kernel requires h in (0, 1)");
  }
  const double trials = static_cast<double>(x + 1);
  return detail::binomial_mass(x + 1, (static_cast<double>(x) + h) / trials, z);
}

//------------------------------------------------------------------------------
// Kernel prepared at one target: cheap repeated evaluation in z.

struct DiracAt {
  Count x;
  double operator()(Count z) const { return dirac_kernel_pmf(x, z); }
};

struct BinomialAt {
  Count x;
  double p;
  double operator()(Count z) const { return detail::binomial_mass(x + 1, p, z); }
};

struct CmpAt {
  cmp::CmpParams params;
  double operator()(Count z) const { return params.pmf(z); }
};

class TargetKernel {
 public:
  TargetKernel(const KernelSpec& spec, Count x, double h) {
    require_target(x);
    require_admissible(spec, h);
    switch (spec.family) {
      case KernelFamily::Dirac: impl_ = DiracAt{x}; break;
      case KernelFamily::Binomial:
        impl_ = BinomialAt{x, (static_cast<double>(x) + h) / static_cast<double>(x + 1)};
        break;
      case KernelFamily::CoMPoisson: impl_ = CmpAt{cmp::kernel_params(x, h, spec.policy)}; break;
    }
  }

  double operator()(Count z) const {
    return std::visit([z](const auto& k) { return k(z); }, impl_);
  }

 private:
  std::variant<DiracAt, BinomialAt, CmpAt> impl_;
};

/// K_{x,h}(z). Points outside the kernel support give 0.
inline double kernel_pmf(const KernelSpec& spec, Count x, double h, Count z) {
  return TargetKernel(spec, x, h)(z);
}

//------------------------------------------------------------------------------
// Full kernel distribution

struct KernelEval {
  Count x = 0;
  double h = 0.0;
  std::vector<Count> support;
  std::vector<double> probabilities;
  double tail_bound = 0.0;  // mass excluded by truncation

  double total() const { return numeric::pairwise_sum(probabilities); }
};

inline KernelEval kernel_eval(const KernelSpec& spec, Count x, double h) {
  require_target(x);
  require_admissible(spec, h);
  KernelEval e;
  e.x = x;
  e.h = h;
  switch (spec.family) {
    case KernelFamily::Dirac:
      e.support = {x};
      e.probabilities = {1.0};
      break;
    case KernelFamily::Binomial: {
      const BinomialAt k{x, (static_cast<double>(x) + h) / static_cast<double>(x + 1)};
      for (Count z = 0; z <= x + 1; ++z) {
        e.support.push_back(z);
        e.probabilities.push_back(k(z));
      }
      break;
    }
    case KernelFamily::CoMPoisson: {
      const cmp::CmpParams p = cmp::kernel_params(x, h, spec.policy);
      for (Count z = 0; z <= p.truncation_z_max; ++z) {
        e.support.push_back(z);
        e.probabilities.push_back(p.pmf(z));
      }
      e.tail_bound = p.tail_bound;
      if (e.tail_bound > spec.policy.tail_tol) {
        fail(ErrorKind::Truncation, "CMP kernel tail bound exceeds tail_tol");
      }
      break;
    }
  }
  return e;
}

struct MeanVariance {
  double mean;
  double variance;
};

/// Mean and variance by direct summation over the kernel support.
inline MeanVariance kernel_mean_variance(const KernelSpec& spec, Count x, double h) {
  const KernelEval e = kernel_eval(spec, x, h);
  std::vector<double> buf(e.support.size());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    buf[i] = static_cast<double>(e.support[i]) * e.probabilities[i];
  }
  const double mean = numeric::pairwise_sum(buf);
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const double d = static_cast<double>(e.support[i]) - mean;
    buf[i] = d * d * e.probabilities[i];
  }
  return {mean, numeric::pairwise_sum(buf)};
}

//------------------------------------------------------------------------------
// Assumption probe

struct TargetMoments {
  double mean_dev;  // E Z_{x,h} - x
  double variance;
};

struct ProbeReport {
  std::vector<double> h_values;
  std::vector<double> sup_mean_dev;  // sup_x |E Z_{x,h} - x|
  std::vector<double> sup_var;       // sup_x Var Z_{x,h}
  // per_target[i][j] is the pointwise value at h_values[i], targets[j]
  std::vector<Count> targets;
  std::vector<std::vector<TargetMoments>> per_target;
  double delta_estimate = 0.0;
  std::optional<double> mean_rate;  // log-log slope of sup_mean_dev in h
  std::optional<double> var_rate;   // log-log slope of sup_var in h
};

/// Probes how fast the kernel mean approaches the target and the variance
/// approaches its limit, uniformly over a finite set of targets.
///
/// The limit variance is extrapolated to h = 0 with the interpolating
/// polynomial through the three smallest probed bandwidths, clamped at 0.
inline ProbeReport assumption_probe(const KernelSpec& spec, std::span<const Count> targets,
                                    std::span<const double> h_values) {
  if (targets.empty()) fail(ErrorKind::InvalidArgument, "probe needs at least one target");
  if (h_values.empty()) fail(ErrorKind::InvalidArgument, "probe needs at least one bandwidth");
  for (std::size_t i = 1; i < h_values.size(); ++i) {
    if (!(h_values[i] < h_values[i - 1])) {
      fail(ErrorKind::InvalidArgument, "probe bandwidths must be strictly decreasing");
    }
  }
  ProbeReport r;
  r.h_values.assign(h_values.begin(), h_values.end());
  r.targets.assign(targets.begin(), targets.end());
  for (double h : h_values) {
    double sup_dev = 0.0, sup_var = 0.0;
    std::vector<TargetMoments> row;
    for (Count x : targets) {
      const MeanVariance mv = kernel_mean_variance(spec, x, h);
      const double dev = mv.mean - static_cast<double>(x);
      row.push_back({dev, mv.variance});
      sup_dev = std::max(sup_dev, std::abs(dev));
      sup_var = std::max(sup_var, mv.variance);
    }
    r.per_target.push_back(std::move(row));
    r.sup_mean_dev.push_back(sup_dev);
    r.sup_var.push_back(sup_var);
  }
  const std::size_t k = std::min<std::size_t>(3, r.h_values.size());
  const auto hs = std::span<const double>(r.h_values).last(k);
  const auto vs = std::span<const double>(r.sup_var).last(k);
  r.delta_estimate = std::max(0.0, numeric::extrapolate_to_zero(hs, vs));
  r.mean_rate = numeric::loglog_slope(r.h_values, r.sup_mean_dev);
  r.var_rate = numeric::loglog_slope(r.h_values, r.sup_var);
  return r;
}

}  // namespace disckern
