#pragma once

// Mean-parametrized Conway-Maxwell-Poisson kernel.
//
// The kernel at target x with bandwidth h is the CMP law with dispersion
// nu = 1/h whose rate lambda is chosen so that the mean equals x:
//
//   K_{x,h}(z) = lambda^z / (z!)^nu / D(lambda, nu),
//   D(lambda, nu) = sum_{z >= 0} lambda^z / (z!)^nu.
//
// lambda grows like (x + 1/2)^nu, which overflows a double for modest h, so
// everything here works with theta = log(lambda).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <vector>

#include "disckern/error.hpp"
#include "disckern/numeric.hpp"

namespace disckern::cmp {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Result of summing the normalizing series.
struct SeriesValue {
  double value = 1.0;      // D; may be +inf when only log_value is representable
  double log_value = 0.0;  // log D
  Count terms_used = 1;
  double tail_bound = 0.0;  // bound on the neglected tail, relative to D
};

/// Solved kernel parameters for one (target, dispersion) pair.
struct CmpParams {
  Count mu = 0;                  // target mean x
  double nu = 1.0;               // dispersion, 1/h
  double log_lambda = kNegInf;   // log of lambda(x, nu); -inf iff mu == 0
  double log_normalizer = 0.0;   // log D(lambda, nu) over the truncated range
  double mean = 0.0;             // achieved mean, within solve_tol of mu
  double variance = 0.0;
  Count truncation_z_max = 0;    // last support point kept
  double tail_bound = 0.0;

  double lambda() const { return std::exp(log_lambda); }

  /// log K(z); -inf outside the support.
  double log_pmf(Count z) const {
    if (z < 0) return kNegInf;
    if (mu == 0) return z == 0 ? 0.0 : kNegInf;
    return static_cast<double>(z) * log_lambda - nu * numeric::log_factorial(z) -
           log_normalizer;
  }

  double pmf(Count z) const {
    const double lp = log_pmf(z);
    return lp == kNegInf ? 0.0 : std::exp(lp);
  }
};

/// Support cap used when the caller does not give one:
/// 10 (x + 10) max(1, nu^{-1/2}), at most 10^6.
inline Count default_z_max(Count x, double nu) {
  const double scale = std::max(1.0, 1.0 / std::sqrt(nu));
  const double cap = 10.0 * static_cast<double>(x + 10) * scale;
  return static_cast<Count>(std::min(cap, 1e6));
}

namespace detail {

inline constexpr double kRatioStop = 1e-16;
inline constexpr int kRatioRun = 3;

/// Log terms z * theta - nu * log z! for z = 0, 1, ... until three
/// consecutive term/partial-sum ratios fall below 1e-16. The relative tail
/// is bounded by a geometric series in the next term ratio.
struct LogTerms {
  std::vector<double> log_terms;
  double log_sum = kNegInf;
  double tail_bound = 0.0;
};

inline LogTerms log_terms(double theta, double nu, Count z_max) {
  LogTerms out;
  if (theta == kNegInf) {
    out.log_terms.push_back(0.0);
    out.log_sum = 0.0;
    return out;
  }
  if (!std::isfinite(theta)) {
    fail(ErrorKind::Truncation, "CMP series overflow: lambda is not finite");
  }
  int run = 0;
  for (Count z = 0;; ++z) {
    if (z > z_max) {
      fail(ErrorKind::Truncation,
           "CMP series did not converge within z_max = " + std::to_string(z_max) +
               " (log lambda = " + std::to_string(theta) +
               ", nu = " + std::to_string(nu) + ")");
    }
    const double lt = static_cast<double>(z) * theta - nu * numeric::log_factorial(z);
    out.log_terms.push_back(lt);
    out.log_sum = numeric::log_add(out.log_sum, lt);
    const double ratio = std::exp(lt - out.log_sum);
    run = ratio < kRatioStop ? run + 1 : 0;
    if (run >= kRatioRun) {
      // term ratio lambda / (z+1)^nu, decreasing in z
      const double next = std::exp(theta - nu * std::log(static_cast<double>(z + 1)));
      if (next < 1.0) {
        out.tail_bound = ratio * next / (1.0 - next);
        return out;
      }
      run = 0;
    }
  }
}

struct Moments {
  double log_norm = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  Count z_last = 0;
  double tail_bound = 0.0;
};

inline Moments moments(double theta, double nu, Count z_max) {
  const LogTerms t = log_terms(theta, nu, z_max);
  Moments m;
  m.log_norm = t.log_sum;
  m.z_last = static_cast<Count>(t.log_terms.size()) - 1;
  m.tail_bound = t.tail_bound;
  std::vector<double> p(t.log_terms.size());
  for (std::size_t z = 0; z < p.size(); ++z) p[z] = std::exp(t.log_terms[z] - t.log_sum);
  std::vector<double> buf(p.size());
  for (std::size_t z = 0; z < p.size(); ++z) buf[z] = static_cast<double>(z) * p[z];
  m.mean = numeric::pairwise_sum(buf);
  for (std::size_t z = 0; z < p.size(); ++z) {
    const double d = static_cast<double>(z) - m.mean;
    buf[z] = d * d * p[z];
  }
  m.variance = numeric::pairwise_sum(buf);
  return m;
}

inline constexpr int kMaxBracketSteps = 4096;
inline constexpr int kMaxSolveIterations = 400;

inline CmpParams solve_uncached(Count x, double nu, const NumericPolicy& policy) {
  CmpParams out;
  out.mu = x;
  out.nu = nu;
  const Count z_max = std::min(default_z_max(x, nu), policy.max_support);
  if (x == 0) {
    out.truncation_z_max = 0;
    return out;
  }
  const double target = static_cast<double>(x);
  auto eval = [&](double theta) { return moments(theta, nu, z_max); };

  // Bracket in log space: start at lambda = max(1, x^nu) and double (or halve)
  // lambda until the mean straddles x.
  const double ln2 = std::log(2.0);
  double start = std::max(0.0, nu * std::log(target));
  Moments m = eval(start);
  double lo, hi;
  Moments m_lo, m_hi;
  if (m.mean < target) {
    lo = start;
    m_lo = m;
    hi = start;
    int steps = 0;
    do {
      if (++steps > kMaxBracketSteps) {
        fail(ErrorKind::BracketFailure,
             "lambda bracket expansion failed for x = " + std::to_string(x) +
                 ", nu = " + std::to_string(nu));
      }
      lo = hi;
      m_lo = m;
      hi += ln2;
      m = eval(hi);
    } while (m.mean < target);
    m_hi = m;
  } else {
    hi = start;
    m_hi = m;
    lo = start;
    int steps = 0;
    do {
      if (++steps > kMaxBracketSteps) {
        fail(ErrorKind::BracketFailure,
             "lambda bracket expansion failed for x = " + std::to_string(x) +
                 ", nu = " + std::to_string(nu));
      }
      hi = lo;
      m_hi = m;
      lo -= ln2;
      m = eval(lo);
    } while (m.mean > target);
    m_lo = m;
  }

  // Safeguarded Newton on m(theta) - x; dm/dtheta = Var > 0.
  double theta = std::abs(m_lo.mean - target) < std::abs(m_hi.mean - target) ? lo : hi;
  Moments best = theta == lo ? m_lo : m_hi;
  const double tol = policy.solve_tol / 16.0;
  for (int it = 0; it < kMaxSolveIterations && std::abs(best.mean - target) > tol; ++it) {
    double next = theta - (best.mean - target) / best.variance;
    if (!(best.variance > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == lo || next == hi) break;
    theta = next;
    best = eval(theta);
    if (best.mean < target) {
      lo = theta;
    } else {
      hi = theta;
    }
  }
  if (std::abs(best.mean - target) > policy.solve_tol) {
    fail(ErrorKind::BracketFailure,
         "lambda solver could not reach solve_tol for x = " + std::to_string(x) +
             ", nu = " + std::to_string(nu));
  }
  out.log_lambda = theta;
  out.log_normalizer = best.log_norm;
  out.mean = best.mean;
  out.variance = best.variance;
  out.truncation_z_max = best.z_last;
  out.tail_bound = best.tail_bound;
  return out;
}

/// Concurrent insert-if-absent memo of solved parameters keyed by
/// (x, nu, solve_tol, max_support).
class LambdaMemo {
 public:
  using Key = std::tuple<Count, std::uint64_t, std::uint64_t, Count>;

  static LambdaMemo& instance() {
    static LambdaMemo memo;
    return memo;
  }

  template <typename Solve>
  CmpParams get_or_solve(const Key& key, Solve&& solve) {
    {
      std::shared_lock lock(mutex_);
      auto it = table_.find(key);
      if (it != table_.end()) return it->second;
    }
    CmpParams value = solve();
    std::unique_lock lock(mutex_);
    return table_.try_emplace(key, value).first->second;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return table_.size();
  }

  void clear() {
    std::unique_lock lock(mutex_);
    table_.clear();
  }

 private:
  mutable std::shared_mutex mutex_;
  std::map<Key, CmpParams> table_;
};

inline std::uint64_t bits(double v) {
  std::uint64_t b;
  std::memcpy(&b, &v, sizeof b);
  return b;
}

}  // namespace detail

/// Normalizing constant D(lambda, nu) for lambda on the natural scale.
inline SeriesValue cmp_normalizer(double lambda, double nu, Count z_max = 1'000'000) {
  if (!(nu > 0.0) || !std::isfinite(nu)) fail(ErrorKind::InvalidArgument, "nu must be > 0");
  if (std::isnan(lambda) || lambda < 0.0) {
    fail(ErrorKind::InvalidArgument, "lambda must be non-negative");
  }
  if (std::isinf(lambda)) fail(ErrorKind::Truncation, "CMP series overflow: lambda is infinite");
  const auto t = detail::log_terms(lambda == 0.0 ? kNegInf : std::log(lambda), nu, z_max);
  SeriesValue out;
  out.log_value = t.log_sum;
  out.value = std::exp(t.log_sum);
  out.terms_used = static_cast<Count>(t.log_terms.size());
  out.tail_bound = t.tail_bound;
  return out;
}

/// Solves sum_z lambda^z / (z!)^nu (z - x) = 0 for lambda. Memoized.
inline CmpParams solve_lambda(Count x, double nu, const NumericPolicy& policy = {}) {
  if (x < 0) fail(ErrorKind::InvalidArgument, "target x must be non-negative");
  if (!(nu > 0.0) || !std::isfinite(nu)) fail(ErrorKind::InvalidArgument, "nu must be > 0");
  if (!(policy.solve_tol > 0.0)) fail(ErrorKind::InvalidArgument, "solve_tol must be > 0");
  const detail::LambdaMemo::Key key{x, detail::bits(nu), detail::bits(policy.solve_tol),
                                    policy.max_support};
  return detail::LambdaMemo::instance().get_or_solve(
      key, [&] { return detail::solve_uncached(x, nu, policy); });
}

/// Kernel parameters for target x at bandwidth h (nu = 1/h).
inline CmpParams kernel_params(Count x, double h, const NumericPolicy& policy = {}) {
  if (!(h > 0.0) || !std::isfinite(h)) fail(ErrorKind::InvalidArgument, "bandwidth must be > 0");
  return solve_lambda(x, 1.0 / h, policy);
}

inline double cmp_pmf(Count x, double h, Count z, const NumericPolicy& policy = {}) {
  return kernel_params(x, h, policy).pmf(z);
}

/// Exact kernel variance by summation over the truncated support.
inline double cmp_variance(Count x, double h, const NumericPolicy& policy = {}) {
  return kernel_params(x, h, policy).variance;
}

/// Leading variance term h * lambda^h as h -> 0.
inline double cmp_variance_asymptote(Count x, double h, const NumericPolicy& policy = {}) {
  const CmpParams p = kernel_params(x, h, policy);
  if (p.mu == 0) return 0.0;
  return h * std::exp(h * p.log_lambda);
}

/// Mean of the CMP(lambda, nu) law by direct summation, for an arbitrary
/// lambda (not necessarily solved).
inline double cmp_mean_at(double lambda, double nu, Count z_max = 1'000'000) {
  if (lambda == 0.0) return 0.0;
  return detail::moments(std::log(lambda), nu, z_max).mean;
}

/// Large-lambda expansion of log D(lambda, nu), through the lambda^{-2/nu}
/// term.
inline double log_normalizer_asymptotic(double lambda, double nu) {
  if (!(lambda > 0.0) || !(nu > 0.0)) {
    fail(ErrorKind::InvalidArgument, "asymptotic log-normalizer needs lambda > 0, nu > 0");
  }
  const double pi = 3.14159265358979323846;
  const double root = std::pow(lambda, 1.0 / nu);
  const double inv = 1.0 / root;
  const double nu2m1 = nu * nu - 1.0;
  return nu * root - (nu - 1.0) / (2.0 * nu) * std::log(lambda) -
         ((nu - 1.0) / 2.0 * std::log(2.0 * pi) + 0.5 * std::log(nu)) +
         nu2m1 / (24.0 * nu) * inv + nu2m1 / (48.0 * nu * nu) * inv * inv;
}

}  // namespace disckern::cmp
