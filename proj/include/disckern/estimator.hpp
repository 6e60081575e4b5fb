#pragma once

// Normalized discrete associated-kernel estimator of a pmf on the counts:
//
//   raw(x)        = (1/n) sum_i K_{x,h}(X_i)
//   C_n           = sum_x raw(x)
//   normalized(x) = raw(x) / C_n
//
// The sum defining C_n runs over all of N; it is truncated to {0, ..., M}
// with a certified bound on the neglected mass.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "disckern/error.hpp"
#include "disckern/kernel.hpp"
#include "disckern/numeric.hpp"
#include "disckern/pmf.hpp"

namespace disckern {

class CountSample {
 public:
  explicit CountSample(std::vector<Count> values) : values_(std::move(values)) {
    if (values_.empty()) fail(ErrorKind::InvalidArgument, "count sample must be non-empty");
    for (Count v : values_) {
      if (v < 0) fail(ErrorKind::InvalidArgument, "count sample entries must be >= 0");
    }
    std::map<Count, std::size_t> freq;
    for (Count v : values_) ++freq[v];
    histogram_.assign(freq.begin(), freq.end());
  }

  const std::vector<Count>& values() const { return values_; }
  std::size_t n() const { return values_.size(); }
  Count max() const { return histogram_.back().first; }

  /// Distinct values, ascending, with their multiplicities.
  const std::vector<std::pair<Count, std::size_t>>& histogram() const { return histogram_; }

  friend bool operator==(const CountSample& a, const CountSample& b) {
    return a.values_ == b.values_;
  }

 private:
  std::vector<Count> values_;
  std::vector<std::pair<Count, std::size_t>> histogram_;
};

struct EstimateResult {
  Pmf raw;
  double normalizer = 1.0;
  Pmf normalized;
  double bandwidth = 0.0;
  std::vector<Count> eval_support;
  double support_tail_bound = 0.0;
};

namespace detail {

/// raw(x) for a single target.
inline double raw_at(const CountSample& sample, const KernelSpec& spec, double h, Count x) {
  const TargetKernel k(spec, x, h);
  const auto& hist = sample.histogram();
  std::vector<double> terms(hist.size());
  for (std::size_t j = 0; j < hist.size(); ++j) {
    terms[j] = static_cast<double>(hist[j].second) * k(hist[j].first);
  }
  return numeric::pairwise_sum(terms) / static_cast<double>(sample.n());
}

inline std::vector<Count> range_to(Count m) {
  std::vector<Count> out(static_cast<std::size_t>(m + 1));
  for (Count x = 0; x <= m; ++x) out[static_cast<std::size_t>(x)] = x;
  return out;
}

}  // namespace detail

struct EvalSupport {
  Count max = 0;            // support is {0, ..., max}
  double tail_bound = 0.0;  // certified bound on sum_{x > max} raw(x)

  std::vector<Count> points() const { return detail::range_to(max); }
};

/// Smallest M >= max(sample) for which the mass of raw() beyond M is certified
/// below eps. Past M the column sums s(x) = raw(x) must show a ratio
/// r = s(M+1)/s(M) < 1 that is not increasing; the tail is then bounded by
/// s(M+1) / (1 - r).
inline EvalSupport eval_support(const CountSample& sample, const KernelSpec& spec, double h,
                                double eps) {
  if (!(eps > 0.0)) fail(ErrorKind::InvalidArgument, "support tolerance must be > 0");
  require_admissible(spec, h);
  Count m = sample.max();
  double prev = detail::raw_at(sample, spec, h, m);
  double prev_ratio = 1.0;
  bool have_ratio = false;
  for (;;) {
    if (m >= spec.policy.max_support) {
      fail(ErrorKind::Truncation, "estimator support could not be certified below max_support = " +
                                      std::to_string(spec.policy.max_support));
    }
    const double next = detail::raw_at(sample, spec, h, m + 1);
    if (next == 0.0) return {m, 0.0};
    if (prev > 0.0) {
      const double r = next / prev;
      if (r < 1.0 && (!have_ratio || r <= prev_ratio)) {
        const double bound = next / (1.0 - r);
        if (bound < eps) return {m, bound};
      }
      prev_ratio = r;
      have_ratio = true;
    }
    prev = next;
    ++m;
  }
}

inline Pmf raw_estimate(const CountSample& sample, const KernelSpec& spec, double h,
                        const std::vector<Count>& support) {
  if (support.empty()) fail(ErrorKind::InvalidArgument, "evaluation support must be non-empty");
  require_admissible(spec, h);
  std::vector<double> probs(support.size());
  for (std::size_t i = 0; i < support.size(); ++i) {
    probs[i] = detail::raw_at(sample, spec, h, support[i]);
  }
  return Pmf(support, std::move(probs));
}

/// C_n = sum of the raw estimate over its support.
inline double normalizing_constant(const Pmf& raw) {
  if (raw.empty()) fail(ErrorKind::InvalidArgument, "raw estimate is empty");
  const double c = raw.total();
  if (!(c > 0.0)) fail(ErrorKind::Degenerate, "normalizing constant is not positive");
  return c;
}

/// Estimate over an explicit support (used when the caller needs a wider
/// range than the certified one).
inline EstimateResult normalized_estimate_on(const CountSample& sample, const KernelSpec& spec,
                                             double h, std::vector<Count> support,
                                             double support_tail_bound) {
  EstimateResult r;
  r.bandwidth = h;
  r.raw = raw_estimate(sample, spec, h, support);
  r.raw.tail_bound = support_tail_bound;
  r.normalizer = normalizing_constant(r.raw);
  std::vector<double> probs(r.raw.size());
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = r.raw.probs[i] / r.normalizer;
  r.normalized = Pmf(support, std::move(probs), support_tail_bound / r.normalizer);
  r.eval_support = std::move(support);
  r.support_tail_bound = support_tail_bound;
  return r;
}

inline EstimateResult normalized_estimate(const CountSample& sample, const KernelSpec& spec,
                                          double h, double eps) {
  const EvalSupport s = eval_support(sample, spec, h, eps);
  return normalized_estimate_on(sample, spec, h, s.points(), s.tail_bound);
}

inline EstimateResult normalized_estimate(const CountSample& sample, const KernelSpec& spec,
                                          double h) {
  return normalized_estimate(sample, spec, h, spec.policy.tail_tol);
}

/// Relative frequencies on the observed values.
inline Pmf naive_estimate(const CountSample& sample) {
  std::vector<Count> support;
  std::vector<double> probs;
  const double n = static_cast<double>(sample.n());
  for (const auto& [v, c] : sample.histogram()) {
    support.push_back(v);
    probs.push_back(static_cast<double>(c) / n);
  }
  return Pmf(std::move(support), std::move(probs));
}

/// Sum of squared differences over the union of both supports.
inline double ise_empirical(const Pmf& fhat, const Pmf& f0) {
  std::vector<double> sq;
  std::size_t i = 0, j = 0;
  while (i < fhat.size() || j < f0.size()) {
    double d;
    if (j == f0.size() || (i < fhat.size() && fhat.support[i] < f0.support[j])) {
      d = fhat.probs[i++];
    } else if (i == fhat.size() || f0.support[j] < fhat.support[i]) {
      d = f0.probs[j++];
    } else {
      d = fhat.probs[i++] - f0.probs[j++];
    }
    sq.push_back(d * d);
  }
  return numeric::pairwise_sum(sq);
}

}  // namespace disckern
