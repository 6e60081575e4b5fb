#pragma once

// Least-squares cross-validation bandwidth selection:
//
//   CV(h) = sum_x fhat(x)^2 - (2/n) sum_i fhat_{-i}(X_i),
//   fhat_{-i}(X_i) = 1/(n-1) sum_{l != i} K_{X_i,h}(X_l).
//
// The quadratic term uses the normalized estimate; the leave-one-out term is
// the raw kernel average. CvVariant::BothNormalized divides the leave-one-out
// value by its own leave-one-out normalizer instead.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "disckern/error.hpp"
#include "disckern/estimator.hpp"
#include "disckern/kernel.hpp"
#include "disckern/numeric.hpp"
#include "disckern/parallel.hpp"

namespace disckern {

enum class CvVariant { Literal, BothNormalized };

struct CvPoint {
  double h = 0.0;
  bool admissible = false;
  std::optional<double> score;  // empty when refused
};

struct CvResult {
  double h_cv = 0.0;
  double score_at_h = 0.0;
  std::vector<CvPoint> grid;  // in the order given
};

struct CvOptions {
  CvVariant variant = CvVariant::Literal;
  unsigned threads = 1;
};

inline void require_cv_sample(const CountSample& sample) {
  if (sample.n() < 2) {
    fail(ErrorKind::InsufficientSample, "cross-validation requires a sample of size n >= 2");
  }
}

/// Leave-one-out raw value at X_i (i is zero-based).
inline double loo_estimate(const CountSample& sample, const KernelSpec& spec, double h,
                           std::size_t i) {
  require_cv_sample(sample);
  if (i >= sample.n()) fail(ErrorKind::InvalidArgument, "leave-one-out index out of range");
  require_admissible(spec, h);
  const auto& xs = sample.values();
  const TargetKernel k(spec, xs[i], h);
  std::vector<double> terms;
  terms.reserve(xs.size() - 1);
  for (std::size_t l = 0; l < xs.size(); ++l) {
    if (l != i) terms.push_back(k(xs[l]));
  }
  return numeric::pairwise_sum(terms) / static_cast<double>(sample.n() - 1);
}

inline double cv_score(const CountSample& sample, const KernelSpec& spec, double h,
                       CvVariant variant = CvVariant::Literal) {
  require_cv_sample(sample);
  require_admissible(spec, h);
  const EstimateResult est = normalized_estimate(sample, spec, h);
  const auto& support = est.eval_support;
  const auto& hist = sample.histogram();
  const double n = static_cast<double>(sample.n());

  std::vector<double> sq(support.size());
  for (std::size_t x = 0; x < support.size(); ++x) {
    sq[x] = est.normalized.probs[x] * est.normalized.probs[x];
  }
  const double quadratic = numeric::pairwise_sum(sq);

  // Leave-one-out value for every distinct observed value, weighted by its
  // multiplicity.
  std::vector<double> loo_terms(hist.size());
  std::vector<double> row(hist.size());
  for (std::size_t j = 0; j < hist.size(); ++j) {
    const auto [v, c] = hist[j];
    const TargetKernel k(spec, v, h);
    for (std::size_t m = 0; m < hist.size(); ++m) {
      const double cnt = static_cast<double>(hist[m].second) - (m == j ? 1.0 : 0.0);
      row[m] = cnt * k(hist[m].first);
    }
    double loo = numeric::pairwise_sum(row) / (n - 1.0);
    if (variant == CvVariant::BothNormalized) {
      // C_{-i} = (n C_n - sum_x K_{x,h}(v)) / (n - 1)
      std::vector<double> col(support.size());
      for (std::size_t x = 0; x < support.size(); ++x) {
        col[x] = TargetKernel(spec, support[x], h)(v);
      }
      const double c_loo = (n * est.normalizer - numeric::pairwise_sum(col)) / (n - 1.0);
      if (!(c_loo > 0.0)) fail(ErrorKind::Degenerate, "leave-one-out normalizer is not positive");
      loo /= c_loo;
    }
    loo_terms[j] = static_cast<double>(c) * loo;
  }
  return quadratic - 2.0 / n * numeric::pairwise_sum(loo_terms);
}

/// `size` log-spaced points from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, std::size_t size) {
  if (!(lo > 0.0) || !(hi >= lo) || size == 0) {
    fail(ErrorKind::InvalidArgument, "grid needs 0 < min <= max and size >= 1");
  }
  std::vector<double> g(size);
  if (size == 1) {
    g[0] = lo;
    return g;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < size; ++i) {
    g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(size - 1));
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

/// Default search grid: `size` log-spaced points in [1e-3, 0.999] for the
/// binomial kernel and [1e-3, 3] otherwise.
inline std::vector<double> default_grid(KernelFamily family, std::size_t size = 40) {
  const double lo = 1e-3;
  const double hi = family == KernelFamily::Binomial ? 0.999 : 3.0;
  return log_grid(lo, hi, size);
}

/// Grid-search argmin of cv_score. Inadmissible grid points are reported as
/// refused; ties go to the smaller bandwidth.
inline CvResult select_bandwidth(const CountSample& sample, const KernelSpec& spec,
                                 std::span<const double> grid, CvOptions options = {}) {
  require_cv_sample(sample);
  if (grid.empty()) fail(ErrorKind::InvalidArgument, "bandwidth grid is empty");
  CvResult r;
  r.grid.resize(grid.size());
  parallel_for(grid.size(), options.threads, [&](std::size_t i) {
    CvPoint& p = r.grid[i];
    p.h = grid[i];
    p.admissible = admissible(spec, grid[i]);
    if (p.admissible) p.score = cv_score(sample, spec, grid[i], options.variant);
  });
  const CvPoint* best = nullptr;
  for (const CvPoint& p : r.grid) {
    if (!p.score) continue;
    if (best == nullptr || *p.score < *best->score ||
        (*p.score == *best->score && p.h < best->h)) {
      best = &p;
    }
  }
  if (best == nullptr) fail(ErrorKind::InvalidArgument, "no admissible bandwidth in the grid");
  r.h_cv = best->h;
  r.score_at_h = *best->score;
  return r;
}

}  // namespace disckern
