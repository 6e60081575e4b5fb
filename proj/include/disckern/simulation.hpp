#pragma once

// Monte Carlo harness for the normalized estimator: Poisson-mixture target
// scenarios, seeded replication, the C_n / ISE summary and the pointwise
// normality experiment.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "disckern/bandwidth.hpp"
#include "disckern/error.hpp"
#include "disckern/estimator.hpp"
#include "disckern/kernel.hpp"
#include "disckern/numeric.hpp"
#include "disckern/parallel.hpp"

namespace disckern {

//------------------------------------------------------------------------------
// Scenarios

struct PoissonComponent {
  double weight;
  double rate;
};

/// Mixture of a point mass at zero (weight zero_weight, possibly 0) and
/// Poisson components.
struct Scenario {
  std::string id;
  double zero_weight = 0.0;
  std::vector<PoissonComponent> components;

  /// Poisson(8).
  static Scenario A() { return {"A", 0.0, {{1.0, 8.0}}}; }
  /// 0.7 delta_0 + 0.3 Poisson(10).
  static Scenario B() { return {"B", 0.7, {{0.3, 10.0}}}; }
  /// 0.4 Poisson(0.5) + 0.6 Poisson(8).
  static Scenario C() { return {"C", 0.0, {{0.4, 0.5}, {0.6, 8.0}}}; }
  /// 0.6 Poisson(10) + 0.2 Poisson(22) + 0.2 Poisson(50).
  static Scenario D() { return {"D", 0.0, {{0.6, 10.0}, {0.2, 22.0}, {0.2, 50.0}}}; }

  static Scenario from_id(std::string_view id) {
    if (id == "A") return A();
    if (id == "B") return B();
    if (id == "C") return C();
    if (id == "D") return D();
    fail(ErrorKind::InvalidArgument, "unknown scenario '" + std::string(id) + "'");
  }

  void validate() const {
    double total = zero_weight;
    if (zero_weight < 0.0 || zero_weight > 1.0) {
      fail(ErrorKind::InvalidArgument, "zero-inflation weight must lie in [0, 1]");
    }
    for (const auto& c : components) {
      if (!(c.weight >= 0.0 && c.weight <= 1.0) || !(c.rate > 0.0)) {
        fail(ErrorKind::InvalidArgument, "scenario components need weight in [0,1], rate > 0");
      }
      total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      fail(ErrorKind::InvalidArgument, "scenario weights must sum to 1");
    }
  }
};

inline double poisson_pmf(double rate, Count x) {
  if (x < 0) return 0.0;
  return std::exp(static_cast<double>(x) * std::log(rate) - rate - numeric::log_factorial(x));
}

inline double scenario_pmf(const Scenario& s, Count x) {
  if (x < 0) return 0.0;
  double p = x == 0 ? s.zero_weight : 0.0;
  for (const auto& c : s.components) p += c.weight * poisson_pmf(c.rate, x);
  return p;
}

/// Smallest q with P(X <= q) >= level.
inline Count scenario_quantile(const Scenario& s, double level) {
  double cdf = 0.0;
  Count x = 0;
  for (; x < 1'000'000; ++x) {
    cdf += scenario_pmf(s, x);
    if (cdf >= level) return x;
  }
  return x;
}

//------------------------------------------------------------------------------
// Seeding and sampling

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of replication t, independent of the order replications run in.
inline std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t t) {
  return mix64(master_seed + mix64(t + 0x9E3779B97F4A7C15ULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Poisson draw by sequential inversion of the cdf.
  Count poisson(double rate) {
    const double u = uniform();
    double p = std::exp(-rate);
    double cdf = p;
    Count k = 0;
    const Count cap = static_cast<Count>(rate + 40.0 * std::sqrt(rate) + 100.0);
    while (u >= cdf && k < cap) {
      ++k;
      p *= rate / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }

 private:
  std::mt19937_64 engine_;
};

/// Draws n counts: component by categorical weight, then Poisson by inversion.
inline CountSample scenario_sample(const Scenario& s, std::size_t n, std::uint64_t seed) {
  if (n == 0) fail(ErrorKind::InvalidArgument, "sample size must be >= 1");
  Rng rng(seed);
  std::vector<Count> values(n);
  for (auto& v : values) {
    const double u = rng.uniform();
    double acc = s.zero_weight;
    if (u < acc) {
      v = 0;
      continue;
    }
    const PoissonComponent* chosen = &s.components.back();
    for (const auto& c : s.components) {
      acc += c.weight;
      if (u < acc) {
        chosen = &c;
        break;
      }
    }
    v = rng.poisson(chosen->rate);
  }
  return CountSample(std::move(values));
}

//------------------------------------------------------------------------------
// Monte Carlo

struct BandwidthRule {
  enum class Kind { CrossValidation, Fixed, Sequence };
  Kind kind = Kind::Fixed;
  double h = 0.1;                    // Fixed
  std::vector<double> grid;          // CrossValidation; empty means default_grid
  CvVariant variant = CvVariant::Literal;

  static BandwidthRule fixed(double h) { return {Kind::Fixed, h, {}, CvVariant::Literal}; }
  static BandwidthRule cross_validation(std::vector<double> grid = {}) {
    return {Kind::CrossValidation, 0.0, std::move(grid), CvVariant::Literal};
  }
  /// h_n = 1 / (sqrt(n) log n).
  static BandwidthRule sqrt_n_log_n() { return {Kind::Sequence, 0.0, {}, CvVariant::Literal}; }
};

inline std::string_view to_string(BandwidthRule::Kind k) {
  switch (k) {
    case BandwidthRule::Kind::CrossValidation: return "cv";
    case BandwidthRule::Kind::Fixed: return "fixed";
    case BandwidthRule::Kind::Sequence: return "sqrtnlogn";
  }
  return "unknown";
}

inline double sequence_bandwidth(std::size_t n) {
  if (n < 2) fail(ErrorKind::InvalidArgument, "h_n = 1/(sqrt(n) log n) needs n >= 2");
  const double dn = static_cast<double>(n);
  return 1.0 / (std::sqrt(dn) * std::log(dn));
}

struct McConfig {
  Scenario scenario = Scenario::A();
  KernelSpec kernel{};
  std::size_t n = 100;
  std::size_t n_sim = 100;
  BandwidthRule bandwidth_rule{};
  std::uint64_t master_seed = 20230101;
  unsigned threads = 0;  // 0 = hardware concurrency; never affects results
};

struct Replication {
  std::uint64_t seed = 0;
  double c_n = 0.0;
  double ise = 0.0;
  double h = 0.0;
};

struct McReport {
  std::string scenario;
  KernelFamily kernel = KernelFamily::CoMPoisson;
  std::size_t n = 0;
  std::size_t n_sim = 0;
  std::uint64_t master_seed = 0;
  double c_hat_mean = 0.0;
  double c_hat_sd = 0.0;
  double ise_mean = 0.0;
  double ise_sd = 0.0;
  std::vector<Replication> per_replication;
};

struct MeanSd {
  double mean;
  double sd;  // divisor N - 1; 0 for a single value
};

inline MeanSd mean_sd(std::span<const double> v) {
  if (v.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(v.size());
  const double mean = numeric::pairwise_sum(v) / n;
  if (v.size() < 2) return {mean, 0.0};
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
  return {mean, std::sqrt(numeric::pairwise_sum(sq) / (n - 1.0))};
}

namespace detail {

inline double pick_bandwidth(const McConfig& cfg, const CountSample& sample) {
  switch (cfg.bandwidth_rule.kind) {
    case BandwidthRule::Kind::Fixed: return cfg.bandwidth_rule.h;
    case BandwidthRule::Kind::Sequence: return sequence_bandwidth(cfg.n);
    case BandwidthRule::Kind::CrossValidation: {
      const auto grid = cfg.bandwidth_rule.grid.empty() ? default_grid(cfg.kernel.family)
                                                        : cfg.bandwidth_rule.grid;
      return select_bandwidth(sample, cfg.kernel, grid, {cfg.bandwidth_rule.variant, 1}).h_cv;
    }
  }
  return cfg.bandwidth_rule.h;
}

inline void validate(const McConfig& cfg) {
  cfg.scenario.validate();
  if (cfg.n == 0) fail(ErrorKind::InvalidArgument, "n must be >= 1");
  if (cfg.n_sim == 0) fail(ErrorKind::InvalidArgument, "n_sim must be >= 1");
}

template <typename F>
auto guarded(std::size_t t, std::uint64_t seed, F&& f) {
  try {
    return f();
  } catch (const ReplicationError&) {
    throw;
  } catch (const Error& e) {
    throw ReplicationError(e.kind(),
                           "replication " + std::to_string(t) + " (seed " +
                               std::to_string(seed) + "): " + e.what(),
                           t, seed);
  }
}

}  // namespace detail

/// Replicates: sample, bandwidth, estimate, then C_n = sum raw and
/// ISE = sum (normalized - f)^2. The sums run over the certified support,
/// widened to reach the 1 - 1e-10 quantile of the scenario.
inline McReport monte_carlo(const McConfig& cfg) {
  detail::validate(cfg);
  const Count q = scenario_quantile(cfg.scenario, 1.0 - 1e-10);
  McReport rep;
  rep.scenario = cfg.scenario.id;
  rep.kernel = cfg.kernel.family;
  rep.n = cfg.n;
  rep.n_sim = cfg.n_sim;
  rep.master_seed = cfg.master_seed;
  rep.per_replication.resize(cfg.n_sim);
  parallel_for(cfg.n_sim, cfg.threads, [&](std::size_t t) {
    const std::uint64_t seed = replication_seed(cfg.master_seed, t);
    rep.per_replication[t] = detail::guarded(t, seed, [&] {
      const CountSample sample = scenario_sample(cfg.scenario, cfg.n, seed);
      const double h = detail::pick_bandwidth(cfg, sample);
      const EvalSupport s = eval_support(sample, cfg.kernel, h, cfg.kernel.policy.tail_tol);
      const EstimateResult est = normalized_estimate_on(
          sample, cfg.kernel, h, detail::range_to(std::max(s.max, q)), s.tail_bound);
      std::vector<double> sq(est.eval_support.size());
      for (std::size_t i = 0; i < sq.size(); ++i) {
        const double d = est.normalized.probs[i] - scenario_pmf(cfg.scenario, est.eval_support[i]);
        sq[i] = d * d;
      }
      return Replication{seed, est.normalizer, numeric::pairwise_sum(sq), h};
    });
  });
  std::vector<double> cs, ises;
  for (const auto& r : rep.per_replication) {
    cs.push_back(r.c_n);
    ises.push_back(r.ise);
  }
  const MeanSd c = mean_sd(cs), e = mean_sd(ises);
  rep.c_hat_mean = c.mean;
  rep.c_hat_sd = c.sd;
  rep.ise_mean = e.mean;
  rep.ise_sd = e.sd;
  return rep;
}

//------------------------------------------------------------------------------
// Normality experiment

inline double normal_cdf(double x, double sd) {
  return 0.5 * std::erfc(-x / (sd * std::sqrt(2.0)));
}

/// One-sample Kolmogorov-Smirnov distance to N(0, sd^2).
inline double ks_statistic_normal(std::span<const double> values, double sd) {
  if (values.empty()) return 0.0;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = normal_cdf(sorted[i], sd);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

struct NormalityReport {
  std::string scenario;
  KernelFamily kernel = KernelFamily::CoMPoisson;
  std::size_t n = 0;
  std::size_t n_sim = 0;
  std::uint64_t master_seed = 0;
  double h = 0.0;  // bandwidth of the first replication (all equal unless CV)
  Count target_x = 0;
  double f_target = 0.0;
  std::vector<double> deviations;  // sqrt(n) (fhat(x) - f(x))
  double sample_mean = 0.0;
  double sample_sd = 0.0;
  double theoretical_sd = 0.0;  // sqrt(f(x) (1 - f(x)))
  double ks_statistic = 0.0;
};

inline NormalityReport normality_experiment(const McConfig& cfg, Count target_x) {
  detail::validate(cfg);
  const double f = scenario_pmf(cfg.scenario, target_x);
  if (!(f > 0.0)) {
    fail(ErrorKind::InvalidArgument, "normality experiment needs f(x) > 0 at the target");
  }
  NormalityReport rep;
  rep.scenario = cfg.scenario.id;
  rep.kernel = cfg.kernel.family;
  rep.n = cfg.n;
  rep.n_sim = cfg.n_sim;
  rep.master_seed = cfg.master_seed;
  rep.target_x = target_x;
  rep.f_target = f;
  rep.theoretical_sd = std::sqrt(f * (1.0 - f));
  rep.deviations.resize(cfg.n_sim);
  std::vector<double> hs(cfg.n_sim);
  const double root_n = std::sqrt(static_cast<double>(cfg.n));
  parallel_for(cfg.n_sim, cfg.threads, [&](std::size_t t) {
    const std::uint64_t seed = replication_seed(cfg.master_seed, t);
    detail::guarded(t, seed, [&] {
      const CountSample sample = scenario_sample(cfg.scenario, cfg.n, seed);
      const double h = detail::pick_bandwidth(cfg, sample);
      const EstimateResult est = normalized_estimate(sample, cfg.kernel, h);
      hs[t] = h;
      rep.deviations[t] = root_n * (est.normalized.at(target_x) - f);
      return 0;
    });
  });
  rep.h = hs.front();
  const MeanSd ms = mean_sd(rep.deviations);
  rep.sample_mean = ms.mean;
  rep.sample_sd = ms.sd;
  rep.ks_statistic = ks_statistic_normal(rep.deviations, rep.theoretical_sd);
  return rep;
}

}  // namespace disckern
