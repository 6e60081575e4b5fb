#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "disckern/simulation.hpp"
#include "oracles.hpp"

namespace disckern {
namespace {

TEST(Scenario, PmfHandValues) {
  EXPECT_NEAR(scenario_pmf(Scenario::A(), 6), 0.1221382155, 1e-10);
  EXPECT_NEAR(scenario_pmf(Scenario::A(), 6), static_cast<double>(oracle::poisson_pmf(8.0L, 6)),
              1e-15);
  EXPECT_NEAR(scenario_pmf(Scenario::B(), 0), 0.7 + 0.3 * std::exp(-10.0), 1e-15);
  EXPECT_NEAR(scenario_pmf(Scenario::B(), 0), 0.7000136200, 1e-10);
  EXPECT_NEAR(scenario_pmf(Scenario::C(), 0), 0.4 * std::exp(-0.5) + 0.6 * std::exp(-8.0), 1e-15);
}

TEST(Scenario, PmfSumsToOne) {
  for (const auto& s : {Scenario::A(), Scenario::B(), Scenario::C(), Scenario::D()}) {
    double total = 0.0;
    for (Count x = 0; x <= 200; ++x) total += scenario_pmf(s, x);
    EXPECT_NEAR(total, 1.0, 1e-12) << s.id;
  }
}

TEST(Scenario, LookupAndValidation) {
  EXPECT_EQ(Scenario::from_id("D").id, "D");
  EXPECT_THROW(Scenario::from_id("E"), Error);
  Scenario bad = Scenario::A();
  bad.components[0].weight = 0.5;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Scenario, Quantile) {
  const Count q = scenario_quantile(Scenario::A(), 1.0 - 1e-10);
  double below = 0.0;
  for (Count x = 0; x <= q; ++x) below += scenario_pmf(Scenario::A(), x);
  EXPECT_GE(below, 1.0 - 1e-10);
  EXPECT_LT(below - scenario_pmf(Scenario::A(), q), 1.0 - 1e-10);
}

TEST(Sampler, Deterministic) {
  EXPECT_EQ(scenario_sample(Scenario::D(), 50, 99), scenario_sample(Scenario::D(), 50, 99));
  EXPECT_NE(scenario_sample(Scenario::D(), 50, 99), scenario_sample(Scenario::D(), 50, 100));
}

TEST(Sampler, ScenarioAMean) {
  const CountSample s = scenario_sample(Scenario::A(), 100000, 12345);
  double sum = 0.0;
  for (Count v : s.values()) sum += static_cast<double>(v);
  EXPECT_NEAR(sum / 1e5, 8.0, 0.05);
}

TEST(Sampler, ScenarioBZeroFraction) {
  const CountSample s = scenario_sample(Scenario::B(), 100000, 777);
  std::size_t zeros = 0;
  for (Count v : s.values()) zeros += v == 0;
  EXPECT_NEAR(static_cast<double>(zeros) / 1e5, 0.700, 0.006);
}

TEST(Sampler, ReplicationSeedsDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t t = 0; t < 1000; ++t) seen.insert(replication_seed(1, t));
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(SequenceBandwidth, Values) {
  EXPECT_NEAR(sequence_bandwidth(500), 1.0 / (std::sqrt(500.0) * std::log(500.0)), 1e-16);
  EXPECT_THROW(sequence_bandwidth(1), Error);
}

TEST(MeanSd, SampleDivisor) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const MeanSd m = mean_sd(v);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_DOUBLE_EQ(m.sd, std::sqrt(5.0 / 3.0));
}

TEST(MonteCarlo, DiracNormalizerIsOneAndIseMatchesNaive) {
  McConfig cfg;
  cfg.scenario = Scenario::B();
  cfg.kernel = KernelSpec::dirac();
  cfg.n = 40;
  cfg.n_sim = 5;
  cfg.bandwidth_rule = BandwidthRule::fixed(0.1);
  cfg.master_seed = 3;
  const McReport r = monte_carlo(cfg);
  EXPECT_EQ(r.c_hat_mean, 1.0);
  EXPECT_EQ(r.c_hat_sd, 0.0);
  for (std::size_t t = 0; t < cfg.n_sim; ++t) {
    const auto& rep = r.per_replication[t];
    const Pmf f0 = naive_estimate(scenario_sample(cfg.scenario, cfg.n, rep.seed));
    double ise = 0.0;
    for (Count x = 0; x <= 200; ++x) {
      const double d = f0.at(x) - scenario_pmf(cfg.scenario, x);
      ise += d * d;
    }
    EXPECT_NEAR(rep.ise, ise, 1e-12);
  }
}

TEST(MonteCarlo, ThreadCountDoesNotChangeResults) {
  McConfig cfg;
  cfg.kernel = KernelSpec::cmp();
  cfg.n = 30;
  cfg.n_sim = 12;
  cfg.bandwidth_rule = BandwidthRule::cross_validation(log_grid(0.01, 1.0, 6));
  cfg.threads = 1;
  const McReport a = monte_carlo(cfg);
  cfg.threads = 5;
  const McReport b = monte_carlo(cfg);
  EXPECT_EQ(a.c_hat_mean, b.c_hat_mean);
  EXPECT_EQ(a.ise_mean, b.ise_mean);
  for (std::size_t t = 0; t < cfg.n_sim; ++t) {
    EXPECT_EQ(a.per_replication[t].c_n, b.per_replication[t].c_n);
    EXPECT_EQ(a.per_replication[t].h, b.per_replication[t].h);
  }
}

TEST(MonteCarlo, FailingReplicationCarriesSeed) {
  McConfig cfg;
  cfg.kernel = KernelSpec::cmp();
  cfg.n = 1;
  cfg.n_sim = 3;
  cfg.bandwidth_rule = BandwidthRule::cross_validation();
  try {
    monte_carlo(cfg);
    FAIL();
  } catch (const ReplicationError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientSample);
    EXPECT_EQ(e.replication(), 0u);
    EXPECT_EQ(e.seed(), replication_seed(cfg.master_seed, 0));
  }
}

TEST(MonteCarlo, RejectsEmptyConfig) {
  McConfig cfg;
  cfg.n_sim = 0;
  EXPECT_THROW(monte_carlo(cfg), Error);
}

TEST(Normality, TheoreticalSd) {
  McConfig cfg;
  cfg.n = 50;
  cfg.n_sim = 20;
  cfg.bandwidth_rule = BandwidthRule::sqrt_n_log_n();
  const NormalityReport r = normality_experiment(cfg, 6);
  EXPECT_NEAR(r.theoretical_sd, 0.32744537, 1e-7);
  EXPECT_EQ(r.deviations.size(), 20u);
  EXPECT_EQ(r.h, sequence_bandwidth(50));
}

TEST(Normality, DiracIsFrequencyDeviation) {
  McConfig cfg;
  cfg.kernel = KernelSpec::dirac();
  cfg.n = 60;
  cfg.n_sim = 8;
  cfg.bandwidth_rule = BandwidthRule::sqrt_n_log_n();
  const NormalityReport r = normality_experiment(cfg, 6);
  for (std::size_t t = 0; t < cfg.n_sim; ++t) {
    const CountSample s = scenario_sample(cfg.scenario, cfg.n, replication_seed(cfg.master_seed, t));
    const double freq = naive_estimate(s).at(6);
    EXPECT_NEAR(r.deviations[t], std::sqrt(60.0) * (freq - r.f_target), 1e-12);
  }
}

TEST(Normality, RefusesZeroMassTarget) {
  McConfig cfg;
  cfg.scenario = Scenario::A();
  EXPECT_THROW(normality_experiment(cfg, -1), Error);
}

TEST(Ks, HandValues) {
  const std::vector<double> one{0.0};
  EXPECT_DOUBLE_EQ(ks_statistic_normal(one, 1.0), 0.5);
  EXPECT_NEAR(normal_cdf(1.0, 1.0), 0.8413447460685429, 1e-15);
}

}  // namespace
}  // namespace disckern
