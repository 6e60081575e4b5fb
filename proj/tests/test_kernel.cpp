#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "disckern/kernel.hpp"
#include "oracles.hpp"

namespace disckern {
namespace {

TEST(DiracKernel, Indicator) {
  EXPECT_EQ(dirac_kernel_pmf(3, 3), 1.0);
  EXPECT_EQ(dirac_kernel_pmf(3, 2), 0.0);
  EXPECT_EQ(dirac_kernel_pmf(0, 7), 0.0);
}

TEST(DiracKernel, PointMassMoments) {
  const auto mv = kernel_mean_variance(KernelSpec::dirac(), 5, 0.37);
  EXPECT_EQ(mv.mean, 5.0);
  EXPECT_EQ(mv.variance, 0.0);
  const KernelEval e = kernel_eval(KernelSpec::dirac(), 5, 2.0);
  EXPECT_EQ(e.tail_bound, 0.0);
  EXPECT_EQ(e.support, std::vector<Count>{5});
}

TEST(BinomialKernel, HandValues) {
  EXPECT_DOUBLE_EQ(binomial_kernel_pmf(0, 0.1, 0), 0.9);
  EXPECT_DOUBLE_EQ(binomial_kernel_pmf(1, 0.5, 2), 0.5625);
  EXPECT_DOUBLE_EQ(binomial_kernel_pmf(1, 0.5, 0), 0.0625);
}

TEST(BinomialKernel, OffSupportIsZero) {
  EXPECT_EQ(binomial_kernel_pmf(3, 0.2, 5), 0.0);
  EXPECT_EQ(binomial_kernel_pmf(3, 0.2, -1), 0.0);
  EXPECT_EQ(kernel_pmf(KernelSpec::binomial(), 2, 0.4, 17), 0.0);
}

TEST(BinomialKernel, RejectsBandwidthOutsideUnitInterval) {
  EXPECT_THROW(binomial_kernel_pmf(2, 0.0, 1), Error);
  EXPECT_THROW(binomial_kernel_pmf(2, 1.0, 1), Error);
  EXPECT_THROW(binomial_kernel_pmf(2, 1.5, 1), Error);
  EXPECT_THROW(kernel_eval(KernelSpec::binomial(), 2, -0.1), Error);
  EXPECT_FALSE(admissible(KernelSpec::binomial(), 1.0));
  EXPECT_TRUE(admissible(KernelSpec::cmp(), 1.5));
}

TEST(BinomialKernel, MomentsAgainstOracleAndClosedForm) {
  // x = 4, h = 0.3: support {0..5}
  long double mean = 0, second = 0;
  for (int z = 0; z <= 5; ++z) {
    const long double p = oracle::binomial_kernel(4, 0.3L, z);
    mean += z * p;
    second += z * z * p;
  }
  const auto mv = kernel_mean_variance(KernelSpec::binomial(), 4, 0.3);
  EXPECT_NEAR(mv.mean, 4.3, 1e-12);
  EXPECT_NEAR(mv.variance, 0.602, 1e-12);
  EXPECT_NEAR(mv.mean, static_cast<double>(mean), 1e-12);
  EXPECT_NEAR(mv.variance, static_cast<double>(second - mean * mean), 1e-12);
}

TEST(BinomialKernel, ClosedFormMomentsOverGrid) {
  for (Count x = 0; x <= 50; ++x) {
    for (double h : {0.01, 0.1, 0.5, 0.9}) {
      const auto mv = kernel_mean_variance(KernelSpec::binomial(), x, h);
      const double xd = static_cast<double>(x);
      EXPECT_NEAR(mv.mean, xd + h, 1e-12) << x << " " << h;
      EXPECT_NEAR(mv.variance, (xd + h) * (1.0 - h) / (xd + 1.0), 1e-12) << x << " " << h;
    }
  }
}

TEST(CmpKernelFamily, PoissonMomentsAtUnitBandwidth) {
  const auto mv = kernel_mean_variance(KernelSpec::cmp(), 2, 1.0);
  EXPECT_NEAR(mv.mean, 2.0, 1e-10);
  EXPECT_NEAR(mv.variance, 2.0, 1e-9);
}

// Every kernel is a pmf containing its target, with the truncated mass bounded.
// The slack covers rounding of CMP log terms, which reach ~1e4 at h = 0.01.
TEST(KernelProperties, NormalizedAndContainsTarget) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> xs(0, 60);
  std::uniform_real_distribution<double> hs(0.01, 0.99);
  for (auto spec : {KernelSpec::dirac(), KernelSpec::binomial(), KernelSpec::cmp()}) {
    for (int trial = 0; trial < 100; ++trial) {
      const Count x = xs(rng);
      const double h = hs(rng);
      const KernelEval e = kernel_eval(spec, x, h);
      EXPECT_LE(e.tail_bound, spec.policy.tail_tol);
      EXPECT_NE(std::find(e.support.begin(), e.support.end(), x), e.support.end());
      for (double p : e.probabilities) {
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
      }
      EXPECT_NEAR(e.total(), 1.0, e.tail_bound + 1e-11);
    }
  }
}

TEST(AssumptionProbe, DiracIsIdenticallyZero) {
  std::vector<Count> targets;
  for (Count x = 0; x <= 20; ++x) targets.push_back(x);
  const std::vector<double> hs{0.5, 0.1, 0.01};
  const ProbeReport r = assumption_probe(KernelSpec::dirac(), targets, hs);
  EXPECT_EQ(r.sup_mean_dev, (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(r.sup_var, (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(r.delta_estimate, 0.0);
  EXPECT_FALSE(r.var_rate.has_value());
}

TEST(AssumptionProbe, BinomialIsFirstOrder) {
  for (Count m : {5, 20, 50}) {
    std::vector<Count> targets;
    for (Count x = 0; x <= m; ++x) targets.push_back(x);
    const std::vector<double> hs{0.5, 0.1, 0.01};
    const ProbeReport r = assumption_probe(KernelSpec::binomial(), targets, hs);
    const double md = static_cast<double>(m);
    EXPECT_NEAR(r.delta_estimate, md / (md + 1.0), 1e-6) << m;
    // mean deviation is exactly h
    for (std::size_t i = 0; i < hs.size(); ++i) EXPECT_NEAR(r.sup_mean_dev[i], hs[i], 1e-12);
    ASSERT_TRUE(r.mean_rate.has_value());
    EXPECT_NEAR(*r.mean_rate, 1.0, 1e-9);
  }
}

TEST(AssumptionProbe, CmpIsSecondOrder) {
  std::vector<Count> targets;
  for (Count x = 0; x <= 10; ++x) targets.push_back(x);
  const std::vector<double> hs{0.2, 0.1, 0.05};
  const KernelSpec spec = KernelSpec::cmp();
  const ProbeReport r = assumption_probe(spec, targets, hs);
  for (double d : r.sup_mean_dev) EXPECT_LE(d, spec.policy.solve_tol);
  EXPECT_GT(r.sup_var[0], r.sup_var[1]);
  EXPECT_GT(r.sup_var[1], r.sup_var[2]);
  ASSERT_TRUE(r.var_rate.has_value());
  EXPECT_NEAR(*r.var_rate, 1.0, 0.15);
  EXPECT_LT(r.delta_estimate, 0.1);
}

TEST(AssumptionProbe, RejectsNonDecreasingBandwidths) {
  const std::vector<Count> targets{0, 1};
  const std::vector<double> hs{0.1, 0.2};
  EXPECT_THROW(assumption_probe(KernelSpec::dirac(), targets, hs), Error);
}

}  // namespace
}  // namespace disckern
