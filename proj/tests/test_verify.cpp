#include <cmath>

#include <gtest/gtest.h>

#include "rvw/verify.hpp"

using namespace rvw;

namespace {

McConfig mc(std::uint64_t trials, std::uint64_t seed = 42, unsigned workers = 1) {
  McConfig c;
  c.trials = trials;
  c.seed = seed;
  c.workers = workers;
  return c;
}

}  // namespace

TEST(SplitMix, ReferenceOutputs) {
  // First outputs for state 0 from the public reference implementation.
  std::uint64_t s = 0;
  EXPECT_EQ(splitmix64(s), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(splitmix64(s), 0x6E789E6AA1B965F4ULL);
}

TEST(SplitMix, WorkerSeedsDistinct) {
  const auto seeds = worker_seeds(42, 8);
  std::set<std::uint64_t> uniq(seeds.begin(), seeds.end());
  EXPECT_EQ(uniq.size(), 8u);
}

TEST(Binomial, CdfMatchesDirectSum) {
  const auto cdf = detail::binomial_cdf(20, 0.3);
  double acc = 0.0;
  for (int k = 0; k <= 20; ++k) {
    acc += std::exp(std::lgamma(21.0) - std::lgamma(k + 1.0) - std::lgamma(21.0 - k) +
                    k * std::log(0.3) + (20 - k) * std::log(0.7));
    EXPECT_NEAR(cdf[k], acc, 1e-12) << k;
  }
}

TEST(Binomial, DrawInvertsCdf) {
  const auto cdf = detail::binomial_cdf(10, 0.5);
  EXPECT_EQ(detail::binomial_draw(cdf, 0.0), 0u);
  EXPECT_EQ(detail::binomial_draw(cdf, cdf[4]), 5u);
  EXPECT_EQ(detail::binomial_draw(cdf, 0.9999999), 10u);
}

TEST(Binomial, TailThreshold) {
  EXPECT_EQ(detail::tail_threshold(0.5, 0.1, 100), 40);
  EXPECT_EQ(detail::tail_threshold(0.3, 0.1, 500), 100);
}

TEST(McChernoff, ModerateTailPasses) {
  const auto r = mc_chernoff(0.5, 0.1, 100, mc(100000));
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(r.analytic, std::exp(-2.0), 1e-15);
  // P(Bin(100, 0.5) <= 40) is about 0.0284.
  EXPECT_NEAR(r.empirical, 0.0284, 0.003);
  EXPECT_EQ(r.trials, 100000u);
}

TEST(McChernoff, ZeroEpsIsTrivial) {
  const auto r = mc_chernoff(0.3, 0.0, 50, mc(2000));
  EXPECT_EQ(r.analytic, 1.0);
  EXPECT_TRUE(r.passed);
}

TEST(McChernoff, ExtremeTailPasses) {
  const auto r = mc_chernoff(0.3, 0.1, 500, mc(20000));
  EXPECT_TRUE(r.passed);
  EXPECT_LE(r.hits, 2u);
}

TEST(McChernoff, ReproducibleForFixedSeed) {
  const auto a = mc_chernoff(0.4, 0.05, 200, mc(20000, 7, 3));
  const auto b = mc_chernoff(0.4, 0.05, 200, mc(20000, 7, 3));
  EXPECT_EQ(a.hits, b.hits);
  const auto c = mc_chernoff(0.4, 0.05, 200, mc(20000, 8, 3));
  EXPECT_NE(a.hits, c.hits);
}

TEST(McChernoff, WorkerCountsAgreeStatistically) {
  const auto one = mc_chernoff(0.5, 0.05, 100, mc(50000, 1, 1));
  const auto four = mc_chernoff(0.5, 0.05, 100, mc(50000, 1, 4));
  const double se = std::sqrt(one.std_err * one.std_err + four.std_err * four.std_err);
  EXPECT_LE(std::abs(one.empirical - four.empirical), 4.0 * se);
}

TEST(McChernoff, SweepAllPass) {
  int checked = 0;
  for (int i = 1; i <= 10; ++i) {
    const double p = 0.05 * i;
    for (int j = 0; j < 5; ++j) {
      const double eps = p * j / 5.0;
      const auto r = mc_chernoff(p, eps, 60 + 20 * j, mc(4000, 100 + i * 10 + j));
      EXPECT_TRUE(r.passed) << p << " " << eps;
      ++checked;
    }
  }
  EXPECT_EQ(checked, 50);
}

TEST(McChernoff, RejectsBadConfig) {
  EXPECT_THROW(mc_chernoff(0.5, 0.1, 100, mc(0)), Error);
  EXPECT_THROW(mc_chernoff(0.5, 0.1, 100, mc(10, 1, 0)), Error);
  EXPECT_THROW(mc_chernoff(0.5, 0.6, 100, mc(10)), Error);
}

TEST(McCoverage, SixteenClassifiersStayBelowDelta) {
  std::vector<double> errs;
  for (int i = 0; i < 16; ++i) errs.push_back(0.05 + 0.025 * i);
  const auto r = mc_theorem_coverage(4, 500, 5000, 0.05, errs, mc(20000));
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.analytic, 0.05);
  EXPECT_LT(r.empirical, 0.05);
}

TEST(McCoverage, NoClassifiersNeverFail) {
  const auto r = mc_theorem_coverage(4, 500, 5000, 0.05, {}, mc(1000));
  EXPECT_EQ(r.hits, 0u);
  EXPECT_TRUE(r.passed);
}

TEST(McCoverage, SingleClassifier) {
  const auto r = mc_theorem_coverage(1, 1000, 1, 0.2, {0.3}, mc(20000));
  EXPECT_TRUE(r.passed);
}

TEST(McCoverage, DomainChecks) {
  EXPECT_THROW(mc_theorem_coverage(2, 100, 5000, 0.05, {0.1, 0.2, 0.3, 0.4, 0.5}, mc(10)),
               Error);
  EXPECT_THROW(mc_theorem_coverage(4, 100, 5000, 0.05, {0.7}, mc(10)), Error);
  EXPECT_THROW(mc_theorem_coverage(0, 100, 5000, 0.05, {0.1}, mc(10)), Error);
}

TEST(KlScan, NoViolations) {
  const auto r = kl_scan(200, 200);
  EXPECT_EQ(r.points, 40000u);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_LE(r.worst_gap, kKlScanSlack);
}

TEST(KlScan, EpsZeroRowIsTight) {
  const auto r = kl_scan(2, 2);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_GE(r.worst_gap, 0.0);  // the eps = 0 row has gap exactly 0
}

TEST(KlScan, HalfColumnPinsker) {
  for (int j = 0; j < 100; ++j) {
    const double eps = 0.5 * j / 100.0;
    EXPECT_GE(kl_bernoulli(0.5, eps), 2.0 * eps * eps - kKlScanSlack);
  }
}

TEST(KlScan, RejectsTinyGrid) { EXPECT_THROW(kl_scan(1, 5), Error); }

TEST(VerifyJson, Fields) {
  const auto j = to_json(mc_chernoff(0.5, 0.1, 100, mc(100)));
  for (const char* k : {"empirical", "analytic", "std_err", "passed", "trials", "hits"})
    EXPECT_TRUE(j.contains(k)) << k;
}
