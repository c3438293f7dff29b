#include "wexch/metrics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "wexch/analytic.hpp"

namespace wexch {
namespace {

RunMetrics fake_run(Scheme s, double t, Count n = 100) {
  RunMetrics m;
  m.scheme = s;
  m.n = n;
  m.t_comp = t;
  return m;
}

TEST(MeanAndSe, HandComputed) {
  const double two[] = {10.0, 20.0};
  const Estimate e = mean_and_se(two);
  EXPECT_DOUBLE_EQ(e.mean, 15.0);
  EXPECT_NEAR(e.se, 5.0, 1e-12);
  const double one[] = {3.0};
  EXPECT_EQ(mean_and_se(one).se, 0.0);
  EXPECT_THROW(mean_and_se(std::span<const double>{}), std::invalid_argument);
}

TEST(Summarize, SingleRunHasNoErrorBars) {
  auto r = fake_run(Scheme::exchange_known, 12.5);
  r.n_comm = 7;
  r.iterations = 3;
  const std::vector<RunMetrics> runs{r};
  const auto s = summarize(runs);
  EXPECT_EQ(s.trials, 1u);
  EXPECT_FALSE(s.se_defined);
  EXPECT_EQ(s.t_comp.mean, 12.5);
  EXPECT_EQ(s.t_comp.se, 0.0);
  EXPECT_DOUBLE_EQ(s.comm_normalized.mean, 0.07);
  EXPECT_EQ(s.comm_raw.mean, 7.0);
  EXPECT_EQ(s.iterations.mean, 3.0);
  EXPECT_FALSE(s.wasted_normalized.has_value());
}

TEST(Summarize, TwoRuns) {
  const std::vector<RunMetrics> runs{fake_run(Scheme::fixed, 10.0), fake_run(Scheme::fixed, 20.0)};
  AnalyticReferences refs;
  refs.oracle_mean = 14.0;
  const auto s = summarize(runs, refs);
  EXPECT_TRUE(s.se_defined);
  EXPECT_DOUBLE_EQ(s.t_comp.mean, 15.0);
  EXPECT_NEAR(s.t_comp.se, 5.0, 1e-12);
  EXPECT_EQ(s.references.oracle_mean, 14.0);
  EXPECT_FALSE(s.references.mds_optimum.has_value());
}

TEST(Summarize, MdsReportsWaste) {
  auto a = fake_run(Scheme::mds, 1.0);
  a.wasted_points = 50;
  auto b = fake_run(Scheme::mds, 2.0);
  b.wasted_points = 30;
  const std::vector<RunMetrics> runs{a, b};
  const auto s = summarize(runs);
  ASSERT_TRUE(s.wasted_normalized.has_value());
  EXPECT_DOUBLE_EQ(s.wasted_normalized->mean, 0.4);
}

TEST(Summarize, RejectsBadInput) {
  EXPECT_THROW(summarize(std::span<const RunMetrics>{}), std::invalid_argument);
  const std::vector<RunMetrics> mixed{fake_run(Scheme::fixed, 1.0), fake_run(Scheme::oracle, 1.0)};
  EXPECT_THROW(summarize(mixed), std::invalid_argument);
  const std::vector<RunMetrics> mixed_n{fake_run(Scheme::fixed, 1.0, 10), fake_run(Scheme::fixed, 1.0, 20)};
  EXPECT_THROW(summarize(mixed_n), std::invalid_argument);
}

TEST(Summarize, OracleRunsCentreOnPooledBound) {
  const HeterogeneityProfile p({1.0, 3.0, 6.0});
  RandomStream rng(1);
  std::vector<RunMetrics> runs;
  for (int i = 0; i < 1000; ++i) runs.push_back(run_oracle(200, p, rng));
  const auto s = summarize(runs);
  EXPECT_LE(std::abs(s.t_comp.mean - 20.0), 3.0 * s.t_comp.se);
  EXPECT_EQ(s.iterations.mean, 0.0);
}

TEST(Summarize, PermutationInvariant) {
  RandomStream prof(2);
  const auto p = sample_profile(5, 10.0, 30.0, prof);
  RandomStream rng(3);
  std::vector<RunMetrics> runs;
  for (int i = 0; i < 200; ++i) runs.push_back(run_exchange_unknown(2000, p, 4, rng));
  const auto base = summarize(runs);
  std::mt19937_64 gen(4);
  for (int c = 0; c < 20; ++c) {
    std::shuffle(runs.begin(), runs.end(), gen);
    const auto s = summarize(runs);
    EXPECT_EQ(s.t_comp.mean, base.t_comp.mean);
    EXPECT_EQ(s.t_comp.se, base.t_comp.se);
    EXPECT_EQ(s.comm_normalized.mean, base.comm_normalized.mean);
    EXPECT_EQ(s.iterations.se, base.iterations.se);
  }
}

TEST(CommOverhead, Examples) {
  IterationRecord first;
  first.index = 1;
  first.shipped = {10, 10, 10};
  const std::vector<IterationRecord> one{first};
  EXPECT_EQ(comm_overhead(one), 0);

  IterationRecord second;
  second.index = 2;
  second.shipped = {3, 0, 5};
  const std::vector<IterationRecord> two{first, second};
  EXPECT_EQ(comm_overhead(two), 8);

  EXPECT_THROW(comm_overhead(std::span<const IterationRecord>{}), std::invalid_argument);

  RandomStream rng(5);
  const auto m = run_exchange_known(500, HeterogeneityProfile({1.0, 2.0, 5.0}), 500, rng);
  EXPECT_EQ(comm_overhead(m.trace), 0);
}

TEST(CommOverhead, MatchesEngineCount) {
  RandomStream prof(6);
  RandomStream rng(7);
  for (int i = 0; i < 200; ++i) {
    const auto p = sample_profile(1 + static_cast<std::size_t>(i % 9), 20.0, 100.0, prof);
    const Count n = 500 + 37 * i;
    const auto a = run_exchange_known(n, p, i % 5, rng);
    EXPECT_EQ(comm_overhead(a.trace), a.n_comm);
    const auto b = run_exchange_unknown(n, p, i % 5, rng);
    EXPECT_EQ(comm_overhead(b.trace), b.n_comm);
    const auto c = run_fixed(n, p, rng);
    EXPECT_EQ(comm_overhead(c.trace), c.n_comm);
  }
}

TEST(Summarize, ExchangeDoesNotBeatOracleBound) {
  RandomStream prof(8);
  const auto p = sample_profile(10, 50.0, 2500.0 / 6.0, prof);
  const double bound = oracle_mean(20000, p);
  for (Scheme s : {Scheme::exchange_known, Scheme::exchange_unknown}) {
    RandomStream rng(9, static_cast<std::uint64_t>(s));
    std::vector<RunMetrics> runs;
    for (int i = 0; i < 100; ++i) {
      runs.push_back(s == Scheme::exchange_known ? run_exchange_known(20000, p, 20, rng)
                                                 : run_exchange_unknown(20000, p, 20, rng));
    }
    const auto sum = summarize(runs);
    EXPECT_GE(sum.t_comp.mean, bound * (1.0 - 3.0 * sum.t_comp.se / sum.t_comp.mean));
  }
}

}  // namespace
}  // namespace wexch
