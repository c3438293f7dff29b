#include "wexch/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace wexch {
namespace {

TEST(HeterogeneityProfile, CachesRateSum) {
  const HeterogeneityProfile p({1.0, 3.0, 6.0});
  EXPECT_EQ(p.size(), 3u);
  EXPECT_DOUBLE_EQ(p.rate_sum(), 10.0);
  EXPECT_DOUBLE_EQ(p.mean(), 10.0 / 3.0);
}

TEST(HeterogeneityProfile, RejectsInvalidRates) {
  EXPECT_THROW(HeterogeneityProfile({}), std::invalid_argument);
  EXPECT_THROW(HeterogeneityProfile({1.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(HeterogeneityProfile({-1.0}), std::invalid_argument);
  EXPECT_THROW(HeterogeneityProfile({INFINITY}), std::invalid_argument);
  EXPECT_THROW(HeterogeneityProfile({NAN}), std::invalid_argument);
}

TEST(SampleProfile, ZeroVarianceIsHomogeneous) {
  RandomStream rng(1);
  const auto p = sample_profile(3, 5.0, 0.0, rng);
  for (double r : p.rates()) EXPECT_EQ(r, 5.0);
  EXPECT_DOUBLE_EQ(p.rate_sum(), 15.0);
}

TEST(SampleProfile, SingleWorkerStaysInSupport) {
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    RandomStream rng(seed);
    const auto p = sample_profile(1, 2.0, 1.0, rng);
    EXPECT_GE(p.rate(0), 2.0 - std::sqrt(3.0));
    EXPECT_LE(p.rate(0), 2.0 + std::sqrt(3.0));
  }
}

TEST(SampleProfile, LargeSampleMatchesMoments) {
  RandomStream rng(42);
  const auto p = sample_profile(100000, 50.0, 100.0, rng);
  const double mean = p.mean();
  double ss = 0.0;
  for (double r : p.rates()) ss += (r - mean) * (r - mean);
  const double var = ss / static_cast<double>(p.size() - 1);
  EXPECT_NEAR(mean, 50.0, 0.5);
  EXPECT_NEAR(var, 100.0, 5.0);
  EXPECT_NEAR(p.rate_sum(), std::accumulate(p.rates().begin(), p.rates().end(), 0.0),
              1e-9 * p.rate_sum());
}

TEST(SampleProfile, RejectsInadmissibleParameters) {
  RandomStream rng(1);
  EXPECT_THROW(sample_profile(3, 0.0, 0.0, rng), std::invalid_argument);
  EXPECT_THROW(sample_profile(3, -1.0, 0.0, rng), std::invalid_argument);
  EXPECT_THROW(sample_profile(3, 3.0, 3.01, rng), std::invalid_argument);
  EXPECT_THROW(sample_profile(3, 3.0, -0.1, rng), std::invalid_argument);
}

TEST(SampleProfile, RatesPositiveUpToBoundaryVariance) {
  std::mt19937_64 meta(7);
  std::uniform_real_distribution<double> mu_dist(0.1, 100.0);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  for (int c = 0; c < 500; ++c) {
    const double mu = mu_dist(meta);
    const double s2 = c % 10 == 0 ? mu * mu / 3.0 : frac(meta) * mu * mu / 3.0;
    RandomStream rng(static_cast<std::uint64_t>(c));
    const auto p = sample_profile(20, mu, s2, rng);
    for (double r : p.rates()) EXPECT_GT(r, 0.0);
  }
}

TEST(ProportionalSplit, WorkedExamples) {
  const double uneven[] = {1.0, 3.0, 6.0};
  EXPECT_EQ(proportional_split(200, uneven), (std::vector<Count>{20, 60, 120}));
  const double four[] = {1.0, 1.0, 1.0, 1.0};
  EXPECT_EQ(proportional_split(100, four), (std::vector<Count>{25, 25, 25, 25}));
  // 10/3 each, equal remainders: the single leftover goes to index 0.
  const double three[] = {1.0, 1.0, 1.0};
  EXPECT_EQ(proportional_split(10, three), (std::vector<Count>{4, 3, 3}));
}

TEST(ProportionalSplit, ZeroWeightsGetNothing) {
  const double w[] = {0.0, 2.0, 0.0, 1.0};
  const auto s = proportional_split(7, w);
  EXPECT_EQ(s[0], 0);
  EXPECT_EQ(s[2], 0);
  EXPECT_EQ(s[1] + s[3], 7);
}

TEST(ProportionalSplit, RejectsBadInput) {
  const double zeros[] = {0.0, 0.0};
  EXPECT_THROW(proportional_split(5, zeros), std::invalid_argument);
  const double ok[] = {1.0};
  EXPECT_THROW(proportional_split(-1, ok), std::invalid_argument);
  const double neg[] = {1.0, -1.0};
  EXPECT_THROW(proportional_split(5, neg), std::invalid_argument);
  EXPECT_EQ(proportional_split(0, ok), (std::vector<Count>{0}));
}

TEST(ProportionalSplit, FuzzConservesAndStaysWithinOneUnit) {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> size(1, 60);
  std::uniform_int_distribution<Count> total_dist(0, 2000000);
  std::uniform_real_distribution<double> wdist(0.0, 100.0);
  std::bernoulli_distribution zero(0.15);
  for (int c = 0; c < 10000; ++c) {
    std::vector<double> w(static_cast<std::size_t>(size(gen)));
    for (double& x : w) x = zero(gen) ? 0.0 : wdist(gen);
    if (std::accumulate(w.begin(), w.end(), 0.0) == 0.0) w[0] = 1.0;
    const Count total = c % 3 == 0 ? total_dist(gen) % 50 : total_dist(gen);
    const auto s = proportional_split(total, w);
    ASSERT_EQ(std::accumulate(s.begin(), s.end(), Count{0}), total);
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double quota = static_cast<double>(total) * w[i] / sum;
      ASSERT_GE(s[i], 0);
      ASSERT_LT(std::abs(static_cast<double>(s[i]) - quota), 1.0);
    }
  }
}

TEST(ExperimentConfig, ValidatesAndComputesThreshold) {
  ExperimentConfig c;
  c.n = 100000;
  c.k = 10;
  c.threshold_fraction = 0.01;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.cutting_threshold(), 100);
  EXPECT_EQ(cutting_threshold(100000, 10, 1e-4), 1);
  EXPECT_EQ(cutting_threshold(100000, 10, 1e-3), 10);
  EXPECT_EQ(cutting_threshold(100000, 10, 0.1), 1000);
  EXPECT_EQ(cutting_threshold(100, 3, 0.0), 0);

  c.n = 5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.n = 100;
  c.k = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.k = 10;
  c.threshold_fraction = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Scheme, NamesRoundTrip) {
  for (Scheme s : kAllSchemes) EXPECT_EQ(parse_scheme(to_string(s)), s);
  EXPECT_FALSE(parse_scheme("coded").has_value());
}

}  // namespace
}  // namespace wexch
