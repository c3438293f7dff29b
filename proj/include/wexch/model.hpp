#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "wexch/random_stream.hpp"

namespace wexch {

/// Number of data points. Signed so that differences are safe to compute.
using Count = std::int64_t;

/// A sample mean with its standard error.
struct Estimate {
  double mean = 0.0;
  double se = 0.0;
};

/// The per-worker mean processing rates (points/second) of a cluster.
class HeterogeneityProfile {
 public:
  /// Throws std::invalid_argument if the list is empty or any rate is not a
  /// strictly positive finite number.
  explicit HeterogeneityProfile(std::vector<double> rates);

  std::span<const double> rates() const noexcept { return rates_; }
  double rate(std::size_t k) const { return rates_.at(k); }
  double rate_sum() const noexcept { return rate_sum_; }
  std::size_t size() const noexcept { return rates_.size(); }

  double mean() const noexcept { return rate_sum_ / static_cast<double>(rates_.size()); }
  /// Population variance of the rates.
  double variance() const noexcept;

  /// Same profile with every rate multiplied by `factor` (> 0).
  HeterogeneityProfile scaled(double factor) const;

 private:
  std::vector<double> rates_;
  double rate_sum_;
};

/// Uniform rate law with a given mean and variance:
/// each rate ~ Uniform(mu - sqrt(3 sigma2), mu + sqrt(3 sigma2)).
struct ProfileSampler {
  double mu;
  double sigma2;

  /// Largest admissible variance for a mean (support stays non-negative).
  static double max_sigma2(double mu) noexcept { return mu * mu / 3.0; }

  /// Throws std::invalid_argument unless mu > 0 and 0 <= sigma2 <= mu^2/3.
  void validate() const;
  double half_width() const;
};

enum class Scheme : std::uint8_t { oracle, mds, fixed, exchange_known, exchange_unknown };

std::string_view to_string(Scheme scheme) noexcept;
/// Parses the lowercase scheme name; std::nullopt for unknown names.
std::optional<Scheme> parse_scheme(std::string_view name) noexcept;
inline constexpr Scheme kAllSchemes[] = {Scheme::oracle, Scheme::mds, Scheme::fixed,
                                         Scheme::exchange_known, Scheme::exchange_unknown};

struct ExperimentConfig {
  Count n = 100000;
  Count k = 10;
  double threshold_fraction = 0.01;
  std::uint64_t seed = 1;
  Scheme scheme = Scheme::exchange_known;

  /// Throws std::invalid_argument on N < K, K < 1, or a fraction outside [0, 1).
  void validate() const;
  /// floor(threshold_fraction * N / K).
  Count cutting_threshold() const;
};

/// floor(fraction * n / k), robust to the fraction not being exactly
/// representable (1e-4 * 10^4 must give 1, not 0).
Count cutting_threshold(Count n, Count k, double fraction);

/// Draw K independent rates from the sampler's uniform law.
HeterogeneityProfile sample_profile(std::size_t k, double mu, double sigma2, RandomStream& rng);

/// Integer split of `total` proportional to `weights` by largest remainder.
///
/// Every entry is floor(total * w_k / sum w) or one more; the leftover units
/// go to the largest fractional remainders, lower index first on ties. Zero
/// weights are allowed and receive nothing. Throws std::invalid_argument if
/// total < 0, any weight is negative or non-finite, or all weights are zero.
std::vector<Count> proportional_split(Count total, std::span<const double> weights);

}  // namespace wexch
