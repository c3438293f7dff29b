#include "wexch/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace wexch {

HeterogeneityProfile::HeterogeneityProfile(std::vector<double> rates) : rates_(std::move(rates)) {
  if (rates_.empty()) throw std::invalid_argument("heterogeneity profile needs at least one worker");
  for (std::size_t k = 0; k < rates_.size(); ++k) {
    if (!std::isfinite(rates_[k]) || rates_[k] <= 0.0) {
      throw std::invalid_argument("rate of worker " + std::to_string(k) +
                                  " must be positive and finite");
    }
  }
  rate_sum_ = std::accumulate(rates_.begin(), rates_.end(), 0.0);
}

double HeterogeneityProfile::variance() const noexcept {
  const double m = mean();
  double acc = 0.0;
  for (double r : rates_) acc += (r - m) * (r - m);
  return acc / static_cast<double>(rates_.size());
}

HeterogeneityProfile HeterogeneityProfile::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw std::invalid_argument("scale factor must be positive and finite");
  }
  std::vector<double> r(rates_);
  for (double& x : r) x *= factor;
  return HeterogeneityProfile(std::move(r));
}

void ProfileSampler::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("mu must be positive");
  if (!(sigma2 >= 0.0) || sigma2 > max_sigma2(mu) * (1.0 + 1e-12)) {
    throw std::invalid_argument("sigma2 must lie in [0, mu^2/3]");
  }
}

double ProfileSampler::half_width() const { return std::sqrt(3.0 * sigma2); }

std::string_view to_string(Scheme scheme) noexcept {
  switch (scheme) {
    case Scheme::oracle: return "oracle";
    case Scheme::mds: return "mds";
    case Scheme::fixed: return "fixed";
    case Scheme::exchange_known: return "exchange_known";
    case Scheme::exchange_unknown: return "exchange_unknown";
  }
  return "unknown";
}

std::optional<Scheme> parse_scheme(std::string_view name) noexcept {
  for (Scheme s : kAllSchemes) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  if (k < 1) throw std::invalid_argument("K must be at least 1");
  if (n < k) throw std::invalid_argument("N must be at least K");
  if (!(threshold_fraction >= 0.0 && threshold_fraction < 1.0)) {
    throw std::invalid_argument("threshold fraction must lie in [0, 1)");
  }
}

Count ExperimentConfig::cutting_threshold() const {
  return wexch::cutting_threshold(n, k, threshold_fraction);
}

Count cutting_threshold(Count n, Count k, double fraction) {
  const double x = fraction * static_cast<double>(n) / static_cast<double>(k);
  return static_cast<Count>(std::floor(x * (1.0 + 1e-12)));
}

HeterogeneityProfile sample_profile(std::size_t k, double mu, double sigma2, RandomStream& rng) {
  const ProfileSampler sampler{mu, sigma2};
  sampler.validate();
  if (k == 0) throw std::invalid_argument("K must be at least 1");
  const double a = sampler.half_width();
  // At sigma2 = mu^2/3 the support touches zero; rounding must not cross it.
  const double lo = std::max(mu - a, 0.0);
  std::vector<double> rates(k);
  for (double& r : rates) {
    r = a == 0.0 ? mu : rng.uniform(lo, mu + a);
  }
  return HeterogeneityProfile(std::move(rates));
}

std::vector<Count> proportional_split(Count total, std::span<const double> weights) {
  if (total < 0) throw std::invalid_argument("cannot split a negative total");
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("weights must be non-negative");
    sum += w;
  }
  if (!(sum > 0.0)) throw std::invalid_argument("at least one weight must be positive");

  const std::size_t k = weights.size();
  std::vector<Count> out(k, 0);
  std::vector<double> remainder(k, 0.0);
  Count assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double quota = static_cast<double>(total) * weights[i] / sum;
    const double whole = std::floor(quota);
    out[i] = static_cast<Count>(whole);
    remainder[i] = quota - whole;
    assigned += out[i];
  }

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });

  // Rounding can in principle push the floors a unit off in either direction.
  Count leftover = total - assigned;
  for (std::size_t i = 0; leftover > 0; i = (i + 1) % k) {
    if (weights[order[i]] > 0.0) {
      ++out[order[i]];
      --leftover;
    }
  }
  for (std::size_t j = k; leftover < 0 && j > 0; --j) {
    const std::size_t idx = order[j - 1];
    if (out[idx] > 0) {
      --out[idx];
      ++leftover;
    }
  }
  return out;
}

}  // namespace wexch
