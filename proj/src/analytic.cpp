#include "wexch/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "wexch/stochastic.hpp"

namespace wexch {

namespace {

// Neumaier's compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Running mean and unbiased variance.
class Welford {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  Estimate estimate() const {
    if (n_ < 2) return {mean_, 0.0};
    const double var = m2_ / static_cast<double>(n_ - 1);
    return {mean_, std::sqrt(var / static_cast<double>(n_))};
  }

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(c);
}

// Advance `idx` to the next j-subset of {0..k-1} in lexicographic order.
bool next_combination(std::vector<std::size_t>& idx, std::size_t k) {
  const std::size_t j = idx.size();
  for (std::size_t pos = j; pos-- > 0;) {
    if (idx[pos] < k - j + pos) {
      ++idx[pos];
      for (std::size_t q = pos + 1; q < j; ++q) idx[q] = idx[q - 1] + 1;
      return true;
    }
  }
  return false;
}

void check_profile_order(std::size_t order, Count m, std::size_t k) {
  if (order < 1 || order > k) throw std::invalid_argument("order must lie in [1, K]");
  if (m < 1) throw std::invalid_argument("shape must be at least 1");
}

}  // namespace

double oracle_mean(Count n, const HeterogeneityProfile& profile) {
  if (n < 1) throw std::invalid_argument("N must be at least 1");
  return static_cast<double>(n) / profile.rate_sum();
}

std::vector<double> expected_done(Count n, const HeterogeneityProfile& profile) {
  if (n < 1) throw std::invalid_argument("N must be at least 1");
  std::vector<double> out(profile.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = profile.rate(k) * static_cast<double>(n) / profile.rate_sum();
  }
  return out;
}

double p_term_cost(std::size_t k, std::size_t j, Count m) {
  return binomial(k, j) * std::pow(static_cast<double>(m), static_cast<double>(j));
}

double p_term(std::size_t j, Count m, const HeterogeneityProfile& profile, double term_budget) {
  const std::size_t k = profile.size();
  if (j < 1 || j > k) throw std::invalid_argument("subset size must lie in [1, K]");
  if (m < 1) throw std::invalid_argument("shape must be at least 1");
  const double cost = p_term_cost(k, j, m);
  if (cost > term_budget) {
    throw InfeasibleError("exact order-statistic evaluation needs " + std::to_string(cost) +
                          " terms (budget " + std::to_string(term_budget) +
                          "); use the Monte Carlo estimator");
  }

  const std::size_t max_total = j * static_cast<std::size_t>(m - 1);
  std::vector<double> log_fact(max_total + 1);
  for (std::size_t s = 0; s <= max_total; ++s) log_fact[s] = std::lgamma(static_cast<double>(s) + 1.0);

  CompensatedSum acc;
  std::vector<std::size_t> idx(j);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<double> log_share(j);
  std::vector<Count> counts(j);
  do {
    double subset_rate = 0.0;
    for (std::size_t i : idx) subset_rate += profile.rate(i);
    for (std::size_t i = 0; i < j; ++i) log_share[i] = std::log(profile.rate(idx[i]) / subset_rate);

    std::fill(counts.begin(), counts.end(), 0);
    for (;;) {
      std::size_t total = 0;
      double log_term = 0.0;
      for (std::size_t i = 0; i < j; ++i) {
        const auto c = static_cast<std::size_t>(counts[i]);
        total += c;
        log_term += static_cast<double>(c) * log_share[i] - log_fact[c];
      }
      acc.add(std::exp(log_term + log_fact[total]) / subset_rate);

      std::size_t pos = 0;
      while (pos < j && ++counts[pos] == m) counts[pos++] = 0;
      if (pos == j) break;
    }
  } while (next_combination(idx, k));
  return acc.value();
}

void OrderStatSpec::validate() const { check_profile_order(order, shape, profile.size()); }

std::vector<double> orderstat_means(std::size_t max_order, Count m,
                                    const HeterogeneityProfile& profile, double term_budget) {
  const std::size_t k = profile.size();
  check_profile_order(max_order, m, k);

  // P_j is needed for j in [K - max_order + 1, K].
  const std::size_t lowest = k - max_order + 1;
  double cost = 0.0;
  for (std::size_t j = lowest; j <= k; ++j) cost += p_term_cost(k, j, m);
  if (cost > term_budget) {
    throw InfeasibleError("exact order-statistic evaluation needs " + std::to_string(cost) +
                          " terms (budget " + std::to_string(term_budget) +
                          "); use the Monte Carlo estimator");
  }
  std::vector<double> p(k + 1, 0.0);
  for (std::size_t j = lowest; j <= k; ++j) p[j] = p_term(j, m, profile, term_budget);

  std::vector<double> mu(max_order);
  double prev = 0.0;
  for (std::size_t l = 1; l <= max_order; ++l) {
    double step = 0.0;
    for (std::size_t j = 1; j <= l; ++j) {
      const double sign = (j % 2 == 1) ? 1.0 : -1.0;
      step += sign * binomial(k - l + j, j - 1) * p[k - l + j];
    }
    prev += step;
    mu[l - 1] = prev;
  }
  return mu;
}

double orderstat_mean(const OrderStatSpec& spec, double term_budget) {
  spec.validate();
  return orderstat_means(spec.order, spec.shape, spec.profile, term_budget).back();
}

std::vector<Estimate> mc_orderstat_means(Count m, const HeterogeneityProfile& profile,
                                         std::int64_t trials, RandomStream& rng) {
  const std::size_t k = profile.size();
  check_profile_order(1, m, k);
  if (trials < 1) throw std::invalid_argument("Monte Carlo needs at least one trial");
  std::vector<Welford> acc(k);
  std::vector<double> draw(k);
  for (std::int64_t t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < k; ++i) draw[i] = sample_erlang(m, profile.rate(i), rng);
    std::sort(draw.begin(), draw.end());
    for (std::size_t i = 0; i < k; ++i) acc[i].add(draw[i]);
  }
  std::vector<Estimate> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = acc[i].estimate();
  return out;
}

Estimate mc_orderstat_mean(const OrderStatSpec& spec, std::int64_t trials, RandomStream& rng) {
  spec.validate();
  if (trials < 1) throw std::invalid_argument("Monte Carlo needs at least one trial");
  const std::size_t k = spec.profile.size();
  Welford acc;
  std::vector<double> draw(k);
  const auto nth = static_cast<std::ptrdiff_t>(spec.order - 1);
  for (std::int64_t t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < k; ++i) draw[i] = sample_erlang(spec.shape, spec.profile.rate(i), rng);
    std::nth_element(draw.begin(), draw.begin() + nth, draw.end());
    acc.add(draw[static_cast<std::size_t>(nth)]);
  }
  return acc.estimate();
}

Count mds_chunk(Count n, std::size_t l) {
  if (n < 1) throw std::invalid_argument("N must be at least 1");
  if (l < 1) throw std::invalid_argument("L must be at least 1");
  const auto ll = static_cast<Count>(l);
  return (n + ll - 1) / ll;
}

double mds_mean(std::size_t l, Count n, const HeterogeneityProfile& profile, double term_budget) {
  return orderstat_mean(OrderStatSpec{l, mds_chunk(n, l), profile}, term_budget);
}

MdsPlan optimize_mds(Count n, const HeterogeneityProfile& profile, const MdsEstimator& estimator,
                     RandomStream& rng) {
  if (n < 1) throw std::invalid_argument("N must be at least 1");
  const std::size_t max_l = std::min(profile.size(), static_cast<std::size_t>(n));
  MdsPlan plan;
  plan.estimator = estimator.kind;
  plan.by_order.reserve(max_l);

  if (estimator.kind == MdsEstimator::Kind::exact) {
    // Fail before doing any work if some L is out of budget.
    for (std::size_t l = 1; l <= max_l; ++l) {
      const Count m = mds_chunk(n, l);
      double cost = 0.0;
      for (std::size_t j = profile.size() - l + 1; j <= profile.size(); ++j) {
        cost += p_term_cost(profile.size(), j, m);
      }
      if (cost > estimator.term_budget) {
        throw InfeasibleError("exact MDS optimisation infeasible at L=" + std::to_string(l) +
                              "; select the Monte Carlo estimator");
      }
    }
    for (std::size_t l = 1; l <= max_l; ++l) {
      plan.by_order.push_back({mds_mean(l, n, profile, estimator.term_budget), 0.0});
    }
  } else {
    if (estimator.trials < 1) throw std::invalid_argument("Monte Carlo needs at least one trial");
    for (std::size_t l = 1; l <= max_l; ++l) {
      plan.by_order.push_back(
          mc_orderstat_mean(OrderStatSpec{l, mds_chunk(n, l), profile}, estimator.trials, rng));
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < plan.by_order.size(); ++i) {
    if (plan.by_order[i].mean < plan.by_order[best].mean) best = i;
  }
  plan.l_star = best + 1;
  plan.chunk = mds_chunk(n, plan.l_star);
  plan.mean = plan.by_order[best].mean;
  plan.se = plan.by_order[best].se;
  return plan;
}

double expected_comm_unknown(Count n, Count k, const HeterogeneityProfile& profile) {
  if (k < 1 || static_cast<std::size_t>(k) != profile.size()) {
    throw std::invalid_argument("K must equal the profile size");
  }
  const double even = static_cast<double>(n) / static_cast<double>(k);
  double acc = 0.0;
  for (double r : profile.rates()) {
    acc += std::max(even - static_cast<double>(n) * r / profile.rate_sum(), 0.0);
  }
  return acc;
}

}  // namespace wexch
