#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "wexch/model.hpp"
#include "wexch/random_stream.hpp"

namespace wexch {

/// Raised when an exact evaluation would enumerate more terms than allowed.
/// Callers should switch to the Monte Carlo estimator.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultTermBudget = 1e8;

/// Mean completion time of a fully work-conserving pool: N / rate_sum.
double oracle_mean(Count n, const HeterogeneityProfile& profile);

/// Expected points processed per worker in the work-conserving pool:
/// rate_k * N / rate_sum.
std::vector<double> expected_done(Count n, const HeterogeneityProfile& profile);

/// Number of terms the exact P-term enumeration visits: C(K, j) * m^j.
double p_term_cost(std::size_t k, std::size_t j, Count m);

/// Sum over all j-subsets of workers of the mean of the minimum of their
/// Erlang(m, rate) completion times, evaluated as the explicit double sum
/// over subsets and per-worker counts 0 <= n_i < m:
///
///   (1 / R) * (sum n_i)! / prod(n_i!) * prod (rate_i / R)^n_i,  R = subset rate sum.
///
/// Multinomials are evaluated in log space. Throws InfeasibleError when
/// p_term_cost exceeds `term_budget`, std::invalid_argument on j outside
/// [1, K] or m < 1.
double p_term(std::size_t j, Count m, const HeterogeneityProfile& profile,
              double term_budget = kDefaultTermBudget);

/// The L-th order statistic of K independent Erlang(m, rate_k) variables.
struct OrderStatSpec {
  std::size_t order;  // L, 1-based
  Count shape;        // m
  HeterogeneityProfile profile;

  void validate() const;
};

/// Exact mean of the L-th smallest completion time, via the recursion
///   mu(l) = mu(l-1) + sum_{j=1..l} (-1)^(j-1) C(K-l+j, j-1) P_{K-l+j},  mu(0) = 0.
double orderstat_mean(const OrderStatSpec& spec, double term_budget = kDefaultTermBudget);

/// Exact means for every order 1..max_order from one set of P terms.
std::vector<double> orderstat_means(std::size_t max_order, Count m,
                                    const HeterogeneityProfile& profile,
                                    double term_budget = kDefaultTermBudget);

/// Monte Carlo estimate of the L-th order statistic mean.
Estimate mc_orderstat_mean(const OrderStatSpec& spec, std::int64_t trials, RandomStream& rng);

/// Monte Carlo estimates for every order 1..K from the same sorted samples.
std::vector<Estimate> mc_orderstat_means(Count m, const HeterogeneityProfile& profile,
                                         std::int64_t trials, RandomStream& rng);

/// Chunk size of a (K, L) MDS-coded split of N points: ceil(N / L).
Count mds_chunk(Count n, std::size_t l);

/// Exact mean MDS completion time with code dimension L.
double mds_mean(std::size_t l, Count n, const HeterogeneityProfile& profile,
                double term_budget = kDefaultTermBudget);

struct MdsEstimator {
  enum class Kind : std::uint8_t { exact, monte_carlo };

  Kind kind = Kind::monte_carlo;
  std::int64_t trials = 0;
  double term_budget = kDefaultTermBudget;

  static MdsEstimator exact(double budget = kDefaultTermBudget) {
    return {Kind::exact, 0, budget};
  }
  static MdsEstimator monte_carlo(std::int64_t trials) {
    return {Kind::monte_carlo, trials, kDefaultTermBudget};
  }
};

struct MdsPlan {
  std::size_t l_star = 1;
  Count chunk = 0;
  double mean = 0.0;
  /// Zero for the exact estimator.
  double se = 0.0;
  MdsEstimator::Kind estimator = MdsEstimator::Kind::exact;
  /// Estimated mean for L = 1..min(K, N).
  std::vector<Estimate> by_order;
};

/// Minimise the mean MDS completion time over L in 1..min(K, N); ties go to
/// the smaller L. The stream is only consumed by the Monte Carlo estimator.
MdsPlan optimize_mds(Count n, const HeterogeneityProfile& profile, const MdsEstimator& estimator,
                     RandomStream& rng);

/// Approximate points shipped by work exchange with learned rates when it
/// starts from a uniform split: sum_k max(N/K - N rate_k / rate_sum, 0).
double expected_comm_unknown(Count n, Count k, const HeterogeneityProfile& profile);

}  // namespace wexch
