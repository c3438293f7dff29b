#include "wexch/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace wexch {

Estimate mean_and_se(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("cannot summarize an empty sample");
  // Sorting first makes the floating-point sums independent of input order.
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const auto n = static_cast<double>(v.size());
  double total = 0.0;
  for (double x : v) total += x;
  const double mean = total / n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

TrialSummary summarize(std::span<const RunMetrics> runs, const AnalyticReferences& references) {
  if (runs.empty()) throw std::invalid_argument("cannot summarize an empty run list");
  const Scheme scheme = runs.front().scheme;
  const Count n = runs.front().n;
  std::vector<double> t, comm, comm_raw, iters, wasted;
  for (const RunMetrics& r : runs) {
    if (r.scheme != scheme) throw std::invalid_argument("runs mix different schemes");
    if (r.n != n) throw std::invalid_argument("runs mix different point counts");
    t.push_back(r.t_comp);
    comm.push_back(r.normalized_comm());
    comm_raw.push_back(static_cast<double>(r.n_comm));
    iters.push_back(static_cast<double>(r.iterations));
    wasted.push_back(static_cast<double>(r.wasted_points) / static_cast<double>(r.n));
  }
  TrialSummary s;
  s.scheme = scheme;
  s.trials = runs.size();
  s.se_defined = runs.size() > 1;
  s.t_comp = mean_and_se(t);
  s.comm_normalized = mean_and_se(comm);
  s.comm_raw = mean_and_se(comm_raw);
  s.iterations = mean_and_se(iters);
  if (scheme == Scheme::mds) s.wasted_normalized = mean_and_se(wasted);
  s.references = references;
  return s;
}

Count comm_overhead(std::span<const IterationRecord> trace) {
  if (trace.empty()) throw std::invalid_argument("trace is empty");
  Count total = 0;
  for (const IterationRecord& r : trace) {
    if (r.index < 2) continue;
    for (Count s : r.shipped) total += s;
  }
  return total;
}

}  // namespace wexch
