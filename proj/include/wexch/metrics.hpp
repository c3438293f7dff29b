#pragma once

#include <optional>
#include <span>

#include "wexch/engine.hpp"
#include "wexch/model.hpp"

namespace wexch {

/// Analytic values attached to a summary for comparison. Copied verbatim.
struct AnalyticReferences {
  std::optional<double> oracle_mean;
  std::optional<double> mds_optimum;
  std::optional<double> expected_comm_unknown;
};

struct TrialSummary {
  Scheme scheme = Scheme::oracle;
  std::size_t trials = 0;
  /// False for a single run, where every standard error is reported as 0.
  bool se_defined = false;
  Estimate t_comp;
  Estimate comm_normalized;
  Estimate comm_raw;
  Estimate iterations;
  /// MDS only.
  std::optional<Estimate> wasted_normalized;
  AnalyticReferences references;
};

/// Mean and standard error (sample SD with n - 1, over sqrt n). The result
/// does not depend on the order of `values`. SE is 0 for a single value.
Estimate mean_and_se(std::span<const double> values);

/// Aggregate runs of one scheme and one N. Throws std::invalid_argument on an
/// empty list or mixed schemes / point counts.
TrialSummary summarize(std::span<const RunMetrics> runs, const AnalyticReferences& references = {});

/// Points shipped after the initial assignment: the sum of `shipped` over
/// every record with index >= 2. Throws std::invalid_argument on an empty trace.
Count comm_overhead(std::span<const IterationRecord> trace);

}  // namespace wexch
