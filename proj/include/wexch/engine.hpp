#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wexch/model.hpp"
#include "wexch/random_stream.hpp"

namespace wexch {

/// Per-worker accounting kept by the master across epochs.
class WorkerLedger {
 public:
  struct Entry {
    Count assigned_current = 0;
    Count done_current = 0;
    Count left_current = 0;
    Count done_total = 0;
    double busy_time_total = 0.0;
    /// Learned rate (points/second); only the learned-rate scheme updates it.
    double estimated_rate = 1.0;
  };

  explicit WorkerLedger(std::size_t workers) : entries_(workers) {}

  std::size_t size() const noexcept { return entries_.size(); }
  const Entry& operator[](std::size_t k) const { return entries_.at(k); }
  std::span<const Entry> entries() const noexcept { return entries_; }

  /// Points still held by each worker from its latest assignment.
  std::vector<Count> left() const;
  Count total_left() const;
  Count total_done() const;

  /// Start an epoch: each worker now holds exactly `assignments[k]` points.
  void begin_epoch(std::span<const Count> assignments);
  /// Close an epoch with the points each worker finished and its busy time.
  void end_epoch(std::span<const Count> done, std::span<const double> busy);
  void set_estimated_rate(std::size_t k, double rate) { entries_.at(k).estimated_rate = rate; }

 private:
  std::vector<Entry> entries_;
};

enum class EpochKind : std::uint8_t {
  exchange,   // runs until the first worker empties its queue
  drain,      // no reassignment; every worker finishes what it holds
  pooled,     // work-conserving pool of the oracle
  wait_all,   // one fixed assignment, wait for everyone
  coded,      // MDS chunks, wait for the L fastest
};

/// One assignment epoch as seen by the master.
struct IterationRecord {
  std::size_t index = 1;  // 1-based
  EpochKind kind = EpochKind::exchange;
  /// True when the master sent an assignment at the start of this epoch.
  bool new_assignment = true;
  std::vector<Count> assignments;
  /// New points sent: max(assignment - points left from the previous epoch, 0).
  std::vector<Count> shipped;
  double duration = 0.0;
  std::vector<Count> done;
  /// Points not yet processed once the epoch closes.
  Count remaining_after = 0;
};

/// Control-plane message. Delivery is instantaneous.
struct ControlSignal {
  enum class Kind : std::uint8_t { stop_broadcast, completion_flag, feedback };

  Kind kind;
  std::size_t worker = 0;  // unused for stop_broadcast
  Count done = 0;          // feedback payload
  Count left = 0;          // feedback payload
  double at = 0.0;         // simulated time since the start of the run
};

struct RunMetrics {
  Scheme scheme = Scheme::oracle;
  Count n = 0;
  std::uint64_t seed = 0;
  double t_comp = 0.0;
  /// Points shipped after the initial assignment.
  Count n_comm = 0;
  /// Epochs that started with a master assignment.
  Count iterations = 0;
  /// MDS only: chunk points computed by the K - L workers not waited for.
  Count wasted_points = 0;
  /// MDS only: code dimension used.
  std::size_t mds_l = 0;
  std::vector<IterationRecord> trace;
  std::vector<ControlSignal> signals;
  WorkerLedger ledger{0};

  double normalized_comm() const { return static_cast<double>(n_comm) / static_cast<double>(n); }
};

struct EpochOutcome {
  double duration = 0.0;
  std::vector<Count> done;
  std::size_t first_finisher = 0;
};

/// Run every worker on its assignment until the first one empties its queue.
///
/// Workers with zero assignment are silent. A point still in progress at the
/// stop instant is not counted. Throws std::invalid_argument if no worker
/// has work or the sizes disagree with the profile.
EpochOutcome step_epoch(std::span<const Count> assignments, const HeterogeneityProfile& profile,
                        RandomStream& rng);

/// Work-conserving pool: the N-th completion of K merged point streams.
RunMetrics run_oracle(Count n, const HeterogeneityProfile& profile, RandomStream& rng);

/// Rate-proportional split, no reassignment, wait for the last worker.
RunMetrics run_fixed(Count n, const HeterogeneityProfile& profile, RandomStream& rng);

/// (K, L) MDS-coded chunks of ceil(N/L) points; done at the L-th completion.
RunMetrics run_mds(Count n, std::size_t l, const HeterogeneityProfile& profile, RandomStream& rng);

/// Work exchange with known rates. Reassigns while more than `threshold`
/// points remain, then lets every worker drain its leftovers.
RunMetrics run_exchange_known(Count n, const HeterogeneityProfile& profile, Count threshold,
                              RandomStream& rng);

/// Work exchange with rates learned online from completed points, with each
/// worker holding at most ceil(N/K) points.
RunMetrics run_exchange_unknown(Count n, const HeterogeneityProfile& profile, Count threshold,
                                RandomStream& rng);

struct RunOptions {
  /// Code dimension for the MDS scheme; required when scheme == mds.
  std::optional<std::size_t> mds_l;
};

/// Dispatch on config.scheme. The config's N and threshold are used; its K
/// must match the profile.
RunMetrics run_scheme(const ExperimentConfig& config, const HeterogeneityProfile& profile,
                      RandomStream& rng, const RunOptions& options = {});

}  // namespace wexch
