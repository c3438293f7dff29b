#pragma once

#include <span>
#include <vector>

#include "wexch/model.hpp"
#include "wexch/random_stream.hpp"

namespace wexch {

/// Time to process one point at `rate` points/second: Exp(rate), strictly > 0.
/// Throws std::invalid_argument for a non-positive or non-finite rate.
double sample_exponential(double rate, RandomStream& rng);

/// Time to process `m` points in sequence: Erlang(m, rate). m == 0 gives 0.
///
/// Small shapes are summed point by point; larger shapes use the
/// Marsaglia-Tsang gamma sampler, which has the same law in O(1) draws.
double sample_erlang(Count m, double rate, RandomStream& rng);

/// Shapes up to this value are sampled as explicit sums of exponentials.
inline constexpr Count kErlangDirectSumLimit = 16;

/// Cumulative completion instants of a worker processing m points in order.
struct WorkerTrace {
  Count assignment = 0;
  double rate = 0.0;
  std::vector<double> instants;

  double completion_time() const noexcept { return instants.empty() ? 0.0 : instants.back(); }
};

WorkerTrace generate_trace(Count m, double rate, RandomStream& rng);

/// Points of the trace finished at or before t. Throws on negative t.
Count count_done_by(const WorkerTrace& trace, double t);

/// A trace whose instants are drawn on demand.
///
/// Produces the same instant sequence, in law, as generate_trace without
/// holding all m instants; the engine steps many of these in lockstep.
class LazyTrace {
 public:
  LazyTrace(Count assignment, double rate, double start = 0.0)
      : assignment_(assignment), rate_(rate), clock_(start) {}

  Count assignment() const noexcept { return assignment_; }
  Count produced() const noexcept { return produced_; }
  bool exhausted() const noexcept { return produced_ >= assignment_; }
  /// Instant of the most recently produced completion (the start time if none).
  double last_instant() const noexcept { return clock_; }

  /// Advance to the next completion instant. Precondition: !exhausted().
  double next(RandomStream& rng) {
    clock_ += sample_exponential(rate_, rng);
    ++produced_;
    return clock_;
  }

 private:
  Count assignment_;
  double rate_;
  double clock_;
  Count produced_ = 0;
};

}  // namespace wexch
