#include "wexch/engine.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>

#include "wexch/stochastic.hpp"

namespace wexch {

// ---------------------------------------------------------------------------
// WorkerLedger

std::vector<Count> WorkerLedger::left() const {
  std::vector<Count> out(entries_.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = entries_[k].left_current;
  return out;
}

Count WorkerLedger::total_left() const {
  Count s = 0;
  for (const Entry& e : entries_) s += e.left_current;
  return s;
}

Count WorkerLedger::total_done() const {
  Count s = 0;
  for (const Entry& e : entries_) s += e.done_total;
  return s;
}

void WorkerLedger::begin_epoch(std::span<const Count> assignments) {
  if (assignments.size() != entries_.size()) throw std::invalid_argument("assignment size mismatch");
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    if (assignments[k] < 0) throw std::invalid_argument("negative assignment");
    entries_[k].assigned_current = assignments[k];
    entries_[k].done_current = 0;
    entries_[k].left_current = assignments[k];
  }
}

void WorkerLedger::end_epoch(std::span<const Count> done, std::span<const double> busy) {
  if (done.size() != entries_.size() || busy.size() != entries_.size()) {
    throw std::invalid_argument("epoch result size mismatch");
  }
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    Entry& e = entries_[k];
    if (done[k] < 0 || done[k] > e.assigned_current) {
      throw std::logic_error("worker finished more points than it held");
    }
    e.done_current = done[k];
    e.left_current = e.assigned_current - done[k];
    e.done_total += done[k];
    e.busy_time_total += busy[k];
  }
}

// ---------------------------------------------------------------------------
// Epoch kernel

namespace {

using Event = std::pair<double, std::size_t>;
using EventQueue = std::priority_queue<Event, std::vector<Event>, std::greater<>>;

void check_sizes(std::span<const Count> assignments, const HeterogeneityProfile& profile) {
  if (assignments.size() != profile.size()) {
    throw std::invalid_argument("expected " + std::to_string(profile.size()) + " assignments, got " +
                                std::to_string(assignments.size()));
  }
}

Count sum(std::span<const Count> v) { return std::accumulate(v.begin(), v.end(), Count{0}); }

std::vector<Count> shipments(std::span<const Count> assignments, std::span<const Count> left) {
  std::vector<Count> out(assignments.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::max(assignments[k] - left[k], Count{0});
  return out;
}

RunMetrics make_metrics(Scheme scheme, Count n, const HeterogeneityProfile& profile,
                        const RandomStream& rng) {
  RunMetrics m;
  m.scheme = scheme;
  m.n = n;
  m.seed = rng.seed();
  m.ledger = WorkerLedger(profile.size());
  return m;
}

void finalize(RunMetrics& m) {
  m.t_comp = 0.0;
  m.n_comm = 0;
  m.iterations = 0;
  for (const IterationRecord& r : m.trace) {
    m.t_comp += r.duration;
    if (r.new_assignment) ++m.iterations;
    if (r.index >= 2) m.n_comm += sum(r.shipped);
  }
}

void check_n(Count n, const HeterogeneityProfile& profile) {
  if (n < 1) throw std::invalid_argument("N must be at least 1");
  (void)profile;
}

// Place `total` points on workers in proportion to `weights`, never giving a
// worker more than its `room`. Workers with zero weight only receive points
// once every positively weighted worker is full.
std::vector<Count> capped_fill(Count total, std::span<const double> weights,
                               std::vector<Count> room) {
  const std::size_t k = weights.size();
  std::vector<Count> out(k, 0);
  while (total > 0) {
    std::vector<double> w(k, 0.0);
    bool any = false;
    for (std::size_t i = 0; i < k; ++i) {
      if (room[i] > 0 && weights[i] > 0.0) {
        w[i] = weights[i];
        any = true;
      }
    }
    if (!any) {
      for (std::size_t i = 0; i < k; ++i) {
        if (room[i] > 0) {
          w[i] = 1.0;
          any = true;
        }
      }
    }
    if (!any) throw std::logic_error("not enough worker storage for the remaining points");
    const std::vector<Count> share = proportional_split(total, w);
    for (std::size_t i = 0; i < k; ++i) {
      const Count placed = std::min(share[i], room[i]);
      out[i] += placed;
      room[i] -= placed;
      total -= placed;
    }
  }
  return out;
}

}  // namespace

EpochOutcome step_epoch(std::span<const Count> assignments, const HeterogeneityProfile& profile,
                        RandomStream& rng) {
  check_sizes(assignments, profile);
  std::vector<LazyTrace> traces;
  traces.reserve(profile.size());
  EventQueue events;
  for (std::size_t k = 0; k < profile.size(); ++k) {
    if (assignments[k] < 0) throw std::invalid_argument("negative assignment");
    traces.emplace_back(assignments[k], profile.rate(k));
    if (assignments[k] > 0) events.emplace(traces[k].next(rng), k);
  }
  if (events.empty()) throw std::invalid_argument("at least one worker needs a positive assignment");

  EpochOutcome out;
  out.done.assign(profile.size(), 0);
  for (;;) {
    const auto [t, k] = events.top();
    events.pop();
    ++out.done[k];
    if (traces[k].exhausted()) {
      // Every other worker's pending point completes strictly later.
      out.duration = t;
      out.first_finisher = k;
      return out;
    }
    events.emplace(traces[k].next(rng), k);
  }
}

// ---------------------------------------------------------------------------
// Schemes

RunMetrics run_oracle(Count n, const HeterogeneityProfile& profile, RandomStream& rng) {
  check_n(n, profile);
  RunMetrics m = make_metrics(Scheme::oracle, n, profile, rng);
  const std::size_t k = profile.size();

  // Superpose K unbounded point streams; the pool is done at the N-th point.
  std::vector<LazyTrace> traces;
  traces.reserve(k);
  EventQueue events;
  for (std::size_t i = 0; i < k; ++i) {
    traces.emplace_back(n, profile.rate(i));
    events.emplace(traces[i].next(rng), i);
  }
  std::vector<Count> done(k, 0);
  double t = 0.0;
  for (Count processed = 0; processed < n; ++processed) {
    const auto [at, w] = events.top();
    events.pop();
    t = at;
    ++done[w];
    if (processed + 1 < n) events.emplace(traces[w].next(rng), w);
  }

  m.ledger.begin_epoch(done);
  m.ledger.end_epoch(done, std::vector<double>(k, t));
  IterationRecord r;
  r.index = 1;
  r.kind = EpochKind::pooled;
  r.new_assignment = false;
  r.assignments = done;
  r.shipped.assign(k, 0);
  r.duration = t;
  r.done = std::move(done);
  r.remaining_after = 0;
  m.trace.push_back(std::move(r));
  finalize(m);
  return m;
}

RunMetrics run_fixed(Count n, const HeterogeneityProfile& profile, RandomStream& rng) {
  check_n(n, profile);
  RunMetrics m = make_metrics(Scheme::fixed, n, profile, rng);
  const std::size_t k = profile.size();
  const std::vector<Count> assign = proportional_split(n, profile.rates());

  std::vector<double> finish(k);
  for (std::size_t i = 0; i < k; ++i) finish[i] = sample_erlang(assign[i], profile.rate(i), rng);
  const double t = *std::max_element(finish.begin(), finish.end());

  m.ledger.begin_epoch(assign);
  m.ledger.end_epoch(assign, finish);
  for (std::size_t i = 0; i < k; ++i) {
    if (assign[i] > 0) {
      m.signals.push_back({ControlSignal::Kind::completion_flag, i, assign[i], 0, finish[i]});
      m.signals.push_back({ControlSignal::Kind::feedback, i, assign[i], 0, finish[i]});
    }
  }
  IterationRecord r;
  r.index = 1;
  r.kind = EpochKind::wait_all;
  r.assignments = assign;
  r.shipped = assign;
  r.duration = t;
  r.done = assign;
  r.remaining_after = 0;
  m.trace.push_back(std::move(r));
  finalize(m);
  return m;
}

RunMetrics run_mds(Count n, std::size_t l, const HeterogeneityProfile& profile, RandomStream& rng) {
  check_n(n, profile);
  const std::size_t k = profile.size();
  if (l < 1 || l > k) throw std::invalid_argument("MDS code dimension L must lie in [1, K]");
  RunMetrics m = make_metrics(Scheme::mds, n, profile, rng);
  m.mds_l = l;
  const Count chunk = (n + static_cast<Count>(l) - 1) / static_cast<Count>(l);

  std::vector<double> finish(k);
  for (std::size_t i = 0; i < k; ++i) finish[i] = sample_erlang(chunk, profile.rate(i), rng);
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return finish[a] < finish[b]; });
  const double t = finish[order[l - 1]];

  std::vector<Count> assign(k, chunk);
  std::vector<Count> done(k, 0);
  std::vector<double> busy(k, t);
  for (std::size_t r = 0; r < l; ++r) {
    done[order[r]] = chunk;
    busy[order[r]] = finish[order[r]];
    m.signals.push_back({ControlSignal::Kind::completion_flag, order[r], chunk, 0, finish[order[r]]});
  }
  m.signals.push_back({ControlSignal::Kind::stop_broadcast, 0, 0, 0, t});
  m.wasted_points = static_cast<Count>(k - l) * chunk;

  m.ledger.begin_epoch(assign);
  m.ledger.end_epoch(done, busy);
  IterationRecord r;
  r.index = 1;
  r.kind = EpochKind::coded;
  r.assignments = assign;
  r.shipped = assign;
  r.duration = t;
  r.done = std::move(done);
  r.remaining_after = 0;
  m.trace.push_back(std::move(r));
  finalize(m);
  return m;
}

namespace {

// Master-side state shared by both exchange variants.
class ExchangeMaster {
 public:
  ExchangeMaster(RunMetrics& metrics, const HeterogeneityProfile& profile, RandomStream& rng)
      : m_(metrics), profile_(profile), rng_(rng) {}

  double elapsed() const { return clock_; }

  // Send `assignments`, run to the first completion flag, pause everyone and
  // collect feedback. Returns the points left on workers.
  Count exchange_epoch(const std::vector<Count>& assignments, Count unassigned) {
    const std::vector<Count> left_before = m_.ledger.left();
    const EpochOutcome outcome = step_epoch(assignments, profile_, rng_);
    const std::size_t k = profile_.size();
    clock_ += outcome.duration;

    std::vector<double> busy(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) busy[i] = assignments[i] > 0 ? outcome.duration : 0.0;
    m_.ledger.begin_epoch(assignments);
    m_.ledger.end_epoch(outcome.done, busy);

    m_.signals.push_back({ControlSignal::Kind::completion_flag, outcome.first_finisher,
                          outcome.done[outcome.first_finisher], 0, clock_});
    m_.signals.push_back({ControlSignal::Kind::stop_broadcast, 0, 0, 0, clock_});
    for (std::size_t i = 0; i < k; ++i) {
      m_.signals.push_back({ControlSignal::Kind::feedback, i, outcome.done[i],
                            m_.ledger[i].left_current, clock_});
    }

    IterationRecord r;
    r.index = m_.trace.size() + 1;
    r.kind = EpochKind::exchange;
    r.new_assignment = true;
    r.assignments = assignments;
    r.shipped = shipments(assignments, left_before);
    r.duration = outcome.duration;
    r.done = outcome.done;
    r.remaining_after = unassigned + m_.ledger.total_left();
    m_.trace.push_back(std::move(r));
    return m_.ledger.total_left();
  }

  // No more reassignment: place any unassigned points, then every worker runs
  // its queue to the end. The epoch lasts until the slowest one finishes.
  void drain(Count unassigned, std::span<const double> weights, std::optional<Count> storage) {
    const std::size_t k = profile_.size();
    const std::vector<Count> left_before = m_.ledger.left();
    std::vector<Count> topup(k, 0);
    if (unassigned > 0) {
      std::vector<Count> room(k, unassigned);
      if (storage) {
        for (std::size_t i = 0; i < k; ++i) room[i] = std::max(*storage - left_before[i], Count{0});
      }
      topup = capped_fill(unassigned, weights, std::move(room));
    }
    std::vector<Count> assignments(k);
    for (std::size_t i = 0; i < k; ++i) assignments[i] = left_before[i] + topup[i];
    if (sum(assignments) == 0) return;

    std::vector<double> finish(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      LazyTrace trace(assignments[i], profile_.rate(i));
      while (!trace.exhausted()) trace.next(rng_);
      finish[i] = trace.last_instant();
    }
    const double duration = *std::max_element(finish.begin(), finish.end());
    m_.ledger.begin_epoch(assignments);
    m_.ledger.end_epoch(assignments, finish);
    for (std::size_t i = 0; i < k; ++i) {
      if (assignments[i] == 0) continue;
      m_.signals.push_back(
          {ControlSignal::Kind::completion_flag, i, assignments[i], 0, clock_ + finish[i]});
      m_.signals.push_back({ControlSignal::Kind::feedback, i, assignments[i], 0, clock_ + finish[i]});
    }
    clock_ += duration;

    IterationRecord r;
    r.index = m_.trace.size() + 1;
    r.kind = EpochKind::drain;
    r.new_assignment = unassigned > 0;
    r.assignments = assignments;
    r.shipped = shipments(assignments, left_before);
    r.duration = duration;
    r.done = std::move(assignments);
    r.remaining_after = 0;
    m_.trace.push_back(std::move(r));
  }

 private:
  RunMetrics& m_;
  const HeterogeneityProfile& profile_;
  RandomStream& rng_;
  double clock_ = 0.0;
};

void check_threshold(Count threshold) {
  if (threshold < 0) throw std::invalid_argument("cutting threshold must be non-negative");
}

}  // namespace

RunMetrics run_exchange_known(Count n, const HeterogeneityProfile& profile, Count threshold,
                              RandomStream& rng) {
  check_n(n, profile);
  check_threshold(threshold);
  RunMetrics m = make_metrics(Scheme::exchange_known, n, profile, rng);
  ExchangeMaster master(m, profile, rng);

  Count remaining = n;
  bool assigned_once = false;
  while (remaining > threshold) {
    const std::vector<Count> assign = proportional_split(remaining, profile.rates());
    const Count after = master.exchange_epoch(assign, 0);
    if (after >= remaining) throw std::logic_error("exchange epoch made no progress");
    remaining = after;
    assigned_once = true;
  }
  master.drain(assigned_once ? 0 : n, profile.rates(), std::nullopt);
  finalize(m);
  return m;
}

RunMetrics run_exchange_unknown(Count n, const HeterogeneityProfile& profile, Count threshold,
                                RandomStream& rng) {
  check_n(n, profile);
  check_threshold(threshold);
  const std::size_t k = profile.size();
  const auto kk = static_cast<Count>(k);
  RunMetrics m = make_metrics(Scheme::exchange_unknown, n, profile, rng);
  ExchangeMaster master(m, profile, rng);

  // Storage per worker; ceil so that the initial even split fits.
  const Count storage = (n + kk - 1) / kk;
  // Inert on the first epoch: equal estimates give the even split.
  std::vector<double> estimate(k, 1.0);

  Count remaining = n;
  Count unassigned = n;
  while (remaining > threshold) {
    if (std::all_of(estimate.begin(), estimate.end(), [](double e) { return e <= 0.0; })) {
      throw std::logic_error("every estimated rate is zero");
    }
    std::vector<Count> assign = proportional_split(remaining, estimate);
    for (Count& a : assign) a = std::min(a, storage);
    unassigned = remaining - sum(assign);  // carried to the next epoch

    const Count before = remaining;
    remaining = unassigned + master.exchange_epoch(assign, unassigned);
    if (remaining >= before) throw std::logic_error("exchange epoch made no progress");

    const double t = master.elapsed();
    for (std::size_t i = 0; i < k; ++i) {
      estimate[i] = static_cast<double>(m.ledger[i].done_total) / t;
      m.ledger.set_estimated_rate(i, estimate[i]);
    }
  }
  master.drain(unassigned, estimate, storage);
  finalize(m);
  return m;
}

RunMetrics run_scheme(const ExperimentConfig& config, const HeterogeneityProfile& profile,
                      RandomStream& rng, const RunOptions& options) {
  config.validate();
  if (static_cast<std::size_t>(config.k) != profile.size()) {
    throw std::invalid_argument("config K does not match the profile size");
  }
  switch (config.scheme) {
    case Scheme::oracle: return run_oracle(config.n, profile, rng);
    case Scheme::fixed: return run_fixed(config.n, profile, rng);
    case Scheme::mds:
      if (!options.mds_l) throw std::invalid_argument("MDS scheme needs a code dimension L");
      return run_mds(config.n, *options.mds_l, profile, rng);
    case Scheme::exchange_known:
      return run_exchange_known(config.n, profile, config.cutting_threshold(), rng);
    case Scheme::exchange_unknown:
      return run_exchange_unknown(config.n, profile, config.cutting_threshold(), rng);
  }
  throw std::invalid_argument("unknown scheme");
}

}  // namespace wexch
