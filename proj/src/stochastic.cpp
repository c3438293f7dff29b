#include "wexch/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wexch {

double RandomStream::standard_normal() {
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

void check_rate(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw std::invalid_argument("rate must be positive and finite");
  }
}

// Marsaglia & Tsang (2000), shape >= 1, unit scale.
double sample_gamma(double shape, RandomStream& rng) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = rng.standard_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

double sample_exponential(double rate, RandomStream& rng) {
  check_rate(rate);
  return -std::log(rng.uniform_open()) / rate;
}

double sample_erlang(Count m, double rate, RandomStream& rng) {
  check_rate(rate);
  if (m < 0) throw std::invalid_argument("Erlang shape must be non-negative");
  if (m == 0) return 0.0;
  if (m <= kErlangDirectSumLimit) {
    double t = 0.0;
    for (Count i = 0; i < m; ++i) t += sample_exponential(rate, rng);
    return t;
  }
  return sample_gamma(static_cast<double>(m), rng) / rate;
}

WorkerTrace generate_trace(Count m, double rate, RandomStream& rng) {
  check_rate(rate);
  if (m < 0) throw std::invalid_argument("assignment must be non-negative");
  WorkerTrace trace{m, rate, {}};
  trace.instants.reserve(static_cast<std::size_t>(m));
  LazyTrace lazy(m, rate);
  while (!lazy.exhausted()) trace.instants.push_back(lazy.next(rng));
  return trace;
}

Count count_done_by(const WorkerTrace& trace, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("time must be non-negative");
  const auto it = std::upper_bound(trace.instants.begin(), trace.instants.end(), t);
  return static_cast<Count>(it - trace.instants.begin());
}

}  // namespace wexch
