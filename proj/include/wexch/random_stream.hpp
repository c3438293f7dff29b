#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace wexch {

/// SplitMix64 finalizer. Used for seed derivation only, never as a generator.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derive a child seed from a base seed and a list of counters.
///
/// Each counter is folded in with a SplitMix64 round, so the result depends on
/// the position of every counter. Callers use stable tags (scheme id, grid
/// value bits) rather than loop indices where order independence matters.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> counters) noexcept {
  std::uint64_t s = splitmix64(base);
  for (std::uint64_t c : counters) s = splitmix64(s ^ splitmix64(c + 0x632BE59BD9B4E019ULL));
  return s;
}

/// A seedable random stream identified by (seed, stream id).
///
/// Backed by std::mt19937_64, whose output sequence is fully specified by the
/// standard, so a given (seed, stream id) pair reproduces bit-identical
/// variates on every conforming implementation. The engine is seeded with a
/// SplitMix64 mix of both identifiers; distinct stream ids give unrelated
/// engine states. All real-valued variates are produced by this class from raw
/// 64-bit words (no std::*_distribution), so they are implementation-independent
/// up to libm rounding.
class RandomStream {
 public:
  static constexpr std::string_view kGeneratorName = "mt19937_64+splitmix64-streams/v1";

  explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id), engine_(mix(seed, stream_id)) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_open(); }

  /// Standard normal via Box-Muller. Consumes two words per call.
  double standard_normal();

  /// A fresh stream for a sub-task, reproducibly derived from this one's ids.
  RandomStream split(std::uint64_t child_id) const {
    return RandomStream(derive_seed(seed_, {stream_id_, child_id}), 0);
  }

 private:
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream_id) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(~stream_id));
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace wexch
