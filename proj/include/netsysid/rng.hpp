#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace netsysid {

/// Purpose tags separating the independent random streams of one run.
enum class StreamPurpose : std::uint64_t {
  noise = 1,
  initial_state = 2,
  stationary_sample = 3,
  coupled_start = 4,
  orthogonal_factor = 5,
  replica = 6,
};

/// Counter-based generator: output i of a stream is a pure function of
/// (seed, agent, purpose, i). Streams never share state, so any parallel
/// schedule reproduces the serial run bit for bit. The word function is
/// the splitmix64 finalizer over a key-offset counter.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t agent, StreamPurpose purpose);

  std::uint64_t next_u64();

  /// Uniform in (0,1); derived from the top 53 bits, never exactly 0.
  double next_unit();

  /// Standard normal via Box-Muller. Consumes exactly two words per call
  /// (no spare caching), keeping the counter advance schedule fixed.
  double next_normal();

  void fill_normal(std::span<double> out);

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace netsysid
