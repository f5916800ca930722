#pragma once

#include <cstdint>

namespace netsysid {

/// Partition of a length-T sample stream into N = floor(T/(B+u)) blocks of
/// S = B + u consecutive samples. Within a block, the last B+1 states (stream
/// indices S*t + u - 1 .. S*t + S - 1) form the B transition pairs replayed
/// newest-first; the u - 1 states before them act as a decorrelation gap.
/// Trailing T - N*S samples are discarded.
struct BufferLayout {
  long long horizon = 0;        // T
  long long update_count = 0;   // B
  long long gap = 0;            // u
  long long block = 0;          // S = B + u
  long long buffer_count = 0;   // N

  /// Index into the full stream of reverse-indexed state i of buffer t:
  /// x^{t}_{-i} = x_{S*t + (S-1) - i}.
  long long reverse_state_index(long long buffer, long long i) const {
    return block * buffer + (block - 1) - i;
  }
};

/// Validates and lays out buffers. Throws std::invalid_argument when
/// B < 1, u < 0, or the horizon is too short to fit one block.
BufferLayout plan_buffers(long long horizon, long long update_count, long long gap);

/// Gap width u = floor(sqrt(T / ln T)) used by the default presets.
long long default_gap(long long horizon);

/// Sample-count window floor(2 ln T) used for step-size radius estimation.
long long radius_window(long long horizon);

}  // namespace netsysid
