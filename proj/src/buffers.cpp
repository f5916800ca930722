#include "netsysid/buffers.hpp"

#include <cmath>
#include <stdexcept>

namespace netsysid {

BufferLayout plan_buffers(long long horizon, long long update_count, long long gap) {
  if (update_count < 1) throw std::invalid_argument("plan_buffers: update count must be >= 1");
  if (gap < 0) throw std::invalid_argument("plan_buffers: gap must be >= 0");
  long long block = update_count + gap;
  if (block < 2) throw std::invalid_argument("plan_buffers: block must cover >= 2 samples");
  if (horizon < block) throw std::invalid_argument("plan_buffers: horizon too short");
  BufferLayout layout;
  layout.horizon = horizon;
  layout.update_count = update_count;
  layout.gap = gap;
  layout.block = block;
  layout.buffer_count = horizon / block;
  return layout;
}

long long default_gap(long long horizon) {
  if (horizon < 2) throw std::invalid_argument("default_gap: horizon must be >= 2");
  double t = double(horizon);
  return (long long)(std::floor(std::sqrt(t / std::log(t))));
}

long long radius_window(long long horizon) {
  if (horizon < 2) throw std::invalid_argument("radius_window: horizon must be >= 2");
  return (long long)(std::floor(2.0 * std::log(double(horizon))));
}

}  // namespace netsysid
