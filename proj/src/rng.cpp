#include "netsysid/rng.hpp"

#include <cmath>
#include <numbers>

namespace netsysid {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t finalize(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t agent, StreamPurpose purpose) {
  // Chain the finalizer over the key triple so nearby (seed, agent,
  // purpose) combinations land on unrelated counter offsets.
  std::uint64_t k = finalize(seed + kGamma);
  k = finalize(k ^ (agent + kGamma));
  k = finalize(k ^ (static_cast<std::uint64_t>(purpose) + kGamma));
  key_ = k;
}

std::uint64_t RngStream::next_u64() {
  return finalize(key_ + (counter_++) * kGamma);
}

double RngStream::next_unit() {
  // 53-bit mantissa, shifted into (0,1]; flip to keep log() finite.
  double u = double((next_u64() >> 11) + 1) * 0x1.0p-53;
  return u;
}

double RngStream::next_normal() {
  double u1 = next_unit();
  double u2 = next_unit();
  double r = std::sqrt(-2.0 * std::log(u1));
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

void RngStream::fill_normal(std::span<double> out) {
  for (double& v : out) v = next_normal();
}

}  // namespace netsysid
