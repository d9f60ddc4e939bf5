#include "faultsearch/core.hpp"

#include <algorithm>
#include <cmath>

namespace faultsearch {

FaultProb::FaultProb(double p) : p_(p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("fault probability must lie in [0, 1], got " + std::to_string(p));
  }
}

void FaultProb::require_finite_search(const char* who) const {
  if (!(p_ < 0.5)) {
    throw std::invalid_argument(std::string(who) + ": requires p < 1/2, got " + std::to_string(p_));
  }
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed) {
  std::uint64_t sm = seed;
  for (auto& word : s_) {
    sm += kGolden;
    word = mix64(sm);
  }
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t RandomStream::next_u64() {
  ++draws_;
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RandomStream::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t derive_trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
  // Odd multiplier keeps the map injective in trial_index; mix64 is a bijection.
  return mix64(mix64(master_seed) + kGolden * (trial_index + 1));
}

TurnResult attempt_turn(const AgentState& state, FaultProb p, RandomStream& rng) {
  const bool failed = rng.bernoulli(p.value());
  TurnResult out{state, !failed};
  if (!failed) out.state.direction = -state.direction;
  return out;
}

AgentState advance(const AgentState& state, double duration) {
  if (!(duration >= 0.0)) throw std::invalid_argument("advance: negative duration");
  AgentState out = state;
  out.position += sign(state.direction) * state.speed * duration;
  return out;
}

std::optional<double> leg_crossing_time(double from, double to, double speed, double target) {
  if (!(speed > 0.0)) throw std::invalid_argument("leg_crossing_time: speed must be positive");
  const double lo = std::min(from, to);
  const double hi = std::max(from, to);
  if (target < lo || target > hi) return std::nullopt;
  return std::abs(target - from) / speed;
}

}  // namespace faultsearch
