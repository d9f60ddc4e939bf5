// Kinematics on the line, the faulty-turn primitive and the seeded random
// stream shared by every simulation.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace faultsearch {

/// Probability that a single turn attempt fails. In [0, 1]; p = 1 is accepted
/// for the turn primitive only, every search requires p < 1/2.
class FaultProb {
 public:
  explicit FaultProb(double p);

  double value() const { return p_; }
  operator double() const { return p_; }

  /// Throws unless p < 1/2 (finite expected search time).
  void require_finite_search(const char* who) const;

 private:
  double p_;
};

enum class Direction : int { Left = -1, Right = 1 };

constexpr Direction operator-(Direction d) {
  return d == Direction::Right ? Direction::Left : Direction::Right;
}

constexpr double sign(Direction d) { return static_cast<double>(static_cast<int>(d)); }

inline const char* to_string(Direction d) { return d == Direction::Right ? "right" : "left"; }

struct AgentState {
  double position = 0.0;
  Direction direction = Direction::Right;
  double speed = 1.0;  // in (0, 1]; protocols may park an agent with a zero-speed leg
};

/// One straight piece of a trajectory. Zero-speed legs model waiting.
struct Leg {
  double start = 0.0;
  double end = 0.0;
  double speed = 1.0;
  double duration = 0.0;
};

/// xoshiro256** seeded through splitmix64. Every draw is derived from the raw
/// 64-bit output, so the sequence is identical on every platform.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform01();
  /// True with probability q.
  bool bernoulli(double q) { return uniform01() < q; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draws() const { return draws_; }

 private:
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
  std::array<std::uint64_t, 4> s_{};
};

/// splitmix64 finalizer (a bijection on 64-bit words).
std::uint64_t mix64(std::uint64_t x);

/// Seed for trial `trial_index` of a run keyed by `master_seed`. Bijective in the
/// trial index for a fixed master seed and independent of scheduling.
std::uint64_t derive_trial_seed(std::uint64_t master_seed, std::uint64_t trial_index);

struct TurnResult {
  AgentState state;
  bool success;  // harness-side only; agent programs must not branch on it
};

/// Tries to reverse direction. Fails with probability p, leaving the state as is.
/// Consumes exactly one uniform draw.
TurnResult attempt_turn(const AgentState& state, FaultProb p, RandomStream& rng);

/// Moves the agent along its direction for `duration` time units.
AgentState advance(const AgentState& state, double duration);

/// Time at which a unit moving from `from` to `to` at `speed` passes over
/// `target`, or nothing if the target is outside the closed segment.
std::optional<double> leg_crossing_time(double from, double to, double speed, double target);

}  // namespace faultsearch
