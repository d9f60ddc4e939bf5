// Random bits from faulty turns, and a deterministic agent that uses them to
// run the randomized search.
//
// Bit convention: an amplified turn that brings the agent back to the origin
// records 0, one that does not records 1. P(bit = 1) = q_k.

#pragma once

#include <cstdint>
#include <vector>

#include "faultsearch/core.hpp"
#include "faultsearch/single_search.hpp"

namespace faultsearch {

/// Probability that k chained in-place attempts leave the direction unchanged.
double amplify_q(double p, int k);

struct AmplifierPlan {
  double p = 0.0;
  int k = 1;
  double q_k = 0.0;
  double bias() const;  // |q_k - 1/2|
};

/// Smallest k with |2p - 1|^k / 2 <= tolerance.
AmplifierPlan plan_amplifier(double p, double tolerance);

/// k in-place turn attempts. Returns the new state; the direction is the
/// original one iff an even number of attempts succeeded.
AgentState amplified_turn(const AgentState& state, FaultProb p, int k, RandomStream& rng,
                          int* attempts = nullptr);

struct HarvestReport {
  std::vector<int> bits;
  double elapsed = 0.0;
  double max_excursion = 0.0;
  double final_distance = 0.0;  // distance from the origin when the last bit is recorded
  AgentState final_state;
  double per_bit_bias = 0.5;  // |q_k - 1/2|
  int turn_attempts = 0;
  std::vector<Leg> legs;
};

/// Collects n_bits bits starting at the origin. At the origin the agent walks
/// zeta out, makes an amplified attempt and walks zeta: seeing the origin gives
/// 0, otherwise 1 with the agent 2 zeta out. At distance w > 0 it makes an
/// amplified attempt and walks w: the origin gives 0, otherwise 1 at 2w.
/// The excursion never exceeds 2^n_bits zeta.
HarvestReport harvest_bits(FaultProb p, int n_bits, double zeta, RandomStream& rng, int k = 1,
                           Direction first_direction = Direction::Right);

struct ReturnReport {
  double elapsed = 0.0;
  int attempts = 0;
  bool returned = false;
  double final_distance = 0.0;
  std::vector<Leg> legs;
};

/// From distance w, heading away from the origin: attempt, walk w; the origin
/// appears iff the turn succeeded, otherwise the agent is at 2w and repeats.
/// Gives up (returned = false) after `attempt_cap` attempts.
ReturnReport return_to_origin(FaultProb p, double w, RandomStream& rng, int attempt_cap = 1 << 20,
                              double position_sign = 1.0);

/// sum_j b_j 2^-(j+1)
double uniform_from_bits(const std::vector<int>& bits);

struct HarvestedSearchConfig {
  double g = 2.0;
  int n_bits = 32;          // bits for epsilon; one more bit picks the direction
  double zeta = 1e-12;      // first harvest step
  double tolerance = 1e-3;  // per-bit bias target for the amplifier
  int fail_cap = 0;         // 0: default_fail_cap(p)
};

struct HarvestedSearchOutcome {
  SimOutcome search;          // whole run, clock starts before harvesting
  double epsilon = 0.0;
  Direction direction = Direction::Right;
  double harvest_time = 0.0;  // harvesting plus the walk back to the origin
  double max_excursion = 0.0;
  bool fallback = false;      // the return gave up and the deterministic search ran instead
  bool found_while_harvesting = false;
};

/// Attempts needed before the return is declared lost: smallest l with p^l < 1e-9.
int fallback_attempts(double p);

/// A deterministic p-faulty agent that harvests its own randomness and then
/// runs the randomized search with the harvested (epsilon, direction).
HarvestedSearchOutcome harvested_randomized_search(const HarvestedSearchConfig& cfg, FaultProb p,
                                                   const TargetPlacement& target, RandomStream& rng);

}  // namespace faultsearch
