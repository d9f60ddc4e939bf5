// Two p-faulty agents: forced turns, the turn simulation that makes a pair
// behave like one fault-free searcher, the zig-zags built on it, and the
// wireless protocol.

#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "faultsearch/core.hpp"
#include "faultsearch/single_search.hpp"

namespace faultsearch {

enum class Comm { Wireless, FaceToFace };

struct TwoAgentConfig {
  FaultProb p{0.0};
  double gamma = 1e-3;
  double gamma_decay = 0.5;
  std::optional<double> follower_speed;  // defaults to wireless_speed(p)
  Comm comm = Comm::FaceToFace;
  int attempt_cap = 0;  // 0: default_fail_cap(p)

  void validate() const;
  double speed() const;
};

struct TurnRecord {
  double intended_point = 0.0;
  double realized_point = 0.0;  // where the pair is together again
  double elapsed = 0.0;         // from the first turn attempt to the meeting
  int attempts = 0;
  double delay = 0.0;           // lateness against a perfect turn at intended_point
  double lead_in = 0.0;         // simulated_turn: arrival at intended - 2 gamma to first attempt
  bool truncated = false;
  AgentState leader;            // leader state at the meeting, direction certified
};

/// A fixed reference point the leader must get back to.
struct ImmobileFollower {
  double position = 0.0;
};

using Follower = std::variant<AgentState, ImmobileFollower>;

/// Leader's side of the forced turn: repeat {attempt turn; move} until the
/// follower is met.
///   mobile follower: moves last `gamma` each round while the follower keeps
///     its own direction and speed; the leader sees the follower only when
///     they are collocated.
///   immobile follower: the leader starts `gamma` past the point; it moves w
///     per round with w = gamma, 2 gamma, 4 gamma, ...
TurnRecord force_change_direction(const AgentState& leader, const Follower& follower, double gamma,
                                  FaultProb p, RandomStream& rng, int attempt_cap = 0);

/// Where the leader's run through the turn met the target, if it did.
struct TargetSighting {
  double time = 0.0;               // since the pair reached intended - 2 gamma
  double follower_position = 0.0;  // follower at that instant
};

/// The pair arrives together at intended_point - 2 gamma heading `heading`.
/// The follower slows so that when the gap is 2 gamma the leader is
/// (1-2p) gamma / (1-p) past the point and the follower gamma / (1-p) before
/// it; then the leader forces a turn against the mobile follower. Realized
/// point: intended - p gamma/(1-p) + i gamma after i failures, mean intended.
TurnRecord simulated_turn(double intended_point, Direction heading, double gamma, FaultProb p,
                          RandomStream& rng, int attempt_cap = 0);

/// Same, watching for a target: returns the sighting instead of finishing the
/// turn when the leader crosses `target` first.
TurnRecord simulated_turn(double intended_point, Direction heading, double gamma, FaultProb p,
                          RandomStream& rng, int attempt_cap, double target,
                          std::optional<TargetSighting>& sighting);

struct TwoAgentOutcome {
  double termination_time = 0.0;  // both agents have reached the target
  bool truncated = false;
  int turn_attempts = 0;
  std::vector<Leg> leader_legs;
  std::vector<Leg> follower_legs;
  std::vector<TurnRecord> turns;
  double protocol_overhead = 0.0;  // sum of turn elapsed times
  double harvest_time = 0.0;       // randomized composition only
  double epsilon = 0.0;
  Direction direction = Direction::Right;
};

/// Pair zig-zag with turning points dir * g^(i+eps), turn i simulated with
/// gamma_i = gamma0 * decay^i.
TwoAgentOutcome two_agent_zigzag(const TargetPlacement& target, double g, double eps, Direction dir,
                                 FaultProb p, double gamma0, double gamma_decay, RandomStream& rng,
                                 int attempt_cap = 0);

/// g = 2, eps = 0, starting right.
TwoAgentOutcome simulate_two_agent_zigzag(const TargetPlacement& target, FaultProb p, double gamma0,
                                          double gamma_decay, RandomStream& rng, int attempt_cap = 0);

struct TwoAgentRandomizedOptions {
  double g = 0.0;             // 0: 1/W(1/e)
  double zeta = 1e-12;        // first harvesting step
  double tolerance = 1e-3;    // amplifier bias target
  std::optional<double> epsilon;        // forced values skip harvesting
  std::optional<Direction> direction;
};

/// The leader harvests bit_budget + 1 bits next to the waiting follower, walks
/// back to it, and the pair runs the zig-zag from exponent eps.
TwoAgentOutcome simulate_two_agent_randomized(const TargetPlacement& target, FaultProb p, double gamma0,
                                              double gamma_decay, int bit_budget, RandomStream& rng,
                                              const TwoAgentRandomizedOptions& opts = {});

struct WirelessOutcome {
  double termination_time = 0.0;  // both agents have visited the target
  double ratio = 0.0;
  bool success_branch = true;     // the non-finder's single turn succeeded
  double W = 0.0;                 // finder: first target visit to certified turn at the target
  double T = 0.0;                 // leader: meeting to certified turn at the follower
  int W_attempts = 0;
  int T_attempts = 0;
  double meeting_point = 0.0;
  bool nonfinder_reached_first = false;  // the non-finder got to the target before any meeting
  bool truncated = false;
  std::vector<Leg> finder_legs;
  std::vector<Leg> nonfinder_legs;
};

/// Wireless two-agent search with a slow non-finder.
WirelessOutcome wireless_search(const TargetPlacement& target, const TwoAgentConfig& cfg, RandomStream& rng);

}  // namespace faultsearch
