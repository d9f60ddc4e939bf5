// Trajectory simulation for one p-faulty searcher: the baseline zig-zag, its
// deterministic start (exponent 0, heading right) and the randomized start
// (uniform exponent offset, uniform initial direction).

#pragma once

#include <optional>
#include <vector>

#include "faultsearch/core.hpp"
#include "faultsearch/montecarlo.hpp"

namespace faultsearch {

/// Where the target sits: distance from the origin and side.
struct TargetPlacement {
  double magnitude = 1.0;
  Direction side = Direction::Right;

  double position() const { return sign(side) * magnitude; }
  static TargetPlacement at(double signed_position);
};

/// n = g^(t + delta) with integer t >= 0 and delta in (0, 1].
struct IntervalIndex {
  int t = 0;
  double delta = 1.0;
};

/// Requires n > 1 and g > 1. Snaps to the exact power when n is within a few
/// ulps of g^k so that n = g^(t+1) decomposes as (t, 1), not (t+1, ~0).
IntervalIndex decompose(double n, double g);

/// Inverse of decompose.
double target_distance(double g, int t, double delta);

struct SearchParams {
  double g = 2.0;
  FaultProb p{0.0};
  double start_exponent = 0.0;
  Direction start_direction = Direction::Right;
};

struct SimOutcome {
  double termination_time = 0.0;
  std::vector<Leg> legs;
  bool truncated = false;
  int turn_attempts = 0;
};

/// Consecutive failures tolerated before a trial is cut off:
/// ceil(ln(1e-12) / ln p), so the cut-off mass is below 1e-12.
int default_fail_cap(double p);

/// Zig-zag with intended turning points d*g^i, d*g^(i+1), ... The agent learns
/// that a turn failed only when g^i time passes without seeing the origin.
SimOutcome baseline_search(const SearchParams& params, const TargetPlacement& target,
                           RandomStream& rng, int fail_cap);

SimOutcome deterministic_search(double g, FaultProb p, const TargetPlacement& target,
                                RandomStream& rng, int fail_cap);

/// Overrides for the two random choices of the randomized start. A forced value
/// consumes no draw.
struct RandomizedChoices {
  std::optional<double> epsilon;
  std::optional<Direction> direction;
};

/// Draws epsilon ~ U[0,1) and then the initial direction bit (unless forced)
/// and runs the baseline search from exponent epsilon.
SimOutcome randomized_search(double g, FaultProb p, const TargetPlacement& target,
                             RandomStream& rng, int fail_cap,
                             const RandomizedChoices& forced = {});

enum class SearchAlgorithm { Deterministic, Randomized };

struct ProfileCell {
  int t = 0;
  double delta = 0.0;
  double n = 0.0;
  double ratio = 0.0;         // mean termination time / n
  double ratio_stderr = 0.0;
  std::uint64_t n_truncated = 0;
};

/// Monte Carlo estimate of E[T]/n for targets at +g^(t+delta), t = 0..t_max.
/// Cell (t, j) uses master seed derive_trial_seed(master_seed, t*|grid| + j).
std::vector<ProfileCell> estimate_cr_profile(SearchAlgorithm algorithm, double g, FaultProb p,
                                             int t_max, const std::vector<double>& delta_grid,
                                             std::uint64_t trials, std::uint64_t master_seed,
                                             unsigned parallelism = 0);

}  // namespace faultsearch
