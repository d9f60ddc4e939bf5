#include "faultsearch/single_search.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace faultsearch {

TargetPlacement TargetPlacement::at(double signed_position) {
  if (signed_position == 0.0 || !std::isfinite(signed_position)) {
    throw std::invalid_argument("target must be a finite nonzero position");
  }
  return TargetPlacement{std::abs(signed_position),
                         signed_position > 0 ? Direction::Right : Direction::Left};
}

IntervalIndex decompose(double n, double g) {
  if (!(g > 1.0)) throw std::invalid_argument("decompose: g must exceed 1");
  if (!(n > 1.0)) throw std::invalid_argument("decompose: n must exceed 1");
  double x = std::log(n) / std::log(g);
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-12 * std::max(1.0, std::abs(x))) x = nearest;
  const int t = static_cast<int>(std::ceil(x)) - 1;
  return IntervalIndex{std::max(t, 0), x - std::max(t, 0)};
}

double target_distance(double g, int t, double delta) {
  return std::pow(g, static_cast<double>(t) + delta);
}

int default_fail_cap(double p) {
  if (p <= 0.0) return 1;
  if (p >= 1.0) return std::numeric_limits<int>::max();
  return std::max(1, static_cast<int>(std::ceil(std::log(1e-12) / std::log(p))));
}

namespace {

// Appends straight legs at unit speed and stops at the first target crossing.
class UnitWalker {
 public:
  UnitWalker(double target, SimOutcome& out) : target_(target), out_(out) {}

  // Returns true when the target is reached on this leg.
  bool walk_to(double to) {
    if (to == pos_) return pos_ == target_;
    if (auto hit = leg_crossing_time(pos_, to, 1.0, target_)) {
      out_.legs.push_back({pos_, target_, 1.0, *hit});
      out_.termination_time += *hit;
      pos_ = target_;
      return true;
    }
    const double d = std::abs(to - pos_);
    out_.legs.push_back({pos_, to, 1.0, d});
    out_.termination_time += d;
    pos_ = to;
    return false;
  }

 private:
  double pos_ = 0.0;
  double target_;
  SimOutcome& out_;
};

}  // namespace

SimOutcome baseline_search(const SearchParams& params, const TargetPlacement& target,
                           RandomStream& rng, int fail_cap) {
  if (!(params.g >= 2.0)) {
    throw std::invalid_argument("baseline_search: g >= 2 is required to detect failed turns");
  }
  if (fail_cap < 1) throw std::invalid_argument("baseline_search: fail_cap must be >= 1");
  if (!(target.magnitude > 0.0)) throw std::invalid_argument("baseline_search: target at origin");

  SimOutcome out;
  out.legs.reserve(32);
  UnitWalker walker(target.position(), out);
  const double g = params.g;

  AgentState agent{0.0, params.start_direction, 1.0};
  double exponent = params.start_exponent;

  // Each pass of this loop starts at the origin with a fresh outward sweep.
  for (;;) {
    if (walker.walk_to(sign(agent.direction) * std::pow(g, exponent))) return out;

    int consecutive_failures = 0;
    for (;;) {
      ++out.turn_attempts;
      const TurnResult turn = attempt_turn(agent, params.p, rng);
      agent = turn.state;
      exponent += 1.0;
      if (turn.success) {
        // The origin shows up after g^(i-1) <= g^i - g^(i-1) time.
        if (walker.walk_to(0.0)) return out;
        break;
      }
      if (++consecutive_failures > fail_cap) {
        out.truncated = true;
        return out;
      }
      // No origin after g^(i-1) time: the turn failed, keep going outward.
      if (walker.walk_to(sign(agent.direction) * std::pow(g, exponent))) return out;
    }
  }
}

SimOutcome deterministic_search(double g, FaultProb p, const TargetPlacement& target,
                                RandomStream& rng, int fail_cap) {
  if (!(p.value() > 0.0)) throw std::invalid_argument("deterministic_search: requires p > 0");
  p.require_finite_search("deterministic_search");
  if (!(g >= 2.0 && g * p.value() <= 1.0)) {
    throw std::invalid_argument("deterministic_search: requires 2 <= g <= 1/p");
  }
  return baseline_search(SearchParams{g, p, 0.0, Direction::Right}, target, rng, fail_cap);
}

SimOutcome randomized_search(double g, FaultProb p, const TargetPlacement& target,
                             RandomStream& rng, int fail_cap, const RandomizedChoices& forced) {
  if (!(p.value() > 0.0)) throw std::invalid_argument("randomized_search: requires p > 0");
  p.require_finite_search("randomized_search");
  if (!(g >= 2.0)) throw std::invalid_argument("randomized_search: requires g >= 2");
  const double eps = forced.epsilon ? *forced.epsilon : rng.uniform01();
  if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("randomized_search: epsilon in [0,1)");
  const Direction dir = forced.direction
                            ? *forced.direction
                            : (rng.bernoulli(0.5) ? Direction::Right : Direction::Left);
  return baseline_search(SearchParams{g, p, eps, dir}, target, rng, fail_cap);
}

std::vector<ProfileCell> estimate_cr_profile(SearchAlgorithm algorithm, double g, FaultProb p,
                                             int t_max, const std::vector<double>& delta_grid,
                                             std::uint64_t trials, std::uint64_t master_seed,
                                             unsigned parallelism) {
  if (delta_grid.empty()) throw std::invalid_argument("estimate_cr_profile: empty delta grid");
  if (t_max < 0) throw std::invalid_argument("estimate_cr_profile: t_max must be >= 0");
  if (trials < 1) throw std::invalid_argument("estimate_cr_profile: trials must be >= 1");
  for (double d : delta_grid) {
    if (!(d > 0.0 && d <= 1.0)) throw std::invalid_argument("estimate_cr_profile: delta in (0,1]");
  }
  const int cap = default_fail_cap(p.value());
  std::vector<ProfileCell> cells;
  for (int t = 0; t <= t_max; ++t) {
    for (std::size_t j = 0; j < delta_grid.size(); ++j) {
      const double n = target_distance(g, t, delta_grid[j]);
      const TargetPlacement target{n, Direction::Right};
      const std::uint64_t seed =
          derive_trial_seed(master_seed, static_cast<std::uint64_t>(t) * delta_grid.size() + j);
      const Estimate e = run_monte_carlo(trials, seed, parallelism, [&](std::uint64_t, RandomStream& rng) {
        const SimOutcome o = algorithm == SearchAlgorithm::Deterministic
                                 ? deterministic_search(g, p, target, rng, cap)
                                 : randomized_search(g, p, target, rng, cap);
        return TrialValue{o.termination_time, o.truncated};
      });
      cells.push_back({t, delta_grid[j], n, e.mean / n, e.stderr_ / n, e.n_truncated});
    }
  }
  return cells;
}

}  // namespace faultsearch
