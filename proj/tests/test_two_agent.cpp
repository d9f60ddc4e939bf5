#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "faultsearch/analysis.hpp"
#include "faultsearch/two_agent.hpp"
#include "oracles.hpp"

using namespace faultsearch;

namespace {

struct Moments {
  MomentAccumulator a;
  void add(double x) { a.add(x); }
  bool near(double expect, double k = 3.0) const { return std::abs(a.mean() - expect) <= k * a.stderr_of_mean(); }
};

// Wireless termination time rebuilt from (W, T, branch) by hand kinematics.
double wireless_replay(double s, double n, double W, double T, bool success) {
  if (success) {
    if (2 * n / s <= W) return n + 2 * n / s;
    const double gap = 2 * n - s * W;          // non-finder has walked sW towards the target
    const double meet = gap / (1 + s);         // finder's walk to the meeting point
    return n + W + meet + T + meet;
  }
  const double gap = 2 * n + s * W;
  const double meet = gap / (1 - s);
  return n + W + meet + T + meet;
}

}  // namespace

TEST_CASE("forced turn with a mobile follower, no faults") {
  RandomStream rng(1);
  const double gamma = 0.01;
  const TurnRecord r = force_change_direction(AgentState{gamma, Direction::Right, 1.0},
                                              AgentState{-gamma, Direction::Right, 1.0}, gamma, FaultProb(0.0), rng);
  CHECK(r.attempts == 1);
  CHECK(r.elapsed == doctest::Approx(gamma));
  CHECK(r.realized_point == doctest::Approx(0.0));
  CHECK(r.leader.direction == Direction::Left);
}

TEST_CASE("forced turn against an immobile point: geometric attempts") {
  for (double p : {0.3, 0.5}) {
    Moments att, el;
    RandomStream rng(static_cast<std::uint64_t>(p * 100));
    for (int i = 0; i < 1000000; ++i) {
      const TurnRecord r = force_change_direction(AgentState{1.0 + 0.25, Direction::Right, 1.0}, ImmobileFollower{1.0},
                                                  0.25, FaultProb(p), rng);
      REQUIRE_FALSE(r.truncated);
      CHECK(r.realized_point == 1.0);
      // J failures then success: gamma (2^(J+1) - 1)
      REQUIRE(r.elapsed == 0.25 * (std::pow(2.0, r.attempts) - 1));
      att.add(r.attempts);
    }
    CHECK(att.near(1 / (1 - p)));
  }
  RandomStream rng(2);
  CHECK_THROWS(force_change_direction(AgentState{1.5, Direction::Right, 1.0}, ImmobileFollower{1.0}, 0.25, FaultProb(0.3), rng));
  CHECK_THROWS(force_change_direction(AgentState{1.25, Direction::Left, 1.0}, ImmobileFollower{1.0}, 0.25, FaultProb(0.3), rng));
  CHECK_THROWS(force_change_direction(AgentState{1.25, Direction::Right, 1.0}, ImmobileFollower{1.0}, 0.0, FaultProb(0.3), rng));
}

TEST_CASE("simulated turn, no faults") {
  RandomStream rng(1);
  const TurnRecord r = simulated_turn(7.0, Direction::Left, 1e-3, FaultProb(0.0), rng);
  CHECK(r.attempts == 1);
  CHECK(r.realized_point == 7.0);
  CHECK(r.elapsed == doctest::Approx(1e-3));
  CHECK(r.delay == doctest::Approx(2e-3));
  CHECK(r.leader.direction == Direction::Right);
  CHECK_THROWS(simulated_turn(7.0, Direction::Left, 0.0, FaultProb(0.1), rng));
}

TEST_CASE("simulated turn: unbiased turning point, meeting time, delay") {
  for (double p : {0.1, 0.2, 0.3}) {
    const double gamma = 1e-3;
    Moments dev, el, delay;
    RandomStream rng(static_cast<std::uint64_t>(p * 1000));
    for (int i = 0; i < 1000000; ++i) {
      const TurnRecord r = simulated_turn(5.0, Direction::Right, gamma, FaultProb(p), rng);
      REQUIRE_FALSE(r.truncated);
      const int fails = r.attempts - 1;
      // realized point and elapsed time follow from the failure count alone
      REQUIRE(std::abs(r.realized_point - (5.0 - p * gamma / (1 - p) + fails * gamma)) <= 1e-12);
      REQUIRE(std::abs(r.elapsed - r.attempts * gamma) <= 1e-15);
      CHECK(std::abs(r.realized_point - r.intended_point) <= 2 * r.attempts * gamma);
      dev.add(r.realized_point - r.intended_point);
      el.add(r.elapsed);
      delay.add(r.delay);
    }
    CHECK(dev.near(0.0));
    CHECK(el.near(gamma / (1 - p)));
    CHECK(delay.near(2 * gamma));
  }
}

TEST_CASE("simulated turn: deviation spread scales with gamma") {
  auto sd = [](double gamma) {
    MomentAccumulator m;
    RandomStream rng(99);
    for (int i = 0; i < 1000000; ++i) m.add(simulated_turn(0.0, Direction::Right, gamma, FaultProb(0.2), rng).realized_point);
    return std::sqrt(m.variance());
  };
  const double r = sd(2e-3) / sd(1e-3);
  CHECK(r >= 1.8);
  CHECK(r <= 2.2);
  // sd of the failure count of a geometric trial: sqrt(p)/(1-p)
  CHECK(sd(1e-3) == doctest::Approx(1e-3 * std::sqrt(0.2) / 0.8).epsilon(0.01));
}

TEST_CASE("pair zig-zag without faults") {
  RandomStream rng(1);
  const double g0 = 1e-4;
  const TwoAgentOutcome o = simulate_two_agent_zigzag(TargetPlacement::at(5.0), FaultProb(0.0), g0, 0.5, rng);
  // turns at 1, -2, 4, -8, each 2 gamma late
  CHECK(o.termination_time == doctest::Approx(35.0 + 2 * (g0 + g0 / 2 + g0 / 4 + g0 / 8)).epsilon(1e-12));
  CHECK(o.turns.size() == 4);
  CHECK(oracle::fault_free_time(2.0, 5.0, 0.0, 1) == 35.0);
  CHECK_THROWS(simulate_two_agent_zigzag(TargetPlacement::at(5.0), FaultProb(0.5), g0, 0.5, rng));
  CHECK_THROWS(simulate_two_agent_zigzag(TargetPlacement::at(5.0), FaultProb(0.1), 0.3, 0.5, rng));
  CHECK_THROWS(simulate_two_agent_zigzag(TargetPlacement::at(5.0), FaultProb(0.1), 1e-3, 1.0, rng));
}

TEST_CASE("pair zig-zag: target inside a turn zone") {
  // the target sits just past an intended turning point; the leader reaches it
  // and the follower walks on to it
  RandomStream rng(3);
  const double gamma = 1e-2;
  const TwoAgentOutcome o = simulate_two_agent_zigzag(TargetPlacement::at(1.005), FaultProb(0.0), gamma, 0.5, rng);
  // pair to 1 - 2 gamma, leader on to the target; follower runs at
  // (2 gamma - gamma) / (3 gamma) = 1/3 until then, then at full speed
  const double hit = 2 * gamma + 0.005;
  const double f = 1 - 2 * gamma + hit / 3;
  CHECK(o.termination_time == doctest::Approx(1 - 2 * gamma + hit + (1.005 - f)).epsilon(1e-12));
}

TEST_CASE("pair zig-zag: overhead and ratio") {
  const double p = 0.2, g0 = 1e-3, decay = 0.5;
  MomentAccumulator overhead;
  double worst = 0;
  RandomStream rng(5);
  for (int i = 0; i < 20000; ++i) {
    const double n = std::pow(2.0, 6 + (i % 10) / 10.0 + 0.01);
    const TwoAgentOutcome o = simulate_two_agent_zigzag(TargetPlacement::at(i % 2 ? n : -n), FaultProb(p), g0, decay, rng);
    REQUIRE_FALSE(o.truncated);
    overhead.add(o.protocol_overhead);
    worst = std::max(worst, o.termination_time / n);
    CHECK(o.termination_time >= n);
  }
  CHECK(overhead.mean() <= g0 / ((1 - p) * (1 - decay)) + 3 * overhead.stderr_of_mean());
  CHECK(worst <= 9.05);
}

TEST_CASE("randomized pair with forced randomness is the plain pair zig-zag") {
  for (std::uint64_t s = 0; s < 200; ++s) {
    RandomStream a(s), b(s);
    TwoAgentRandomizedOptions opts;
    opts.g = 2.0;
    opts.epsilon = 0.0;
    opts.direction = Direction::Right;
    const TwoAgentOutcome x = simulate_two_agent_randomized(TargetPlacement::at(11.0), FaultProb(0.2), 1e-3, 0.5, 32, a, opts);
    const TwoAgentOutcome y = simulate_two_agent_zigzag(TargetPlacement::at(11.0), FaultProb(0.2), 1e-3, 0.5, b);
    CHECK(x.termination_time == y.termination_time);
    CHECK(x.harvest_time == 0.0);
  }
  RandomStream rng(1);
  CHECK_THROWS(simulate_two_agent_randomized(TargetPlacement::at(11.0), FaultProb(0.0), 1e-3, 0.5, 32, rng));
}

TEST_CASE("randomized pair: harvested epsilon is uniform and the ratio matches the fault-free randomized oracle") {
  std::vector<double> eps;
  RandomStream rng(12);
  for (int i = 0; i < 10000; ++i) {
    const TwoAgentOutcome o = simulate_two_agent_randomized(TargetPlacement::at(3.0), FaultProb(0.2), 1e-4, 0.5, 32, rng);
    eps.push_back(o.epsilon);
  }
  CHECK(oracle::ks_one_sample_uniform(eps) <= oracle::ks_uniform_critical(eps.size()));

  // with simulated turns the pair is a fault-free searcher: p -> 0 in the oracle
  const double g = lambert_reference().w;
  const double n = std::pow(g, 3.4);
  MomentAccumulator m;
  for (const TrialValue& v : collect_trials(200000, 3, 0, [&](std::uint64_t, RandomStream& r) {
         const TwoAgentOutcome o = simulate_two_agent_randomized(TargetPlacement::at(n), FaultProb(0.2), 1e-6, 0.5, 32, r);
         return TrialValue{o.termination_time / n, o.truncated};
       })) {
    m.add(v.value);
  }
  const double exact = oracle::dp_rand_unconditioned(g, 0.0, n, 0.4) / n;
  CHECK(std::abs(m.mean() - exact) <= 3 * m.stderr_of_mean() + 1e-4);
  CHECK(m.mean() <= 4.59112 + 0.05);
}

TEST_CASE("wireless: per-trial replay and branch structure") {
  for (double p : {0.1, 0.25}) {
    TwoAgentConfig cfg;
    cfg.p = FaultProb(p);
    cfg.gamma = 1e-3;
    cfg.comm = Comm::Wireless;
    const double s = wireless_speed(p);
    RandomStream rng(static_cast<std::uint64_t>(p * 77));
    Moments succ, W;
    for (int i = 0; i < 200000; ++i) {
      const double n = 1.0 + (i % 7);
      const WirelessOutcome o = wireless_search(TargetPlacement::at(i % 2 ? n : -n), cfg, rng);
      REQUIRE_FALSE(o.truncated);
      CHECK(o.termination_time == doctest::Approx(wireless_replay(s, n, o.W, o.T, o.success_branch)).epsilon(1e-12));
      // W = gamma 2^(J+1) for J failed attempts
      CHECK(o.W == doctest::Approx(cfg.gamma * std::pow(2.0, o.W_attempts)).epsilon(1e-12));
      if (o.nonfinder_reached_first) {
        CHECK(o.success_branch);
        CHECK(o.T_attempts == 0);
      } else {
        CHECK(o.T == doctest::Approx(cfg.gamma * std::pow(2.0, o.T_attempts)).epsilon(1e-12));
      }
      double tf = 0;
      for (const Leg& l : o.finder_legs) tf += l.duration;
      CHECK(tf == doctest::Approx(o.termination_time).epsilon(1e-12));
      double tn = 0;
      for (const Leg& l : o.nonfinder_legs) tn += l.duration;
      CHECK(tn == doctest::Approx(o.termination_time).epsilon(1e-12));
      CHECK(o.finder_legs.back().end == (i % 2 ? n : -n));
      succ.add(o.success_branch ? 1.0 : 0.0);
      W.add(o.W);
    }
    CHECK(succ.near(1 - p));
    CHECK(W.near(2 * cfg.gamma * (1 - p) / (1 - 2 * p), 4.0));
  }
}

TEST_CASE("wireless: mean ratio") {
  const double p = 0.1;
  TwoAgentConfig cfg;
  cfg.p = FaultProb(p);
  cfg.gamma = 1e-4;
  cfg.comm = Comm::Wireless;
  const Estimate e = run_monte_carlo(1000000, 4, 0, [&](std::uint64_t, RandomStream& rng) {
    const WirelessOutcome o = wireless_search(TargetPlacement::at(1.0), cfg, rng);
    return TrialValue{o.ratio, o.truncated};
  });
  // exact finite-gamma mean: W and T have mean 2 gamma (1-p)/(1-2p), independent of the branch
  const double s = wireless_speed(p);
  const double ew = 2 * cfg.gamma * (1 - p) / (1 - 2 * p);
  const double exact = 1 + 2 * ew + (1 - p) * 2 * (2 - s * ew) / (1 + s) + p * 2 * (2 + s * ew) / (1 - s);
  CHECK(std::abs(e.mean - exact) <= 3 * e.stderr_);
  CHECK(std::abs(e.mean - 4.2) <= 0.02);
  TwoAgentConfig bad = cfg;
  bad.comm = Comm::FaceToFace;
  RandomStream rng(1);
  CHECK_THROWS(wireless_search(TargetPlacement::at(1.0), bad, rng));
  bad = cfg;
  bad.gamma = 0;
  CHECK_THROWS(wireless_search(TargetPlacement::at(1.0), bad, rng));
}

TEST_CASE("wireless: small p, small gamma approaches 3") {
  TwoAgentConfig cfg;
  cfg.p = FaultProb(1e-6);
  cfg.gamma = 1e-7;
  cfg.comm = Comm::Wireless;
  MomentAccumulator m;
  RandomStream rng(6);
  for (int i = 0; i < 100000; ++i) m.add(wireless_search(TargetPlacement::at(1.0), cfg, rng).ratio);
  CHECK(std::abs(m.mean() - 3.0) <= 0.01);
}
