#include "faultsearch/two_agent.hpp"

#include <cmath>
#include <stdexcept>

#include "faultsearch/analysis.hpp"
#include "faultsearch/bitforge.hpp"

namespace faultsearch {

void TwoAgentConfig::validate() const {
  if (!(gamma > 0.0)) throw std::invalid_argument("two-agent: gamma must be positive");
  if (!(gamma_decay > 0.0 && gamma_decay <= 1.0)) throw std::invalid_argument("two-agent: gamma_decay in (0,1]");
  p.require_finite_search("two-agent");
  if (follower_speed && !(*follower_speed > 0.0 && *follower_speed < 1.0)) {
    throw std::invalid_argument("two-agent: follower speed in (0,1)");
  }
}

double TwoAgentConfig::speed() const { return follower_speed ? *follower_speed : wireless_speed(p); }

namespace {

int resolve_cap(int cap, double p) { return cap > 0 ? cap : default_fail_cap(p); }

// A leg standing for a stretch of protocol moves: net displacement over the
// stretch, at its average speed.
Leg summary_leg(double from, double to, double dt) {
  return Leg{from, to, dt > 0.0 ? std::abs(to - from) / dt : 0.0, dt};
}

// Collocation tolerance for the relative gap, in units of the move length.
constexpr double kMeetTol = 1e-9;

struct ForcedRun {
  TurnRecord rec;
  std::optional<double> target_time;     // leader crossed the target after this long
  double follower_at_target_time = 0.0;
};

ForcedRun run_mobile(AgentState leader, AgentState follower, double gamma, FaultProb p, RandomStream& rng,
                     int cap, std::optional<double> target) {
  ForcedRun run;
  run.rec.intended_point = leader.position;
  const double vf = sign(follower.direction) * follower.speed;
  if (leader.position == follower.position) throw std::invalid_argument("force_change_direction: already collocated");
  while (run.rec.attempts < cap) {
    ++run.rec.attempts;
    leader = attempt_turn(leader, p, rng).state;
    const double vl = sign(leader.direction) * leader.speed;
    const double r0 = leader.position - follower.position;
    const double r1 = r0 + (vl - vf) * gamma;
    const bool meets = (r0 > 0) != (r1 > 0) || std::abs(r1) <= kMeetTol * gamma;
    const double tau = meets ? std::min(gamma, r0 / (r0 - r1) * gamma) : gamma;
    if (target) {
      if (auto hit = leg_crossing_time(leader.position, leader.position + vl * tau, leader.speed, *target)) {
        run.target_time = run.rec.elapsed + *hit;
        run.follower_at_target_time = follower.position + vf * *hit;
        return run;
      }
    }
    run.rec.elapsed += tau;
    if (meets) {
      const double m = follower.position + vf * tau;
      run.rec.realized_point = m;
      leader.position = m;
      run.rec.leader = leader;
      run.rec.delay = run.rec.elapsed;
      return run;
    }
    leader.position += vl * gamma;
    follower.position += vf * gamma;
  }
  run.rec.truncated = true;
  run.rec.leader = leader;
  run.rec.realized_point = leader.position;
  return run;
}

TurnRecord run_immobile(AgentState leader, double point, double gamma, FaultProb p, RandomStream& rng, int cap) {
  const double rel0 = leader.position - point;
  if (std::abs(std::abs(rel0) - gamma) > 1e-9 * gamma) {
    throw std::invalid_argument("force_change_direction: leader must start gamma past an immobile follower");
  }
  if ((rel0 > 0) != (leader.direction == Direction::Right)) {
    throw std::invalid_argument("force_change_direction: leader must head away from an immobile follower");
  }
  TurnRecord rec;
  rec.intended_point = point;
  double rel = rel0 > 0 ? gamma : -gamma;  // exact local coordinates
  double w = gamma;
  while (rec.attempts < cap) {
    ++rec.attempts;
    leader = attempt_turn(leader, p, rng).state;
    const double next = rel + sign(leader.direction) * w;
    rec.elapsed += w;
    if (leg_crossing_time(rel, next, 1.0, 0.0)) {
      leader.position = point;
      rec.realized_point = point;
      rec.leader = leader;
      rec.delay = rec.elapsed;
      return rec;
    }
    rel = next;
    w *= 2.0;
  }
  rec.truncated = true;
  leader.position = point + rel;
  rec.leader = leader;
  rec.realized_point = leader.position;
  return rec;
}

}  // namespace

TurnRecord force_change_direction(const AgentState& leader, const Follower& follower, double gamma, FaultProb p,
                                  RandomStream& rng, int attempt_cap) {
  if (!(gamma > 0.0)) throw std::invalid_argument("force_change_direction: gamma must be positive");
  const int cap = resolve_cap(attempt_cap, p);
  if (const auto* f = std::get_if<ImmobileFollower>(&follower)) {
    return run_immobile(leader, f->position, gamma, p, rng, cap);
  }
  return run_mobile(leader, std::get<AgentState>(follower), gamma, p, rng, cap, std::nullopt).rec;
}

namespace {

TurnRecord simulated_turn_impl(double x, Direction heading, double gamma, FaultProb p, RandomStream& rng, int cap,
                               std::optional<double> target, std::optional<TargetSighting>* sighting) {
  if (!(gamma > 0.0)) throw std::invalid_argument("simulated_turn: gamma must be positive");
  if (!(p.value() < 1.0)) throw std::invalid_argument("simulated_turn: requires p < 1");
  const double q = 1.0 - p.value();
  const double d = sign(heading);
  // local coordinates centred on the intended point
  const double lead = (1.0 - 2.0 * p.value()) * gamma / q;
  const double trail = -gamma / q;
  const double lead_in = 2.0 * gamma + lead;
  std::optional<double> local_target;
  if (target) local_target = (*target - x) * d;

  if (local_target) {
    if (auto hit = leg_crossing_time(-2.0 * gamma, lead, 1.0, *local_target)) {
      const double vf = (trail + 2.0 * gamma) / lead_in;
      *sighting = TargetSighting{*hit, x + d * (-2.0 * gamma + vf * *hit)};
      return TurnRecord{x, x, 0.0, 0, 0.0, lead_in, false, {}};
    }
  }

  const AgentState leader{lead, Direction::Right, 1.0};
  const AgentState follower{trail, Direction::Right, 1.0};
  ForcedRun run = run_mobile(leader, follower, gamma, p, rng, resolve_cap(cap, p), local_target);
  if (run.target_time) {
    *sighting = TargetSighting{lead_in + *run.target_time, x + d * run.follower_at_target_time};
    return TurnRecord{x, x, *run.target_time, run.rec.attempts, 0.0, lead_in, false, {}};
  }
  TurnRecord rec = run.rec;
  const double m = rec.realized_point;
  rec.intended_point = x;
  rec.realized_point = x + d * m;
  rec.lead_in = lead_in;
  rec.delay = lead_in + rec.elapsed + m - 2.0 * gamma;
  rec.leader = AgentState{rec.realized_point, rec.truncated ? heading : -heading, 1.0};
  return rec;
}

}  // namespace

TurnRecord simulated_turn(double intended_point, Direction heading, double gamma, FaultProb p, RandomStream& rng,
                          int attempt_cap) {
  return simulated_turn_impl(intended_point, heading, gamma, p, rng, attempt_cap, std::nullopt, nullptr);
}

TurnRecord simulated_turn(double intended_point, Direction heading, double gamma, FaultProb p, RandomStream& rng,
                          int attempt_cap, double target, std::optional<TargetSighting>& sighting) {
  sighting.reset();
  return simulated_turn_impl(intended_point, heading, gamma, p, rng, attempt_cap, target, &sighting);
}

TwoAgentOutcome two_agent_zigzag(const TargetPlacement& target, double g, double eps, Direction dir, FaultProb p,
                                 double gamma0, double gamma_decay, RandomStream& rng, int attempt_cap) {
  if (!(g > 1.0)) throw std::invalid_argument("two_agent_zigzag: requires g > 1");
  if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("two_agent_zigzag: eps in [0,1)");
  if (!(gamma0 > 0.0)) throw std::invalid_argument("two_agent_zigzag: gamma0 must be positive");
  if (!(gamma_decay > 0.0 && gamma_decay < 1.0)) throw std::invalid_argument("two_agent_zigzag: gamma_decay in (0,1)");
  p.require_finite_search("two_agent_zigzag");
  if (!(4.0 * gamma0 < std::pow(g, eps))) throw std::invalid_argument("two_agent_zigzag: gamma0 too large for the first turn");

  TwoAgentOutcome out;
  out.epsilon = eps;
  out.direction = dir;
  const double x = target.position();
  const int cap = resolve_cap(attempt_cap, p);
  double pos = 0.0;
  double clock = 0.0;
  double gamma = gamma0;

  auto walk_pair = [&](double to) -> bool {
    if (auto hit = leg_crossing_time(pos, to, 1.0, x)) {
      out.leader_legs.push_back({pos, x, 1.0, *hit});
      out.follower_legs.push_back({pos, x, 1.0, *hit});
      out.termination_time = clock + *hit;
      return true;
    }
    const double dt = std::abs(to - pos);
    out.leader_legs.push_back({pos, to, 1.0, dt});
    out.follower_legs.push_back({pos, to, 1.0, dt});
    clock += dt;
    pos = to;
    return false;
  };

  for (int i = 0; i < 2000; ++i, gamma *= gamma_decay) {
    const double X = sign(dir) * std::pow(g, i + eps);
    const double zone = X - sign(dir) * 2.0 * gamma;
    if ((zone - pos) * sign(dir) <= 0.0) throw std::logic_error("two_agent_zigzag: turn zones overlap");
    if (walk_pair(zone)) return out;

    std::optional<TargetSighting> seen;
    const TurnRecord rec = simulated_turn(X, dir, gamma, p, rng, cap, x, seen);
    out.turn_attempts += rec.attempts;
    if (seen) {
      // the leader stops on the target; the follower walks on to it
      out.leader_legs.push_back({zone, x, 1.0, seen->time});
      out.follower_legs.push_back(summary_leg(zone, seen->follower_position, seen->time));
      const double rest = std::abs(x - seen->follower_position);
      out.follower_legs.push_back({seen->follower_position, x, 1.0, rest});
      out.termination_time = clock + seen->time + rest;
      return out;
    }
    out.turns.push_back(rec);
    out.protocol_overhead += rec.elapsed;
    if (rec.truncated) {
      out.truncated = true;
      out.termination_time = clock + rec.lead_in + rec.elapsed;
      return out;
    }
    const double dt = rec.lead_in + rec.elapsed;
    out.leader_legs.push_back(summary_leg(zone, rec.realized_point, dt));
    out.follower_legs.push_back(summary_leg(zone, rec.realized_point, dt));
    clock += dt;
    pos = rec.realized_point;
    dir = -dir;
  }
  throw std::logic_error("two_agent_zigzag: target never reached");
}

TwoAgentOutcome simulate_two_agent_zigzag(const TargetPlacement& target, FaultProb p, double gamma0,
                                          double gamma_decay, RandomStream& rng, int attempt_cap) {
  return two_agent_zigzag(target, 2.0, 0.0, Direction::Right, p, gamma0, gamma_decay, rng, attempt_cap);
}

TwoAgentOutcome simulate_two_agent_randomized(const TargetPlacement& target, FaultProb p, double gamma0,
                                              double gamma_decay, int bit_budget, RandomStream& rng,
                                              const TwoAgentRandomizedOptions& opts) {
  if (!(p.value() > 0.0)) throw std::invalid_argument("simulate_two_agent_randomized: p = 0 has no fault entropy");
  p.require_finite_search("simulate_two_agent_randomized");
  if (bit_budget < 1 || bit_budget > 52) throw std::invalid_argument("simulate_two_agent_randomized: bit_budget in [1,52]");
  const double g = opts.g > 0.0 ? opts.g : lambert_reference().w;

  double harvest_time = 0.0;
  double eps = opts.epsilon.value_or(0.0);
  Direction dir = opts.direction.value_or(Direction::Right);
  if (!opts.epsilon || !opts.direction) {
    const AmplifierPlan plan = plan_amplifier(p, opts.tolerance);
    const HarvestReport h = harvest_bits(p, bit_budget + 1, opts.zeta, rng, plan.k);
    harvest_time = h.elapsed;
    double reach = h.max_excursion;
    if (h.final_distance > 0.0) {
      // the waiting follower marks the origin
      const ReturnReport back = return_to_origin(p, h.final_distance, rng, 1 << 20, h.final_state.position > 0 ? 1.0 : -1.0);
      if (!back.returned) throw std::runtime_error("simulate_two_agent_randomized: leader never returned");
      harvest_time += back.elapsed;
      reach = std::max(reach, back.final_distance);
      for (const Leg& l : back.legs) reach = std::max({reach, std::abs(l.start), std::abs(l.end)});
    }
    if (reach >= target.magnitude) throw std::domain_error("simulate_two_agent_randomized: target inside the harvesting excursion");
    if (!opts.epsilon) eps = uniform_from_bits(std::vector<int>(h.bits.begin(), h.bits.begin() + bit_budget));
    if (!opts.direction) dir = h.bits.back() == 1 ? Direction::Right : Direction::Left;
  }

  TwoAgentOutcome out = two_agent_zigzag(target, g, eps, dir, p, gamma0, gamma_decay, rng);
  out.harvest_time = harvest_time;
  out.termination_time += harvest_time;
  return out;
}

WirelessOutcome wireless_search(const TargetPlacement& target, const TwoAgentConfig& cfg, RandomStream& rng) {
  cfg.validate();
  if (!(cfg.p.value() > 0.0)) throw std::invalid_argument("wireless_search: requires 0 < p");
  if (cfg.comm != Comm::Wireless) throw std::invalid_argument("wireless_search: requires wireless communication");
  const double s = cfg.speed();
  const double gamma = cfg.gamma;
  const int cap = resolve_cap(cfg.attempt_cap, cfg.p);
  const double n = target.magnitude;
  const double x = target.position();
  const double side = sign(target.side);

  WirelessOutcome out;
  // phase 1: opposite unit-speed sweeps, the finder reaches x at time n
  out.finder_legs.push_back({0.0, x, 1.0, n});
  out.nonfinder_legs.push_back({0.0, -x, 1.0, n});

  // non-finder: one turn attempt, then speed s
  AgentState nf{-x, target.side == Direction::Right ? Direction::Left : Direction::Right, s};
  const TurnResult nt = attempt_turn(nf, cfg.p, rng);
  nf = nt.state;
  out.success_branch = sign(nf.direction) == side;

  // finder: overshoot gamma, forced turn against the immobile target
  const AgentState over{x + side * gamma, target.side, 1.0};
  const TurnRecord w = force_change_direction(over, ImmobileFollower{x}, gamma, cfg.p, rng, cap);
  out.W = gamma + w.elapsed;
  out.W_attempts = w.attempts;
  if (w.truncated) {
    out.truncated = true;
    return out;
  }
  out.finder_legs.push_back({x, x, 0.0, out.W});

  const double vnf = sign(nf.direction) * s;  // non-finder velocity
  if (out.success_branch && 2.0 * n / s <= out.W) {
    out.nonfinder_reached_first = true;
    out.termination_time = n + 2.0 * n / s;
    out.finder_legs.back().duration = 2.0 * n / s;  // still turning when the non-finder arrives
    out.nonfinder_legs.push_back({-x, x, s, 2.0 * n / s});
    out.ratio = out.termination_time / n;
    return out;
  }

  // chase: the finder leaves x heading for the non-finder
  const double nf_pos = -x + vnf * out.W;
  const double gap = std::abs(x - nf_pos);
  const double closing = out.success_branch ? 1.0 + s : 1.0 - s;
  const double tc = gap / closing;
  out.meeting_point = x - side * tc;
  out.finder_legs.push_back({x, out.meeting_point, 1.0, tc});
  out.nonfinder_legs.push_back({-x, out.meeting_point, s, out.W + tc});

  // the follower waits; the leader overshoots gamma and forces a turn against it
  const AgentState past{out.meeting_point - side * gamma, target.side == Direction::Right ? Direction::Left : Direction::Right, 1.0};
  const TurnRecord t = force_change_direction(past, ImmobileFollower{out.meeting_point}, gamma, cfg.p, rng, cap);
  out.T = gamma + t.elapsed;
  out.T_attempts = t.attempts;
  if (t.truncated) {
    out.truncated = true;
    return out;
  }
  out.finder_legs.push_back({out.meeting_point, out.meeting_point, 0.0, out.T});
  // pick up the follower and return together
  out.finder_legs.push_back({out.meeting_point, x, 1.0, tc});
  out.nonfinder_legs.push_back({out.meeting_point, out.meeting_point, 0.0, out.T});
  out.nonfinder_legs.push_back({out.meeting_point, x, 1.0, tc});
  out.termination_time = n + out.W + tc + out.T + tc;
  out.ratio = out.termination_time / n;
  return out;
}

}  // namespace faultsearch
