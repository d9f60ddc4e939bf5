#include "faultsearch/bitforge.hpp"

#include <cmath>
#include <stdexcept>

#include "faultsearch/exact_oracle.hpp"

namespace faultsearch {

double amplify_q(double p, int k) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("amplify_q: requires 0 < p < 1");
  if (k < 1) throw std::invalid_argument("amplify_q: requires k >= 1");
  return (int_pow(2.0 * p - 1.0, k) + 1.0) / 2.0;
}

double AmplifierPlan::bias() const { return std::abs(q_k - 0.5); }

AmplifierPlan plan_amplifier(double p, double tolerance) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("plan_amplifier: requires 0 < p < 1");
  if (!(tolerance > 0.0)) throw std::invalid_argument("plan_amplifier: tolerance must be positive");
  const double r = std::abs(2.0 * p - 1.0);
  int k = 1;
  while (int_pow(r, k) / 2.0 > tolerance) ++k;
  return AmplifierPlan{p, k, amplify_q(p, k)};
}

AgentState amplified_turn(const AgentState& state, FaultProb p, int k, RandomStream& rng, int* attempts) {
  if (k < 1) throw std::invalid_argument("amplified_turn: requires k >= 1");
  AgentState s = state;
  for (int i = 0; i < k; ++i) s = attempt_turn(s, p, rng).state;
  if (attempts) *attempts += k;
  return s;
}

namespace {

void push_leg(std::vector<Leg>& legs, double from, double to) {
  legs.push_back({from, to, 1.0, std::abs(to - from)});
}

}  // namespace

HarvestReport harvest_bits(FaultProb p, int n_bits, double zeta, RandomStream& rng, int k,
                           Direction first_direction) {
  if (n_bits < 1) throw std::invalid_argument("harvest_bits: n_bits must be >= 1");
  if (!(zeta > 0.0)) throw std::invalid_argument("harvest_bits: zeta must be positive");
  if (p.value() >= 1.0) throw std::invalid_argument("harvest_bits: requires p < 1");
  if (k < 1) throw std::invalid_argument("harvest_bits: requires k >= 1");

  HarvestReport r;
  r.per_bit_bias = p.value() > 0.0 ? std::abs(amplify_q(p, k) - 0.5) : 0.5;
  r.bits.reserve(n_bits);
  AgentState agent{0.0, first_direction, 1.0};
  double w = 0.0;  // current distance from the origin

  for (int b = 0; b < n_bits; ++b) {
    if (w == 0.0) {
      const double out = sign(agent.direction) * zeta;
      push_leg(r.legs, 0.0, out);
      agent.position = out;
      r.max_excursion = std::max(r.max_excursion, zeta);
      agent = amplified_turn(agent, p, k, rng, &r.turn_attempts);
      const double next = out + sign(agent.direction) * zeta;
      push_leg(r.legs, out, next);
      r.elapsed += 2.0 * zeta;
      if (next == 0.0 || std::abs(next) < 0.5 * zeta) {
        agent.position = 0.0;
        r.bits.push_back(0);
      } else {
        agent.position = next;
        w = 2.0 * zeta;
        r.bits.push_back(1);
      }
    } else {
      agent = amplified_turn(agent, p, k, rng, &r.turn_attempts);
      const double next = agent.position + sign(agent.direction) * w;
      push_leg(r.legs, agent.position, next);
      r.elapsed += w;
      if (std::abs(next) < 0.5 * w) {
        agent.position = 0.0;
        w = 0.0;
        r.bits.push_back(0);
      } else {
        agent.position = next;
        w *= 2.0;
        r.bits.push_back(1);
      }
    }
    r.max_excursion = std::max(r.max_excursion, w);
  }
  r.final_distance = w;
  r.final_state = agent;
  return r;
}

ReturnReport return_to_origin(FaultProb p, double w, RandomStream& rng, int attempt_cap, double position_sign) {
  if (!(w > 0.0)) throw std::invalid_argument("return_to_origin: requires w > 0");
  if (attempt_cap < 1) throw std::invalid_argument("return_to_origin: attempt_cap must be >= 1");
  ReturnReport r;
  const double side = position_sign >= 0.0 ? 1.0 : -1.0;
  AgentState agent{side * w, side > 0 ? Direction::Right : Direction::Left, 1.0};
  while (r.attempts < attempt_cap) {
    ++r.attempts;
    const TurnResult t = attempt_turn(agent, p, rng);
    agent = t.state;
    const double next = agent.position + sign(agent.direction) * w;
    push_leg(r.legs, agent.position, next);
    r.elapsed += w;
    if (t.success) {
      r.returned = true;
      r.final_distance = 0.0;
      return r;
    }
    agent.position = next;
    w *= 2.0;
  }
  r.final_distance = w;
  return r;
}

double uniform_from_bits(const std::vector<int>& bits) {
  if (bits.empty()) throw std::invalid_argument("uniform_from_bits: empty bit string");
  double x = 0.0;
  double scale = 0.5;
  for (int b : bits) {
    if (b != 0 && b != 1) throw std::invalid_argument("uniform_from_bits: bits must be 0 or 1");
    x += b * scale;
    scale *= 0.5;
  }
  return x;
}

int fallback_attempts(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("fallback_attempts: requires 0 < p < 1");
  return static_cast<int>(std::floor(std::log(1e-9) / std::log(p))) + 1;
}

namespace {

// Walks `legs` in order; returns the elapsed time at the first crossing of x.
std::optional<double> first_crossing(const std::vector<Leg>& legs, double x) {
  double t = 0.0;
  for (const Leg& l : legs) {
    if (auto hit = leg_crossing_time(l.start, l.end, l.speed, x)) return t + *hit;
    t += l.duration;
  }
  return std::nullopt;
}

}  // namespace

HarvestedSearchOutcome harvested_randomized_search(const HarvestedSearchConfig& cfg, FaultProb p,
                                                   const TargetPlacement& target, RandomStream& rng) {
  if (!(p.value() > 0.0)) throw std::invalid_argument("harvested_randomized_search: requires p > 0");
  p.require_finite_search("harvested_randomized_search");
  if (cfg.n_bits < 1 || cfg.n_bits > 52) throw std::invalid_argument("harvested_randomized_search: n_bits in [1, 52]");
  const AmplifierPlan plan = plan_amplifier(p, cfg.tolerance);
  const int cap = cfg.fail_cap > 0 ? cfg.fail_cap : default_fail_cap(p);

  HarvestedSearchOutcome out;
  HarvestReport h = harvest_bits(p, cfg.n_bits + 1, cfg.zeta, rng, plan.k);
  std::vector<Leg> legs = std::move(h.legs);
  out.max_excursion = h.max_excursion;
  double clock = h.elapsed;
  bool lost = false;
  if (h.final_distance > 0.0) {
    const double side = h.final_state.position > 0 ? 1.0 : -1.0;
    ReturnReport back = return_to_origin(p, h.final_distance, rng, fallback_attempts(p), side);
    legs.insert(legs.end(), back.legs.begin(), back.legs.end());
    clock += back.elapsed;
    h.turn_attempts += back.attempts;
    if (!back.returned) {
      // keep doubling until the origin shows up, then search deterministically
      lost = true;
      ReturnReport rest = return_to_origin(p, back.final_distance, rng, 1 << 20, side);
      h.turn_attempts += rest.attempts;
      legs.insert(legs.end(), rest.legs.begin(), rest.legs.end());
      clock += rest.elapsed;
      if (!rest.returned) throw std::runtime_error("harvested_randomized_search: agent never returned");
    }
    for (const Leg& l : legs) out.max_excursion = std::max({out.max_excursion, std::abs(l.start), std::abs(l.end)});
  }
  out.harvest_time = clock;
  out.fallback = lost;

  if (auto hit = first_crossing(legs, target.position())) {
    out.found_while_harvesting = true;
    out.search.termination_time = *hit;
    out.search.turn_attempts = h.turn_attempts;
    out.search.legs = std::move(legs);
    return out;
  }

  const std::vector<int> eps_bits(h.bits.begin(), h.bits.begin() + cfg.n_bits);
  out.epsilon = uniform_from_bits(eps_bits);
  out.direction = h.bits.back() == 1 ? Direction::Right : Direction::Left;

  SimOutcome s = lost ? deterministic_search(2.0, p, target, rng, cap)
                      : randomized_search(cfg.g, p, target, rng, cap, {out.epsilon, out.direction});
  out.search.termination_time = clock + s.termination_time;
  out.search.truncated = s.truncated;
  out.search.turn_attempts = h.turn_attempts + s.turn_attempts;
  out.search.legs = std::move(legs);
  out.search.legs.insert(out.search.legs.end(), s.legs.begin(), s.legs.end());
  return out;
}

}  // namespace faultsearch
