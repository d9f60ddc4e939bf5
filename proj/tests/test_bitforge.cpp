#include <cmath>

#include "doctest.h"
#include "faultsearch/bitforge.hpp"
#include "oracles.hpp"

using namespace faultsearch;

TEST_CASE("amplified retention probability") {
  CHECK(amplify_q(0.3, 1) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(amplify_q(0.5, 7) == 0.5);
  CHECK(amplify_q(0.3, 2) == doctest::Approx(0.58).epsilon(1e-15));
  for (double p : {0.05, 0.3, 0.7, 0.95}) {
    double q = p;
    for (int k = 2; k <= 20; ++k) {
      q = (1 - p) * (1 - q) + p * q;
      CHECK(std::abs(amplify_q(p, k) - q) <= 1e-12);
      CHECK(std::abs(amplify_q(p, k) - 0.5) < std::abs(amplify_q(p, k - 1) - 0.5));
    }
  }
  CHECK_THROWS(amplify_q(0.0, 1));
  CHECK_THROWS(amplify_q(1.0, 1));
  CHECK_THROWS(amplify_q(0.3, 0));
}

TEST_CASE("two chained attempts keep the direction with probability 0.58") {
  RandomStream rng(1);
  const int n = 1000000;
  int kept = 0;
  for (int i = 0; i < n; ++i) {
    const AgentState s = amplified_turn(AgentState{}, FaultProb(0.3), 2, rng);
    kept += s.direction == Direction::Right;
  }
  const double rate = static_cast<double>(kept) / n;
  CHECK(std::abs(rate - 0.58) <= 3 * std::sqrt(0.58 * 0.42 / n));
}

TEST_CASE("amplifier plan") {
  const AmplifierPlan a = plan_amplifier(0.3, 0.01);
  CHECK(a.k == 5);
  CHECK(a.bias() == doctest::Approx(std::pow(0.4, 5) / 2));
  CHECK(plan_amplifier(0.5, 1e-9).k == 1);
  for (double p : {0.1, 0.3, 0.45, 0.8}) {
    int prev = 0;
    for (double tol = 0.4; tol > 1e-12; tol /= 10) {
      const AmplifierPlan plan = plan_amplifier(p, tol);
      CHECK(plan.k >= prev);
      CHECK(plan.bias() <= tol);
      if (plan.k > 1) CHECK(std::pow(std::abs(2 * p - 1), plan.k - 1) / 2 > tol);
      prev = plan.k;
    }
  }
  CHECK_THROWS(plan_amplifier(0.0, 0.1));
  CHECK_THROWS(plan_amplifier(1.0, 0.1));
  CHECK_THROWS(plan_amplifier(0.3, 0.0));
}

TEST_CASE("amplified bit bias") {
  for (double p : {0.1, 0.3, 0.45}) {
    const double tol = 1e-3;
    const AmplifierPlan plan = plan_amplifier(p, tol);
    RandomStream rng(static_cast<std::uint64_t>(p * 1000));
    long ones = 0;
    const int n = 1000000;
    int remaining = n;
    while (remaining > 0) {
      const int chunk = std::min(remaining, 16);
      const HarvestReport h = harvest_bits(FaultProb(p), chunk, 1e-9, rng, plan.k);
      for (int b : h.bits) ones += b;
      remaining -= chunk;
    }
    const double freq = static_cast<double>(ones) / n;
    CHECK(std::abs(freq - 0.5) <= tol + 3 * std::sqrt(0.25 / n));
  }
}

TEST_CASE("fair bits: nibble chi-square") {
  RandomStream rng(42);
  std::vector<double> counts(16, 0.0);
  for (int i = 0; i < 10000; ++i) {
    const HarvestReport h = harvest_bits(FaultProb(0.5), 16, 1e-6, rng);
    for (int j = 0; j < 16; j += 4) counts[h.bits[j] * 8 + h.bits[j + 1] * 4 + h.bits[j + 2] * 2 + h.bits[j + 3]] += 1;
  }
  const auto chi = oracle::chi_square(counts, std::vector<double>(16, 40000.0 / 16));
  CHECK(chi.passes());
}

TEST_CASE("harvest geometry") {
  RandomStream rng(3);
  for (int i = 0; i < 20000; ++i) {
    const HarvestReport h = harvest_bits(FaultProb(0.4), 8, 1e-6, rng);
    REQUIRE(h.bits.size() == 8);
    CHECK(h.max_excursion <= std::pow(2.0, 8) * 1e-6);
    CHECK(h.elapsed <= std::pow(2.0, 9) * 1e-6);
    double t = 0;
    for (std::size_t j = 0; j < h.legs.size(); ++j) {
      t += h.legs[j].duration;
      CHECK(std::abs(h.legs[j].end) <= h.max_excursion);
      if (j > 0) CHECK(h.legs[j].start == h.legs[j - 1].end);
    }
    CHECK(t == doctest::Approx(h.elapsed).epsilon(1e-12));
    CHECK(std::abs(h.final_state.position) == h.final_distance);
  }
}

TEST_CASE("harvest bits replay the fault draws") {
  // bit j is 1 iff the turn at step j kept the direction
  RandomStream a(9), b(9);
  const HarvestReport h = harvest_bits(FaultProb(0.3), 12, 1.0, a);
  for (int bit : h.bits) {
    const bool kept = b.uniform01() < 0.3;
    CHECK(bit == (kept ? 1 : 0));
  }
}

TEST_CASE("no faults, no entropy") {
  RandomStream rng(1);
  const HarvestReport h = harvest_bits(FaultProb(0.0), 10, 1e-3, rng);
  for (int b : h.bits) CHECK(b == 0);
  CHECK(h.per_bit_bias == 0.5);
  CHECK(h.final_distance == 0.0);
  CHECK_THROWS(harvest_bits(FaultProb(0.3), 0, 1e-3, rng));
  CHECK_THROWS(harvest_bits(FaultProb(0.3), 4, 0.0, rng));
}

TEST_CASE("return to the origin") {
  RandomStream rng(1);
  const ReturnReport r0 = return_to_origin(FaultProb(0.0), 0.25, rng);
  CHECK(r0.elapsed == 0.25);
  CHECK(r0.attempts == 1);
  CHECK(r0.returned);
  const int n = 1000000;
  double sum = 0, sum2 = 0;
  int out_after[4] = {0, 0, 0, 0};
  RandomStream r(2);
  for (int i = 0; i < n; ++i) {
    const ReturnReport rep = return_to_origin(FaultProb(0.3), 1.0, r);
    REQUIRE(rep.returned);
    // l failures then success: w (2^(l+1) - 1)
    CHECK(rep.elapsed == std::pow(2.0, rep.attempts) - 1.0);
    sum += rep.attempts;
    sum2 += double(rep.attempts) * rep.attempts;
    for (int l = 1; l <= 3; ++l) out_after[l] += rep.attempts > l;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sum2 / n - mean * mean) / n);
  CHECK(std::abs(mean - 1 / 0.7) <= 3 * sd);
  for (int l = 1; l <= 3; ++l) {
    const double expect = std::pow(0.3, l);
    CHECK(std::abs(double(out_after[l]) / n - expect) <= 3 * std::sqrt(expect * (1 - expect) / n));
  }
  const ReturnReport capped = return_to_origin(FaultProb(0.999), 1.0, r, 3);
  CHECK(capped.attempts <= 3);
  if (!capped.returned) CHECK(capped.final_distance == 8.0);
}

TEST_CASE("uniform from bits") {
  CHECK(uniform_from_bits({1, 0, 0, 0}) == 0.5);
  CHECK(uniform_from_bits({0, 0, 0}) == 0.0);
  CHECK(uniform_from_bits({0, 1, 1}) == 0.375);
  CHECK_THROWS(uniform_from_bits({}));
  CHECK_THROWS(uniform_from_bits({2}));
  const AmplifierPlan plan = plan_amplifier(0.2, 1e-3);
  RandomStream rng(5);
  std::vector<double> xs;
  for (int i = 0; i < 10000; ++i) xs.push_back(uniform_from_bits(harvest_bits(FaultProb(0.2), 32, 1e-12, rng, plan.k).bits));
  CHECK(oracle::ks_one_sample_uniform(xs) <= 0.02);
  CHECK(oracle::ks_one_sample_uniform(xs) <= oracle::ks_uniform_critical(xs.size()));
}

TEST_CASE("fallback threshold") {
  CHECK(std::pow(0.3, fallback_attempts(0.3)) < 1e-9);
  CHECK(std::pow(0.3, fallback_attempts(0.3) - 1) >= 1e-9);
}

TEST_CASE("deterministic agent running the harvested randomized search") {
  const double g = 2.5, p = 0.2, delta = 0.5;
  const double n = std::pow(g, 2 + delta);
  HarvestedSearchConfig cfg;
  cfg.g = g;
  cfg.zeta = 1e-15;
  std::vector<double> eps;
  MomentAccumulator acc, overhead;
  for (const TrialValue& v : collect_trials(300000, 77, 0, [&](std::uint64_t, RandomStream& rng) {
         const HarvestedSearchOutcome o = harvested_randomized_search(cfg, FaultProb(p), TargetPlacement::at(n), rng);
         REQUIRE_FALSE(o.found_while_harvesting);
         return TrialValue{o.search.termination_time, o.search.truncated};
       })) {
    acc.add(v.value);
  }
  const double exact = oracle::dp_rand_unconditioned(g, p, n, delta);
  CHECK(std::abs(acc.mean() - exact) <= 3 * acc.stderr_of_mean() + 1e-6);
  RandomStream rng(8);
  for (int i = 0; i < 10000; ++i) {
    const HarvestedSearchOutcome o = harvested_randomized_search(cfg, FaultProb(p), TargetPlacement::at(n), rng);
    eps.push_back(o.epsilon);
    CHECK(o.harvest_time < 1e-3);
    double t = 0;
    for (const Leg& l : o.search.legs) t += l.duration;
    CHECK(t == doctest::Approx(o.search.termination_time).epsilon(1e-12));
  }
  CHECK(oracle::ks_one_sample_uniform(eps) <= oracle::ks_uniform_critical(eps.size()));
}
