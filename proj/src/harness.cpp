#include "faultsearch/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include "json.hpp"
#include <sstream>
#include <stdexcept>

#include "faultsearch/analysis.hpp"
#include "faultsearch/bitforge.hpp"
#include "faultsearch/exact_oracle.hpp"
#include "faultsearch/single_search.hpp"
#include "faultsearch/two_agent.hpp"

namespace faultsearch {

namespace {

const std::vector<std::pair<Scenario, const char*>> kScenarios = {
    {Scenario::Deterministic, "det"},
    {Scenario::Randomized, "rand"},
    {Scenario::RandomizedTowards, "rand-towards"},
    {Scenario::Harvested, "harvested"},
    {Scenario::TwoAgentZigzag, "two-agent"},
    {Scenario::TwoAgentRandomized, "two-agent-rand"},
    {Scenario::Wireless, "wireless"},
};

}  // namespace

Scenario parse_scenario(const std::string& name) {
  for (const auto& [s, n] : kScenarios)
    if (name == n) return s;
  throw std::invalid_argument("unknown scenario: " + name);
}

const char* to_string(Scenario s) {
  for (const auto& [k, n] : kScenarios)
    if (k == s) return n;
  return "?";
}

std::vector<std::string> scenario_names() {
  std::vector<std::string> out;
  for (const auto& [s, n] : kScenarios) out.emplace_back(n);
  return out;
}

double default_g(Scenario s, double p) {
  switch (s) {
    case Scenario::Deterministic:
      return optimal_g_det(p);
    case Scenario::Randomized:
    case Scenario::RandomizedTowards:
    case Scenario::Harvested:
      return optimal_g_rand(p);
    case Scenario::TwoAgentRandomized:
      return lambert_reference().w;
    case Scenario::TwoAgentZigzag:
    case Scenario::Wireless:
      return 2.0;
  }
  return 2.0;
}

namespace {

double g_of(Scenario s, const ScenarioParams& params) { return params.g ? *params.g : default_g(s, params.p); }

// Termination time of one trial.
std::function<TrialValue(std::uint64_t, RandomStream&)> trial_fn(Scenario s, const ScenarioParams& params) {
  const FaultProb p(params.p);
  const TargetPlacement target = TargetPlacement::at(params.target);
  const double g = g_of(s, params);
  const int cap = params.fail_cap;
  auto wrap = [](const SimOutcome& o) { return TrialValue{o.termination_time, o.truncated}; };
  auto wrap2 = [](const TwoAgentOutcome& o) { return TrialValue{o.termination_time, o.truncated}; };
  auto resolved_cap = [cap, p] { return cap > 0 ? cap : default_fail_cap(p); };

  switch (s) {
    case Scenario::Deterministic: {
      const int c = resolved_cap();
      return [=](std::uint64_t, RandomStream& rng) { return wrap(deterministic_search(g, p, target, rng, c)); };
    }
    case Scenario::Randomized: {
      const int c = resolved_cap();
      return [=](std::uint64_t, RandomStream& rng) { return wrap(randomized_search(g, p, target, rng, c)); };
    }
    case Scenario::RandomizedTowards: {
      const int c = resolved_cap();
      const RandomizedChoices forced{std::nullopt, target.side};
      return [=](std::uint64_t, RandomStream& rng) { return wrap(randomized_search(g, p, target, rng, c, forced)); };
    }
    case Scenario::Harvested: {
      HarvestedSearchConfig cfg;
      cfg.g = g;
      cfg.n_bits = params.bit_budget;
      cfg.fail_cap = cap;
      return [=](std::uint64_t, RandomStream& rng) { return wrap(harvested_randomized_search(cfg, p, target, rng).search); };
    }
    case Scenario::TwoAgentZigzag:
      return [=](std::uint64_t, RandomStream& rng) {
        return wrap2(two_agent_zigzag(target, g, 0.0, Direction::Right, p, params.gamma, params.gamma_decay, rng, cap));
      };
    case Scenario::TwoAgentRandomized: {
      TwoAgentRandomizedOptions opts;
      opts.g = g;
      return [=](std::uint64_t, RandomStream& rng) {
        return wrap2(simulate_two_agent_randomized(target, p, params.gamma, params.gamma_decay, params.bit_budget, rng, opts));
      };
    }
    case Scenario::Wireless: {
      TwoAgentConfig cfg;
      cfg.p = p;
      cfg.gamma = params.gamma;
      cfg.follower_speed = params.speed;
      cfg.comm = Comm::Wireless;
      cfg.attempt_cap = cap;
      cfg.validate();
      return [=](std::uint64_t, RandomStream& rng) {
        const WirelessOutcome o = wireless_search(target, cfg, rng);
        return TrialValue{o.termination_time, o.truncated};
      };
    }
  }
  throw std::invalid_argument("unknown scenario");
}

}  // namespace

Estimate estimate(Scenario s, const ScenarioParams& params, std::uint64_t trials, std::uint64_t master_seed,
                  unsigned parallelism) {
  if (trials < 2) throw std::invalid_argument("estimate: trials must be >= 2");
  return run_monte_carlo(trials, master_seed, parallelism, trial_fn(s, params));
}

namespace {

// Finite-gamma mean of the wireless protocol: W and T are independent of the
// branch with mean 2 gamma (1-p)/(1-2p) each. Ignores the event 2n/s <= W.
double wireless_mean(double p, double s, double gamma, double n) {
  const double ew = 2.0 * gamma * (1.0 - p) / (1.0 - 2.0 * p);
  return n + 2.0 * ew + (1.0 - p) * 2.0 * (2.0 * n - s * ew) / (1.0 + s) + p * 2.0 * (2.0 * n + s * ew) / (1.0 - s);
}

double speed_of(const ScenarioParams& params) { return params.speed ? *params.speed : wireless_speed(params.p); }

}  // namespace

std::optional<double> exact_mean(Scenario s, const ScenarioParams& params) {
  const double n = std::abs(params.target);
  try {
    const double g = g_of(s, params);
    switch (s) {
      case Scenario::Deterministic: {
        const IntervalIndex ix = decompose(n, g);
        if (params.target > 0) return expected_time_det_closed(g, params.p, ix.t, n).value;
        return expected_time_det_system(g, params.p, ix.t, n).solution.L0;
      }
      case Scenario::Randomized: {
        const IntervalIndex ix = decompose(n, g);
        return expected_time_rand_unconditioned(g, params.p, ix.t, ix.delta, n).value;
      }
      case Scenario::RandomizedTowards: {
        const IntervalIndex ix = decompose(n, g);
        return expected_time_rand_exact(g, params.p, ix.t, ix.delta, n).expectation.value;
      }
      case Scenario::Wireless:
        if (!(params.p > 0.0 && params.p < 0.5)) return std::nullopt;
        return wireless_mean(params.p, speed_of(params), params.gamma, n);
      default:
        return std::nullopt;
    }
  } catch (const std::logic_error&) {
    return std::nullopt;
  }
}

std::optional<double> cr_reference(Scenario s, const ScenarioParams& params) {
  try {
    const double g = g_of(s, params);
    switch (s) {
      case Scenario::Deterministic:
        return f_det(g, params.p);
      case Scenario::Randomized:
      case Scenario::RandomizedTowards:
      case Scenario::Harvested:
        return f_rand(g, params.p);
      case Scenario::TwoAgentZigzag:
        return 1.0 + 2.0 * g * g / (g - 1.0);
      case Scenario::TwoAgentRandomized:
        return 1.0 + (1.0 + g) / std::log(g);
      case Scenario::Wireless:
        return cr_wireless_at_speed(speed_of(params), params.p);
    }
  } catch (const std::logic_error&) {
  }
  return std::nullopt;
}

// ---- verification ----

bool VerifyReport::passed() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

namespace {

CheckResult at_most(std::string name, double residual, double tolerance) {
  return {std::move(name), residual <= tolerance, residual, tolerance};
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

VerifyReport suite_appendix_c(const VerifyOptions&) {
  VerifyReport r{"appendix_c", {}};
  double closed_vs_system = 0, closed_vs_block = 0, residual = 0, boundary = 0;
  for (int i = 1; i <= 9; ++i) {
    const double p = 0.05 * i;
    for (double g : {2.0, optimal_g_det(p)}) {
      for (int t = 0; t <= 10; ++t) {
        const double n = target_distance(g, t, 0.5);
        const double closed = expected_time_det_closed(g, p, t, n).value;
        const DetSystemResult sys = expected_time_det_system(g, p, t, n);
        closed_vs_system = std::max(closed_vs_system, rel(closed, sys.expectation.value));
        closed_vs_block = std::max(closed_vs_block, rel(closed, expected_time_det_block_inverse(g, p, t, n).value));
        const SystemMatrices m = assemble_system(g, p, t + 1, 1.0, n);
        residual = std::max(residual, system_residual(m, sys.solution) / sys.expectation.value);
        const double lb = 2.0 * (1.0 - p) * std::pow(g, t + 1) / (1.0 - g * p) + n;
        boundary = std::max(boundary, rel(sys.solution.L_boundary, lb));
      }
    }
  }
  r.checks.push_back(at_most("closed_vs_system", closed_vs_system, 1e-9));
  r.checks.push_back(at_most("closed_vs_block_inverse", closed_vs_block, 1e-9));
  r.checks.push_back(at_most("system_row_residual", residual, 1e-9));
  r.checks.push_back(at_most("boundary_value", boundary, 1e-12));
  return r;
}

VerifyReport suite_appendix_d(const VerifyOptions& opts) {
  VerifyReport r{"appendix_d", {}};
  double closed_vs_system = 0, eps0 = 0;
  for (int i = 1; i <= 9; ++i) {
    const double p = 0.05 * i;
    for (double g : {2.0, optimal_g_rand(p)}) {
      for (int t = 0; t <= 6; ++t) {
        for (double delta : {0.25, 0.5, 1.0}) {
          const double n = target_distance(g, t, delta);
          const double closed = expected_time_rand_exact(g, p, t, delta, n).expectation.value;
          closed_vs_system = std::max(closed_vs_system, rel(closed, expected_time_rand_system(g, p, t, delta, n).value));
        }
        const double n = target_distance(g, t, 0.5);
        eps0 = std::max(eps0, rel(rand_r0_below(g, p, t, n, 0.0), expected_time_det_closed(g, p, t, n).value));
      }
    }
  }
  r.checks.push_back(at_most("closed_vs_system", closed_vs_system, 1e-9));
  r.checks.push_back(at_most("eps0_equals_deterministic", eps0, 1e-9));

  ScenarioParams sp;
  sp.p = 0.1;
  sp.g = 3.0;
  sp.target = target_distance(3.0, 1, 0.5);
  const Estimate e = estimate(Scenario::RandomizedTowards, sp, opts.trials, opts.seed, opts.parallelism);
  r.checks.push_back(at_most("monte_carlo_towards", std::abs(e.mean - *exact_mean(Scenario::RandomizedTowards, sp)),
                             3.0 * e.stderr_));
  return r;
}

VerifyReport suite_block_inverse(const VerifyOptions&) {
  VerifyReport r{"block_inverse", {}};
  double a_inv = 0, b_inv = 0, bp_row = 0;
  for (double p : {0.05, 0.1, 0.2, 0.3, 0.4, 0.45}) {
    for (int t = 0; t <= 10; ++t) {
      const Eigen::MatrixXd P = fault_matrix(p, t);
      const int m = t + 1;
      Eigen::MatrixXd A(2 * m, 2 * m);
      A << Eigen::MatrixXd::Identity(m, m), P, P, Eigen::MatrixXd::Identity(m, m);
      a_inv = std::max(a_inv, (A * block_inverse_closed(p, t) - Eigen::MatrixXd::Identity(2 * m, 2 * m)).cwiseAbs().maxCoeff());
      const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(m, m) - P * P;
      const Eigen::MatrixXd Binv = inverse_B_closed(p, t);
      b_inv = std::max(b_inv, (B * Binv - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff());
      const Eigen::MatrixXd BP = Binv * P;
      const std::vector<double> row = inverse_BP_row(p, t);
      for (int j = 0; j < m; ++j) bp_row = std::max(bp_row, std::abs(row[j] - BP(0, j)));
    }
  }
  r.checks.push_back(at_most("A_times_inverse", a_inv, 1e-10));
  r.checks.push_back(at_most("B_times_inverse", b_inv, 1e-12));
  r.checks.push_back(at_most("BP_first_row", bp_row, 1e-12));
  return r;
}

VerifyReport suite_thresholds(const VerifyOptions&) {
  VerifyReport r{"thresholds", {}};
  const Thresholds c = compute_thresholds();
  const Thresholds b = compute_thresholds_bisection();
  r.checks.push_back(at_most("p_det_g2", std::abs(c.p_det_g2 - 0.146447), 1e-5));
  r.checks.push_back(at_most("p0", std::abs(c.p0 - 0.241516), 1e-5));
  r.checks.push_back(at_most("p_det_cr9", std::abs(c.p_det_cr9 - 0.390388), 1e-5));
  r.checks.push_back(at_most("p_rand_cr9", std::abs(c.p_rand_cr9 - 0.436185), 1e-5));
  r.checks.push_back(at_most("p_wireless_459", std::abs(c.p_wireless_459 - 0.197063), 1e-5));
  const double agree = std::max({std::abs(c.p_det_g2 - b.p_det_g2), std::abs(c.p0 - b.p0), std::abs(c.p_det_cr9 - b.p_det_cr9),
                                 std::abs(c.p_rand_cr9 - b.p_rand_cr9), std::abs(c.p_wireless_459 - b.p_wireless_459)});
  r.checks.push_back(at_most("closed_vs_bisection", agree, 1e-8));
  const bool ordered = c.p_det_g2 < c.p_wireless_459 && c.p_wireless_459 < c.p0 && c.p0 < c.p_det_cr9 &&
                       c.p_det_cr9 < c.p_rand_cr9;
  r.checks.push_back({"ordering", ordered, ordered ? 0.0 : 1.0, 0.0});
  const LambertReference lw = lambert_reference();
  r.checks.push_back(at_most("lambert_cr", std::abs(lw.cr - 4.59112), 1e-5));
  return r;
}

}  // namespace

std::vector<double> figure1_grid() {
  std::vector<double> ps;
  for (int i = 1; i <= 49; ++i) ps.push_back(0.01 * i);
  return ps;
}

namespace {

VerifyReport suite_figure1(const VerifyOptions&) {
  VerifyReport r{"figure1", {}};
  const Figure1Tables tab = figure1_tables(figure1_grid());
  double rand_over_det = -1e300, g_det_rise = 0, g_rand_rise = 0, clamp_det = 0, clamp_rand = 0;
  for (std::size_t i = 0; i < tab.rows.size(); ++i) {
    const Figure1Row& row = tab.rows[i];
    rand_over_det = std::max(rand_over_det, row.rand_scaled - row.det_scaled);
    if (i > 0) {
      g_det_rise = std::max(g_det_rise, row.g_det - tab.rows[i - 1].g_det);
      g_rand_rise = std::max(g_rand_rise, row.g_rand - tab.rows[i - 1].g_rand);
    }
    if (row.p >= 0.146447) clamp_det = std::max(clamp_det, std::abs(row.g_det - 2.0));
    if (row.p >= 0.241516) clamp_rand = std::max(clamp_rand, std::abs(row.g_rand - 2.0));
  }
  r.checks.push_back(at_most("rand_minus_det", rand_over_det, 0.0));
  r.checks.push_back(at_most("g_det_increase", g_det_rise, 0.0));
  r.checks.push_back(at_most("g_rand_increase", g_rand_rise, 0.0));
  r.checks.push_back(at_most("g_det_clamp", clamp_det, 1e-12));
  r.checks.push_back(at_most("g_rand_clamp", clamp_rand, 1e-12));
  // before the clamp the factors are strictly above 2
  const bool above = optimal_g_det(0.146) > 2.0 && optimal_g_rand(0.2415) > 2.0;
  r.checks.push_back({"clamp_onset", above, above ? 0.0 : 1.0, 0.0});
  std::vector<double> tail;
  for (int i = 0; i <= 100; ++i) tail.push_back(0.4501 + (0.4999 - 0.4501) * i / 100.0);
  const Figure1Tables t2 = figure1_tables(tail);
  double worst = 0;
  for (const Figure1Row& row : t2.rows) worst = std::max({worst, row.det_scaled, row.rand_scaled});
  r.checks.push_back(at_most("scaled_tail_bound", worst, 1.0));
  return r;
}

VerifyReport suite_lemma7(const VerifyOptions& opts) {
  VerifyReport r{"lemma7", {}};
  const double gamma = 1e-3;
  for (double p : {0.1, 0.2, 0.3}) {
    const FaultProb fp(p);
    const Estimate dev = run_monte_carlo(opts.trials, opts.seed, opts.parallelism, [&](std::uint64_t, RandomStream& rng) {
      const TurnRecord t = simulated_turn(0.0, Direction::Right, gamma, fp, rng);
      return TrialValue{t.realized_point - t.intended_point, t.truncated};
    });
    const Estimate el = run_monte_carlo(opts.trials, opts.seed, opts.parallelism, [&](std::uint64_t, RandomStream& rng) {
      const TurnRecord t = simulated_turn(0.0, Direction::Right, gamma, fp, rng);
      return TrialValue{t.elapsed, t.truncated};
    });
    const std::string tag = "p=" + format_number(p);
    r.checks.push_back(at_most("turn_deviation " + tag, std::abs(dev.mean), 3.0 * dev.stderr_));
    r.checks.push_back(at_most("meeting_time " + tag, std::abs(el.mean - gamma / (1.0 - p)), 3.0 * el.stderr_));
  }
  return r;
}

}  // namespace

WirelessHalving wireless_halving(double p, double gamma, std::uint64_t trials, std::uint64_t seed, unsigned parallelism) {
  const double s = wireless_speed(p);
  const double xs = (5.0 + s) / (1.0 + s);
  const double xf = (5.0 - s) / (1.0 - s);
  auto run = [&](double gm) {
    TwoAgentConfig cfg;
    cfg.p = FaultProb(p);
    cfg.gamma = gm;
    cfg.comm = Comm::Wireless;
    // same seed for both gammas: identical fault draws
    return run_monte_carlo(trials, seed, parallelism, [&](std::uint64_t, RandomStream& rng) {
      const WirelessOutcome o = wireless_search(TargetPlacement::at(1.0), cfg, rng);
      const double fail = o.success_branch ? 0.0 : 1.0;
      return TrialValue{o.ratio - (fail - p) * (xf - xs), o.truncated};
    });
  };
  WirelessHalving h;
  const double cr = cr_wireless(p);
  const Estimate full = run(gamma);
  const Estimate half = run(gamma / 2.0);
  h.excess_full = full.mean - cr;
  h.excess_half = half.mean - cr;
  h.stderr_full = full.stderr_;
  h.stderr_half = half.stderr_;
  h.ratio = h.excess_half / h.excess_full;
  return h;
}

namespace {

VerifyReport suite_theorem5(const VerifyOptions& opts) {
  VerifyReport r{"theorem5", {}};
  for (double p : {0.1, 0.25}) {
    ScenarioParams sp;
    sp.p = p;
    sp.gamma = 1e-4;
    sp.target = 1.0;
    const Estimate e = estimate(Scenario::Wireless, sp, opts.trials, opts.seed, opts.parallelism);
    const std::string tag = "p=" + format_number(p);
    r.checks.push_back(at_most("mean_ratio " + tag, std::abs(e.mean - cr_wireless(p)), 0.02));
    r.checks.push_back(at_most("finite_gamma_mean " + tag, std::abs(e.mean - *exact_mean(Scenario::Wireless, sp)),
                               3.0 * e.stderr_));
    const WirelessHalving hv = wireless_halving(p, 1e-4, opts.trials, opts.seed, opts.parallelism);
    r.checks.push_back(at_most("gamma_halving " + tag, std::abs(hv.ratio - 0.5), 0.15));
  }
  return r;
}

VerifyReport suite_bits(const VerifyOptions& opts) {
  VerifyReport r{"bits", {}};
  const double tol = 1e-3;
  const std::uint64_t n_bits = std::max<std::uint64_t>(opts.trials, 1000);
  for (double p : {0.1, 0.3, 0.45}) {
    const AmplifierPlan plan = plan_amplifier(p, tol);
    RandomStream rng(derive_trial_seed(opts.seed, static_cast<std::uint64_t>(p * 1000)));
    std::uint64_t ones = 0;
    for (std::uint64_t done = 0; done < n_bits; done += 1000) {
      const HarvestReport h = harvest_bits(FaultProb(p), 1000, 1.0, rng, plan.k);
      for (int b : h.bits) ones += b;
    }
    const double total = static_cast<double>((n_bits + 999) / 1000 * 1000);
    const double sigma = 0.5 / std::sqrt(total);
    r.checks.push_back(at_most("bias p=" + format_number(p), std::abs(ones / total - 0.5), tol + 3.0 * sigma));
  }
  const AmplifierPlan plan = plan_amplifier(0.3, tol);
  std::vector<double> xs;
  RandomStream rng(derive_trial_seed(opts.seed, 7));
  for (int i = 0; i < 10000; ++i) xs.push_back(uniform_from_bits(harvest_bits(FaultProb(0.3), 32, 1e-12, rng, plan.k).bits));
  std::sort(xs.begin(), xs.end());
  double d = 0;
  const double m = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) d = std::max({d, (i + 1) / m - xs[i], xs[i] - i / m});
  r.checks.push_back(at_most("uniform_ks", d, 1.62762 / std::sqrt(m)));
  return r;
}

const std::map<std::string, VerifyReport (*)(const VerifyOptions&)>& suites() {
  static const std::map<std::string, VerifyReport (*)(const VerifyOptions&)> m = {
      {"appendix_c", suite_appendix_c}, {"appendix_d", suite_appendix_d}, {"block_inverse", suite_block_inverse},
      {"thresholds", suite_thresholds}, {"figure1", suite_figure1},       {"lemma7", suite_lemma7},
      {"theorem5", suite_theorem5},     {"bits", suite_bits},
  };
  return m;
}

}  // namespace

std::vector<std::string> verify_suites() {
  return {"appendix_c", "appendix_d", "block_inverse", "thresholds", "figure1", "lemma7", "theorem5", "bits"};
}

VerifyReport verify(const std::string& suite, const VerifyOptions& opts) {
  const auto it = suites().find(suite);
  if (it == suites().end()) throw std::invalid_argument("unknown verify suite: " + suite);
  return it->second(opts);
}

// ---- sweeps ----

OutputFormat parse_format(const std::string& name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  throw std::invalid_argument("unknown format: " + name);
}

const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols = {
      "scenario", "p",           "g",          "t",          "delta",     "n",           "gamma",    "trials",
      "seed",     "mean",        "stderr",     "ci95_lo",    "ci95_hi",   "n_truncated", "ratio",    "ratio_stderr",
      "exact_mean", "exact_ratio", "cr_reference", "det_scaled", "rand_scaled", "g_det", "g_rand"};
  return cols;
}

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

namespace {

enum Col { kP, kG, kT, kDelta, kN, kGamma, kTrials, kSeed, kMean, kStderr, kLo, kHi, kTrunc, kRatio, kRatioStderr,
           kExact, kExactRatio, kCr, kDetScaled, kRandScaled, kGDet, kGRand, kNumCols };

}  // namespace

SweepTable run_sweep(const SweepSpec& spec) {
  if (spec.p.empty()) throw std::invalid_argument("sweep: empty p grid");
  SweepTable table;
  auto add = [&](const std::string& scenario, std::vector<std::optional<double>> row,
                 std::optional<std::uint64_t> seed = std::nullopt) {
    for (const auto& v : row)
      if (v && !std::isfinite(*v)) throw std::runtime_error("sweep: non-finite value in scenario " + scenario);
    table.scenario.push_back(scenario);
    table.seed.push_back(seed);
    table.rows.push_back(std::move(row));
  };

  if (spec.scenario == "figure1") {
    const Figure1Tables f = figure1_tables(spec.p);
    for (const Figure1Row& r : f.rows) {
      std::vector<std::optional<double>> row(kNumCols);
      row[kP] = r.p;
      row[kDetScaled] = r.det_scaled;
      row[kRandScaled] = r.rand_scaled;
      row[kGDet] = r.g_det;
      row[kGRand] = r.g_rand;
      add("figure1", std::move(row));
    }
    return table;
  }

  const Scenario sc = parse_scenario(spec.scenario);
  if (spec.t.empty() || spec.delta.empty() || spec.gamma.empty()) throw std::invalid_argument("sweep: empty grid");
  if (spec.trials < 2) throw std::invalid_argument("sweep: trials must be >= 2");
  std::uint64_t cell = 0;
  for (double p : spec.p) {
    const std::vector<double> gs = spec.g.empty() ? std::vector<double>{default_g(sc, p)} : spec.g;
    for (double g : gs)
      for (int t : spec.t)
        for (double delta : spec.delta)
          for (double gamma : spec.gamma) {
            ScenarioParams sp;
            sp.p = p;
            sp.g = g;
            sp.gamma = gamma;
            sp.gamma_decay = spec.gamma_decay;
            sp.fail_cap = spec.fail_cap;
            const double n = target_distance(g, t, delta);
            sp.target = sign(spec.side) * n;
            const std::uint64_t seed = derive_trial_seed(spec.seed, cell++);
            const Estimate e = estimate(sc, sp, spec.trials, seed, spec.parallelism);
            std::vector<std::optional<double>> row(kNumCols);
            row[kP] = p;
            row[kG] = g;
            row[kT] = t;
            row[kDelta] = delta;
            row[kN] = n;
            if (sc == Scenario::TwoAgentZigzag || sc == Scenario::TwoAgentRandomized || sc == Scenario::Wireless) row[kGamma] = gamma;
            row[kTrials] = static_cast<double>(spec.trials);
            row[kMean] = e.mean;
            row[kStderr] = e.stderr_;
            row[kLo] = e.ci95_lo;
            row[kHi] = e.ci95_hi;
            row[kTrunc] = static_cast<double>(e.n_truncated);
            row[kRatio] = e.mean / n;
            row[kRatioStderr] = e.stderr_ / n;
            if (auto ex = exact_mean(sc, sp)) {
              row[kExact] = *ex;
              row[kExactRatio] = *ex / n;
            }
            row[kCr] = cr_reference(sc, sp);
            add(to_string(sc), std::move(row), seed);
          }
  }
  return table;
}

namespace {

std::string cell_text(const SweepTable& table, std::size_t r, std::size_t col) {
  if (col == kSeed) return table.seed[r] ? std::to_string(*table.seed[r]) : "";
  const std::optional<double>& v = table.rows[r][col];
  if (!v) return "";
  if (col == kT || col == kTrials || col == kTrunc) return std::to_string(static_cast<long long>(*v));
  return format_number(*v);
}

}  // namespace

std::string format_csv(const SweepTable& table) {
  std::ostringstream out;
  const auto& cols = sweep_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out << table.scenario[r];
    for (std::size_t c = 0; c < table.rows[r].size(); ++c) out << "," << cell_text(table, r, c);
    out << "\n";
  }
  return out.str();
}

std::string format_json(const SweepTable& table) {
  const auto& cols = sweep_columns();
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    nlohmann::ordered_json obj;
    obj[cols[0]] = table.scenario[r];
    for (std::size_t c = 0; c < table.rows[r].size(); ++c) {
      const auto& v = table.rows[r][c];
      if (c == kSeed) {
        if (table.seed[r]) obj[cols[c + 1]] = *table.seed[r];
        else obj[cols[c + 1]] = nullptr;
      } else if (!v) {
        obj[cols[c + 1]] = nullptr;
      } else if (c == kT || c == kTrials || c == kTrunc) {
        obj[cols[c + 1]] = static_cast<long long>(*v);
      } else {
        obj[cols[c + 1]] = std::stod(format_number(*v));
      }
    }
    arr.push_back(std::move(obj));
  }
  return arr.dump(1) + "\n";
}

void sweep(const SweepSpec& spec, const std::string& path) {
  const SweepTable table = run_sweep(spec);
  const std::string text = spec.format == OutputFormat::Csv ? format_csv(table) : format_json(table);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("sweep: cannot write " + path);
  f << text;
  if (!f) throw std::runtime_error("sweep: write failed for " + path);
}

}  // namespace faultsearch
