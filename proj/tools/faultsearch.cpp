// faultsearch command line: analyze, simulate, sweep, verify, bits.
//
// Exit codes: 0 ok, 1 verification or harness failure, 2 usage error.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "faultsearch/analysis.hpp"
#include "faultsearch/bitforge.hpp"
#include "faultsearch/harness.hpp"
#include "faultsearch/single_search.hpp"
#include "json.hpp"

using namespace faultsearch;
using json = nlohmann::ordered_json;

namespace {

json num(double x) { return std::isfinite(x) ? json(std::stod(format_number(x))) : json(nullptr); }

json num(const std::optional<double>& x) { return x ? num(*x) : json(nullptr); }

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

json thresholds_json() {
  const Thresholds th = compute_thresholds();
  return {{"p_det_g2", num(th.p_det_g2)},
          {"p0", num(th.p0)},
          {"p_det_cr9", num(th.p_det_cr9)},
          {"p_rand_cr9", num(th.p_rand_cr9)},
          {"p_wireless_459", num(th.p_wireless_459)}};
}

int run_analyze(double p, const std::optional<double>& g) {
  json out;
  out["p"] = num(p);
  out["optimal_g_det"] = num(optimal_g_det(p));
  out["optimal_g_rand"] = num(optimal_g_rand(p));
  out["cr_det"] = num(cr_theorem_det(p));
  out["cr_rand"] = num(cr_theorem_rand(p));
  out["cr_det_scaled"] = num((0.5 - p) * cr_theorem_det(p));
  out["cr_rand_scaled"] = num((0.5 - p) * cr_theorem_rand(p));
  out["wireless_speed"] = num(wireless_speed(p));
  out["cr_wireless"] = num(cr_wireless(p));
  if (g) {
    out["g"] = num(*g);
    out["f_det"] = num(f_det(*g, p));
    out["f_rand"] = num(f_rand(*g, p));
    out["h"] = num(h(*g, p));
  }
  const LambertReference lw = lambert_reference();
  out["lambert_g"] = num(lw.w);
  out["lambert_cr"] = num(lw.cr);
  out["thresholds"] = thresholds_json();
  print(out);
  return 0;
}

struct SimArgs {
  std::string scenario = "det";
  double p = 0.2;
  std::optional<double> g;
  double target = 5.0;
  std::optional<int> t;
  double delta = 0.5;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  double gamma = 1e-3;
  double gamma_decay = 0.5;
  std::optional<double> speed;
  unsigned parallelism = 0;
  int fail_cap = 0;
  int bits = 32;
};

int run_simulate(const SimArgs& a) {
  const Scenario sc = parse_scenario(a.scenario);
  ScenarioParams sp;
  sp.p = a.p;
  sp.g = a.g;
  sp.gamma = a.gamma;
  sp.gamma_decay = a.gamma_decay;
  sp.speed = a.speed;
  sp.fail_cap = a.fail_cap;
  sp.bit_budget = a.bits;
  sp.target = a.target;
  const double g = a.g ? *a.g : default_g(sc, a.p);
  if (a.t) sp.target = (a.target < 0 ? -1.0 : 1.0) * target_distance(g, *a.t, a.delta);
  const Estimate e = estimate(sc, sp, a.trials, a.seed, a.parallelism);
  const double n = std::abs(sp.target);
  json out;
  out["scenario"] = to_string(sc);
  out["p"] = num(a.p);
  out["g"] = num(g);
  out["target"] = num(sp.target);
  out["trials"] = e.n_trials;
  out["n_truncated"] = e.n_truncated;
  out["seed"] = e.master_seed;
  out["mean"] = num(e.mean);
  out["stderr"] = num(e.stderr_);
  out["ci95"] = {num(e.ci95_lo), num(e.ci95_hi)};
  out["ratio"] = num(e.mean / n);
  out["ratio_stderr"] = num(e.stderr_ / n);
  const std::optional<double> ex = exact_mean(sc, sp);
  out["exact_mean"] = num(ex);
  out["exact_ratio"] = ex ? num(*ex / n) : json(nullptr);
  out["cr_reference"] = num(cr_reference(sc, sp));
  print(out);
  return 0;
}

int run_verify(const std::vector<std::string>& requested, const VerifyOptions& opts) {
  const std::vector<std::string> names = requested.empty() ? verify_suites() : requested;
  json out = json::array();
  bool ok = true;
  for (const std::string& name : names) {
    const VerifyReport r = verify(name, opts);
    json checks = json::array();
    for (const CheckResult& c : r.checks)
      checks.push_back({{"name", c.name}, {"pass", c.pass}, {"residual", num(c.residual)}, {"tolerance", num(c.tolerance)}});
    out.push_back({{"suite", r.suite}, {"pass", r.passed()}, {"checks", checks}});
    ok = ok && r.passed();
  }
  print(out);
  return ok ? 0 : 1;
}

int run_bits(double p, int n_bits, double zeta, double tolerance, std::uint64_t seed) {
  const AmplifierPlan plan = plan_amplifier(p, tolerance);
  RandomStream rng(seed);
  const HarvestReport h = harvest_bits(FaultProb(p), n_bits, zeta, rng, plan.k);
  std::string bits;
  for (int b : h.bits) bits += static_cast<char>('0' + b);
  json out;
  out["p"] = num(p);
  out["k"] = plan.k;
  out["q_k"] = num(plan.q_k);
  out["per_bit_bias"] = num(h.per_bit_bias);
  out["bits"] = bits;
  out["uniform"] = num(uniform_from_bits(h.bits));
  out["elapsed"] = num(h.elapsed);
  out["max_excursion"] = num(h.max_excursion);
  out["excursion_bound"] = num(std::ldexp(zeta, n_bits));
  out["final_distance"] = num(h.final_distance);
  out["turn_attempts"] = h.turn_attempts;
  print(out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Search on a line with p-faulty turns"};
  app.require_subcommand(1);

  double p = 0.2;
  std::optional<double> g;

  auto* analyze = app.add_subcommand("analyze", "closed forms, optimal expansion factors and thresholds for p");
  analyze->add_option("--p", p, "fault probability")->required();
  analyze->add_option("--g", g, "expansion factor for f_det / f_rand / h");

  SimArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate for one scenario");
  simulate->add_option("--scenario", sim.scenario, "det | rand | rand-towards | harvested | two-agent | two-agent-rand | wireless")
      ->capture_default_str();
  simulate->add_option("--p", sim.p)->capture_default_str();
  simulate->add_option("--g", sim.g, "expansion factor (default depends on the scenario)");
  simulate->add_option("--target", sim.target, "signed target position")->capture_default_str();
  simulate->add_option("--t", sim.t, "place the target at g^(t+delta)");
  simulate->add_option("--delta", sim.delta)->capture_default_str();
  simulate->add_option("--trials", sim.trials)->capture_default_str();
  simulate->add_option("--seed", sim.seed)->capture_default_str();
  simulate->add_option("--gamma", sim.gamma)->capture_default_str();
  simulate->add_option("--gamma-decay", sim.gamma_decay)->capture_default_str();
  simulate->add_option("--speed", sim.speed, "wireless follower speed");
  simulate->add_option("--parallelism", sim.parallelism, "0: all cores")->capture_default_str();
  simulate->add_option("--fail-cap", sim.fail_cap, "0: default")->capture_default_str();
  simulate->add_option("--bits", sim.bits, "bit budget for harvesting scenarios")->capture_default_str();

  SweepSpec spec;
  std::string sweep_scenario = "figure1";
  std::string format = "csv";
  std::string out_path;
  std::vector<double> sweep_p, sweep_g, sweep_delta, sweep_gamma;
  std::vector<int> sweep_t;
  std::string side = "right";
  auto* sw = app.add_subcommand("sweep", "grid of estimates written as CSV or JSON");
  sw->add_option("--scenario", sweep_scenario, "figure1 or a simulate scenario")->capture_default_str();
  sw->add_option("--p", sweep_p, "comma-separated (figure1 default: 0.01..0.49)")->delimiter(',');
  sw->add_option("--g", sweep_g, "comma-separated")->delimiter(',');
  sw->add_option("--t", sweep_t, "comma-separated")->delimiter(',');
  sw->add_option("--delta", sweep_delta, "comma-separated")->delimiter(',');
  sw->add_option("--gamma", sweep_gamma, "comma-separated")->delimiter(',');
  sw->add_option("--gamma-decay", spec.gamma_decay)->capture_default_str();
  sw->add_option("--side", side, "right | left")->check(CLI::IsMember({"right", "left"}))->capture_default_str();
  sw->add_option("--trials", spec.trials)->capture_default_str();
  sw->add_option("--seed", spec.seed)->capture_default_str();
  sw->add_option("--parallelism", spec.parallelism)->capture_default_str();
  sw->add_option("--fail-cap", spec.fail_cap)->capture_default_str();
  sw->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  sw->add_option("--out", out_path, "output file")->required();

  std::vector<std::string> suites;
  VerifyOptions vopts;
  auto* ver = app.add_subcommand("verify", "run verification suites; exit 1 on any failure");
  ver->add_option("--suite", suites, "suite name, repeatable (default: all)")->check(CLI::IsMember(verify_suites()));
  ver->add_option("--trials", vopts.trials, "Monte Carlo trials per check")->capture_default_str();
  ver->add_option("--seed", vopts.seed)->capture_default_str();
  ver->add_option("--parallelism", vopts.parallelism)->capture_default_str();

  int n_bits = 32;
  double zeta = 1e-12, tolerance = 1e-3;
  std::uint64_t bits_seed = 1;
  auto* bits = app.add_subcommand("bits", "harvest random bits from faulty turns");
  bits->add_option("--p", p)->capture_default_str();
  bits->add_option("--bits", n_bits)->capture_default_str();
  bits->add_option("--zeta", zeta)->capture_default_str();
  bits->add_option("--tolerance", tolerance, "per-bit bias target")->capture_default_str();
  bits->add_option("--seed", bits_seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*analyze) return run_analyze(p, g);
    if (*simulate) return run_simulate(sim);
    if (*ver) return run_verify(suites, vopts);
    if (*bits) return run_bits(p, n_bits, zeta, tolerance, bits_seed);
    if (*sw) {
      spec.scenario = sweep_scenario;
      spec.p = sweep_p.empty() && sweep_scenario == "figure1" ? figure1_grid() : sweep_p;
      spec.g = sweep_g;
      if (!sweep_t.empty()) spec.t = sweep_t;
      if (!sweep_delta.empty()) spec.delta = sweep_delta;
      if (!sweep_gamma.empty()) spec.gamma = sweep_gamma;
      spec.side = side == "left" ? Direction::Left : Direction::Right;
      spec.format = parse_format(format);
      sweep(spec, out_path);
      return 0;
    }
  } catch (const std::logic_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
