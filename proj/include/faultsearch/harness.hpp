// Scenario runner, verification suites and sweep emission behind the CLI.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "faultsearch/montecarlo.hpp"

namespace faultsearch {

enum class Scenario {
  Deterministic,       // single agent, exponent 0, heading right
  Randomized,          // single agent, random exponent and direction
  RandomizedTowards,   // random exponent, heading towards the target
  Harvested,           // deterministic agent harvesting its own randomness
  TwoAgentZigzag,
  TwoAgentRandomized,
  Wireless,
};

Scenario parse_scenario(const std::string& name);
const char* to_string(Scenario s);
std::vector<std::string> scenario_names();

struct ScenarioParams {
  double p = 0.2;
  std::optional<double> g;  // default depends on the scenario, see default_g
  double target = 5.0;      // signed position
  double gamma = 1e-3;
  double gamma_decay = 0.5;
  std::optional<double> speed;
  int fail_cap = 0;
  int bit_budget = 32;
};

/// det: optimal_g_det(p); randomized and harvested: optimal_g_rand(p);
/// two-agent zig-zag: 2; two-agent randomized: 1/W(1/e); wireless: 2 (only
/// used to place targets from (t, delta)).
double default_g(Scenario s, double p);

/// Estimate of the termination time.
Estimate estimate(Scenario s, const ScenarioParams& params, std::uint64_t trials, std::uint64_t master_seed,
                  unsigned parallelism = 0);

/// Exact expected termination time where one is available.
std::optional<double> exact_mean(Scenario s, const ScenarioParams& params);

/// Asymptotic competitive ratio the scenario is compared against.
std::optional<double> cr_reference(Scenario s, const ScenarioParams& params);

// ---- verification ----

struct CheckResult {
  std::string name;
  bool pass = false;
  double residual = 0.0;
  double tolerance = 0.0;
};

struct VerifyReport {
  std::string suite;
  std::vector<CheckResult> checks;
  bool passed() const;
};

struct VerifyOptions {
  std::uint64_t trials = 100000;  // Monte Carlo suites
  std::uint64_t seed = 1;
  unsigned parallelism = 0;
};

std::vector<std::string> verify_suites();

/// p = 0.01, 0.02, ..., 0.49
std::vector<double> figure1_grid();

/// Excess of the wireless mean ratio over 3 + 4 sqrt(p(1-p)) at gamma and
/// gamma/2 (target at distance 1). Both runs share the seed, so they see the
/// same fault draws, and the branch indicator is used as a control variate:
/// ratio - (1[failure] - p)(X_f - X_s) with X_s, X_f the gamma -> 0 branch ratios.
struct WirelessHalving {
  double excess_full = 0.0;
  double excess_half = 0.0;
  double stderr_full = 0.0;
  double stderr_half = 0.0;
  double ratio = 0.0;  // excess_half / excess_full, 1/2 when the excess is linear in gamma
};
WirelessHalving wireless_halving(double p, double gamma, std::uint64_t trials, std::uint64_t seed,
                                 unsigned parallelism = 0);

/// Throws std::invalid_argument for an unknown suite.
VerifyReport verify(const std::string& suite, const VerifyOptions& opts = {});

// ---- sweeps ----

enum class OutputFormat { Csv, Json };

OutputFormat parse_format(const std::string& name);

struct SweepSpec {
  std::string scenario;  // a Scenario name or "figure1"
  std::vector<double> p;
  std::vector<double> g;  // empty: default_g per p
  std::vector<int> t{2};
  std::vector<double> delta{0.5};
  std::vector<double> gamma{1e-3};
  double gamma_decay = 0.5;
  Direction side = Direction::Right;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  unsigned parallelism = 0;
  int fail_cap = 0;
  OutputFormat format = OutputFormat::Csv;
};

/// Fixed column order shared by every scenario.
const std::vector<std::string>& sweep_columns();

struct SweepTable {
  std::vector<std::string> scenario;                    // per row
  std::vector<std::optional<std::uint64_t>> seed;        // per row
  std::vector<std::vector<std::optional<double>>> rows;  // sweep_columns() minus "scenario"; seed slot unused
};

/// Evaluates every cell. Throws std::invalid_argument for an empty grid and
/// std::runtime_error if any cell is not finite.
SweepTable run_sweep(const SweepSpec& spec);

std::string format_csv(const SweepTable& table);
std::string format_json(const SweepTable& table);

/// Runs the sweep and writes it; nothing is written when the sweep fails.
void sweep(const SweepSpec& spec, const std::string& path);

/// %.12g
std::string format_number(double x);

}  // namespace faultsearch
