// Seeded, scheduler-independent Monte Carlo estimation.
//
// Trials are grouped into fixed-size blocks. Each block is simulated by
// whichever worker claims it, but its moment accumulator is merged into the
// total in block order, so every reported number depends only on
// (trials, master_seed) and never on the thread count.

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "faultsearch/core.hpp"

namespace faultsearch {

/// One-pass mean/variance (Welford), mergeable with Chan's pairwise update.
class MomentAccumulator {
 public:
  void add(double x);
  void merge(const MomentAccumulator& other);

  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  /// Unbiased sample variance; zero for fewer than two samples.
  double variance() const;
  double stderr_of_mean() const;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  double ci95_lo = 0.0;
  double ci95_hi = 0.0;
  std::uint64_t n_trials = 0;      // trials requested
  std::uint64_t n_truncated = 0;   // excluded from the moments
  std::uint64_t master_seed = 0;

  std::uint64_t n_used() const { return n_trials - n_truncated; }
};

Estimate make_estimate(const MomentAccumulator& acc, std::uint64_t n_trials,
                       std::uint64_t n_truncated, std::uint64_t master_seed);

struct TrialValue {
  double value = 0.0;
  bool truncated = false;
};

using TrialFn = std::function<TrialValue(std::uint64_t trial_index, RandomStream& rng)>;

/// Worker count used when `parallelism` is 0: hardware concurrency, capped by
/// the FAULTSEARCH_THREADS environment variable when it is set.
unsigned default_parallelism();

/// Runs `trials` independent trials of `fn`, trial i seeded with
/// derive_trial_seed(master_seed, i).
Estimate run_monte_carlo(std::uint64_t trials, std::uint64_t master_seed, unsigned parallelism,
                         const TrialFn& fn);

/// Same seeding contract, but returns every per-trial value in index order.
std::vector<TrialValue> collect_trials(std::uint64_t trials, std::uint64_t master_seed,
                                       unsigned parallelism, const TrialFn& fn);

}  // namespace faultsearch
