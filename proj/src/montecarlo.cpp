#include "faultsearch/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

namespace faultsearch {

void MomentAccumulator::add(double x) {
  ++n_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

void MomentAccumulator::merge(const MomentAccumulator& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(o.n_);
  const double n = na + nb;
  const double d = o.mean_ - mean_;
  mean_ += d * nb / n;
  m2_ += o.m2_ + d * d * na * nb / n;
  n_ += o.n_;
}

double MomentAccumulator::variance() const {
  return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

double MomentAccumulator::stderr_of_mean() const {
  return n_ < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(n_));
}

Estimate make_estimate(const MomentAccumulator& acc, std::uint64_t n_trials,
                       std::uint64_t n_truncated, std::uint64_t master_seed) {
  Estimate e;
  e.mean = acc.mean();
  e.stderr_ = acc.stderr_of_mean();
  e.ci95_lo = e.mean - 1.96 * e.stderr_;
  e.ci95_hi = e.mean + 1.96 * e.stderr_;
  e.n_trials = n_trials;
  e.n_truncated = n_truncated;
  e.master_seed = master_seed;
  return e;
}

unsigned default_parallelism() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FAULTSEARCH_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    } catch (const std::exception&) {
      // unparsable cap: ignore
    }
  }
  return n;
}

namespace {

constexpr std::uint64_t kBlock = 4096;

// Runs `body(block_index)` for every block, spreading blocks over workers.
template <class Body>
void for_each_block(std::uint64_t n_blocks, unsigned parallelism, Body&& body) {
  unsigned workers = parallelism == 0 ? default_parallelism() : parallelism;
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(n_blocks, 1)));
  if (workers <= 1) {
    for (std::uint64_t b = 0; b < n_blocks; ++b) body(b);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::uint64_t b = next.fetch_add(1);
        if (b >= n_blocks || failed.load()) return;
        try {
          body(b);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

Estimate run_monte_carlo(std::uint64_t trials, std::uint64_t master_seed, unsigned parallelism,
                         const TrialFn& fn) {
  const std::uint64_t n_blocks = (trials + kBlock - 1) / kBlock;
  std::vector<MomentAccumulator> acc(n_blocks);
  std::vector<std::uint64_t> truncated(n_blocks, 0);
  for_each_block(n_blocks, parallelism, [&](std::uint64_t b) {
    const std::uint64_t lo = b * kBlock;
    const std::uint64_t hi = std::min(trials, lo + kBlock);
    for (std::uint64_t i = lo; i < hi; ++i) {
      RandomStream rng(derive_trial_seed(master_seed, i));
      const TrialValue v = fn(i, rng);
      if (v.truncated) {
        ++truncated[b];
      } else {
        acc[b].add(v.value);
      }
    }
  });
  MomentAccumulator total;
  std::uint64_t n_trunc = 0;
  for (std::uint64_t b = 0; b < n_blocks; ++b) {
    total.merge(acc[b]);
    n_trunc += truncated[b];
  }
  return make_estimate(total, trials, n_trunc, master_seed);
}

std::vector<TrialValue> collect_trials(std::uint64_t trials, std::uint64_t master_seed,
                                       unsigned parallelism, const TrialFn& fn) {
  std::vector<TrialValue> out(trials);
  const std::uint64_t n_blocks = (trials + kBlock - 1) / kBlock;
  for_each_block(n_blocks, parallelism, [&](std::uint64_t b) {
    const std::uint64_t lo = b * kBlock;
    const std::uint64_t hi = std::min(trials, lo + kBlock);
    for (std::uint64_t i = lo; i < hi; ++i) {
      RandomStream rng(derive_trial_seed(master_seed, i));
      out[i] = fn(i, rng);
    }
  });
  return out;
}

}  // namespace faultsearch
