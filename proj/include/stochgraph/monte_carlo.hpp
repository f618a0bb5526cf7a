#pragma once

// Seeded Monte Carlo estimation with Chernoff-sized budgets.
//
// Sample i of a term always reads substream (seed, tag, i). Samples are
// grouped in fixed-size chunks, each chunk summed sequentially, and chunk sums
// reduced pairwise, so the mean is bit-identical for any thread count.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "stochgraph/exact_oracle.hpp"
#include "stochgraph/rng.hpp"
#include "stochgraph/stochastic_graph.hpp"

namespace stochgraph {

/// Sample count sized by the Chernoff bound for values in [0, upper] with mean >= mu_lower.
struct SampleBudget {
  std::uint64_t samples = 1;
  double upper = 0.0;
  double mu_lower = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
};

/// Smallest N with 2 exp(-N (mu/U) eps^2 / 4) <= delta, i.e.
/// N = ceil(4 U ln(2/delta) / (mu eps^2)). Throws DomainError unless
/// U >= mu_lower > 0, epsilon > 0 and 0 < delta < 1.
std::uint64_t chernoff_budget(double upper, double mu_lower, double epsilon, double delta);

SampleBudget make_budget(double upper, double mu_lower, double epsilon, double delta);

/// max(1, ceil(samples * scale)).
std::uint64_t scaled_samples(std::uint64_t samples, double scale);

inline constexpr std::uint64_t kChunkSize = 1024;

/// Sum of values[i] by pairwise halving; the split points depend only on size.
double pairwise_sum(std::span<const double> values);

/// Mean of fn(i, rng_i) over i in [0, count), with rng_i = Substream(key, i).
/// fn must be safe to call concurrently. Exceptions thrown by fn propagate.
template <class SampleFn>
double parallel_mean(std::uint64_t count, StreamKey key, unsigned threads, SampleFn&& fn) {
  if (count == 0) return 0.0;
  const std::uint64_t chunks = (count + kChunkSize - 1) / kChunkSize;
  std::vector<double> chunk_sums(chunks, 0.0);
  auto run_chunk = [&](std::uint64_t c) {
    const std::uint64_t begin = c * kChunkSize;
    const std::uint64_t end = std::min(count, begin + kChunkSize);
    double sum = 0.0;
    for (std::uint64_t i = begin; i < end; ++i) {
      Substream rng(key, i);
      sum += fn(i, rng);
    }
    chunk_sums[c] = sum;
  };
  const auto workers = static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, threads), chunks));
  if (workers == 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
          try {
            for (std::uint64_t c = t; c < chunks; c += workers) run_chunk(c);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return pairwise_sum(chunk_sums) / static_cast<double>(count);
}

/// Per-sample hook: receives each sampled realization and its value. Must be
/// thread-safe; throwing aborts the estimate.
using SampleObserver = std::function<void(std::span<const Location>, double)>;

struct ConditionalMean {
  double mean = 0.0;
  std::uint64_t samples = 0;
};

/// Mean of f over `samples` draws from g conditioned on `event`.
ConditionalMean estimate_conditional(const StochasticGraph& g, Functional f, const EventSpec& event,
                                     std::uint64_t samples, StreamKey key, unsigned threads = 1,
                                     const SampleObserver& observer = {});

// ---------------------------------------------------------------------------
// Estimator configuration and reports

struct EstimateOptions {
  double epsilon = 0.25;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  /// Multiplies every Monte Carlo budget. Values below 1 void the guarantee.
  double budget_scale = 1.0;
  /// Per-sample structural assertions (sandwich bounds and the like).
  bool check_invariants = true;
  /// Constant c in the per-pair cycle-cover budget c n^2 m^3 (ln n + ln m) / eps^3.
  double cc_budget_constant = 4.0;
};

enum class TermMethod { exact, monte_carlo, far_field };

std::string_view to_string(TermMethod m) noexcept;

struct TermReport {
  std::string name;
  double value = 0.0;
  TermMethod method = TermMethod::exact;
  double probability = 0.0;        // exact weight of the conditioning event
  double conditional_mean = 0.0;   // E[f | event] estimate (or surrogate)
  std::uint64_t samples = 0;       // samples actually drawn
  std::optional<SampleBudget> budget;  // full-guarantee budget, monte-carlo terms only
  std::vector<std::string> flags;
};

/// One ordered-pair term of the cycle-cover estimator.
struct PairTerm {
  std::string s;  // point ids in the split space
  std::string t;
  std::string v;  // node ids
  std::string u;
  bool mutual = false;
  double prob_ns_t = 0.0;
  double estimate = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t indicator_hits = 0;
};

struct EstimateReport {
  static constexpr int kSchemaVersion = 1;

  std::string estimator;
  double value = 0.0;
  std::vector<TermReport> terms;
  std::vector<PairTerm> pairs;
  double epsilon = 0.0;
  double epsilon_sampling = 0.0;
  double epsilon_truncation = 0.0;
  std::uint64_t seed = 0;
  double budget_scale = 1.0;
  std::uint64_t samples_used = 0;
  std::uint64_t samples_full = 0;
  std::vector<std::string> notes;
  std::chrono::duration<double> elapsed{0.0};

  /// Sets value to the sum of term values (fixed order) and totals sample counts.
  void finalize();
};

/// Appends a "budget scale" warning to the report when scale < 1.
void note_budget_scale(EstimateReport& report);

}  // namespace stochgraph
