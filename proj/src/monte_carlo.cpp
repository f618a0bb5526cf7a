#include "stochgraph/monte_carlo.hpp"

#include <cmath>
#include <limits>

#include "stochgraph/errors.hpp"

namespace stochgraph {

std::uint64_t chernoff_budget(double upper, double mu_lower, double epsilon, double delta) {
  if (!(mu_lower > 0.0)) throw DomainError("chernoff_budget: mean lower bound must be positive");
  if (!(upper >= mu_lower)) throw DomainError("chernoff_budget: upper bound below mean lower bound");
  if (!(epsilon > 0.0)) throw DomainError("chernoff_budget: epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("chernoff_budget: delta must lie in (0,1)");
  const double n = std::ceil(4.0 * upper * std::log(2.0 / delta) / (mu_lower * epsilon * epsilon));
  if (!(n < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(n));
}

SampleBudget make_budget(double upper, double mu_lower, double epsilon, double delta) {
  return {chernoff_budget(upper, mu_lower, epsilon, delta), upper, mu_lower, epsilon, delta};
}

std::uint64_t scaled_samples(std::uint64_t samples, double scale) {
  if (!(scale > 0.0)) throw DomainError("budget scale must be positive");
  const double n = std::ceil(static_cast<double>(samples) * scale);
  if (!(n < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(n));
}

double pairwise_sum(std::span<const double> values) {
  if (values.empty()) return 0.0;
  if (values.size() == 1) return values[0];
  if (values.size() == 2) return values[0] + values[1];
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

ConditionalMean estimate_conditional(const StochasticGraph& g, Functional f, const EventSpec& event,
                                     std::uint64_t samples, StreamKey key, unsigned threads,
                                     const SampleObserver& observer) {
  const ConditionalSampler sampler(g, event);
  const MetricSpace& space = g.space();
  const std::size_t n = g.node_count();
  const double mean = parallel_mean(samples, key, threads, [&](std::uint64_t, Substream& rng) {
    thread_local std::vector<Location> loc;
    loc.resize(n);
    sampler.draw(rng, loc);
    const double value = evaluate(f, space, loc);
    if (observer) observer(loc, value);
    return value;
  });
  return {mean, samples};
}

std::string_view to_string(TermMethod m) noexcept {
  switch (m) {
    case TermMethod::exact: return "exact";
    case TermMethod::monte_carlo: return "monte-carlo";
    case TermMethod::far_field: return "far-field";
  }
  return "unknown";
}

void EstimateReport::finalize() {
  value = 0.0;
  samples_used = 0;
  samples_full = 0;
  for (const auto& term : terms) {
    value += term.value;
    samples_used += term.samples;
    if (!term.budget) continue;
    const auto room = std::numeric_limits<std::uint64_t>::max() - samples_full;
    samples_full = term.budget->samples > room ? std::numeric_limits<std::uint64_t>::max()
                                               : samples_full + term.budget->samples;
  }
}

void note_budget_scale(EstimateReport& report) {
  if (report.budget_scale < 1.0) {
    report.notes.push_back("WARNING: budget scale " + std::to_string(report.budget_scale) +
                           " < 1; Monte Carlo budgets are below the Chernoff sizing and the (1 +/- eps) "
                           "guarantee does not hold");
  }
}

}  // namespace stochgraph
