#include "stochgraph/exact_oracle.hpp"

#include <array>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>
#include <vector>

#include "stochgraph/errors.hpp"
#include "stochgraph/solvers.hpp"

namespace stochgraph {

namespace {

struct Option {
  Location location;
  double probability;
};

std::vector<std::vector<Option>> event_options(const StochasticGraph& g, const EventSpec& event) {
  if (event.node_count() != g.node_count() || event.point_count() != g.point_count()) {
    throw DomainError("event shape does not match graph");
  }
  std::vector<std::vector<Option>> options(g.node_count());
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    const auto node = static_cast<NodeIndex>(v);
    for (std::size_t s = 0; s < g.point_count(); ++s) {
      const double p = g.prob(node, static_cast<PointIndex>(s));
      if (p > 0.0 && event.allows(node, static_cast<Location>(s))) options[v].push_back({static_cast<Location>(s), p});
    }
    if (event.absent_allowed(node) && g.absent_mass(node) > 0.0) options[v].push_back({kAbsent, g.absent_mass(node)});
  }
  return options;
}

std::uint64_t options_product(const std::vector<std::vector<Option>>& options) {
  std::uint64_t count = 1;
  for (const auto& opts : options) {
    if (opts.empty()) return 0;
    if (count > std::numeric_limits<std::uint64_t>::max() / opts.size()) return std::numeric_limits<std::uint64_t>::max();
    count *= opts.size();
  }
  return count;
}

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Enumerates all realizations whose first node takes option `lead`, in
// mixed-radix order with the last node varying fastest.
template <class Visit>
void enumerate_prefix(const std::vector<std::vector<Option>>& options, std::size_t lead, Visit&& visit) {
  const std::size_t n = options.size();
  std::vector<std::size_t> digit(n, 0);
  std::vector<Location> loc(n);
  std::vector<double> prefix_prob(n + 1, 1.0);
  digit[0] = lead;
  loc[0] = options[0][lead].location;
  prefix_prob[1] = options[0][lead].probability;
  for (std::size_t v = 1; v < n; ++v) {
    loc[v] = options[v][0].location;
    prefix_prob[v + 1] = prefix_prob[v] * options[v][0].probability;
  }
  while (true) {
    visit(std::span<const Location>(loc), prefix_prob[n]);
    std::size_t v = n;
    while (v > 1) {
      --v;
      if (++digit[v] < options[v].size()) break;
      digit[v] = 0;
      if (v == 1) return;
    }
    if (n == 1) return;
    for (std::size_t w = v; w < n; ++w) {
      loc[w] = options[w][digit[w]].location;
      prefix_prob[w + 1] = prefix_prob[w] * options[w][digit[w]].probability;
    }
  }
}

}  // namespace

std::string_view to_string(Functional f) noexcept {
  switch (f) {
    case Functional::mst: return "mst";
    case Functional::mpm: return "mpm";
    case Functional::cc: return "cc";
    case Functional::nn_total: return "nn-total";
    case Functional::nn_longest: return "nn-longest";
  }
  return "unknown";
}

Functional parse_functional(std::string_view name) {
  for (Functional f : {Functional::mst, Functional::mpm, Functional::cc, Functional::nn_total, Functional::nn_longest}) {
    if (name == to_string(f)) return f;
  }
  throw ValidationError("unknown functional '" + std::string(name) + "'");
}

double evaluate(Functional f, const MetricSpace& space, std::span<const Location> locations) {
  std::array<PointIndex, 32> small{};
  std::vector<PointIndex> large;
  std::span<PointIndex> present;
  std::size_t k = 0;
  if (locations.size() <= small.size()) {
    for (Location loc : locations) {
      if (loc != kAbsent) small[k++] = static_cast<PointIndex>(loc);
    }
    present = std::span<PointIndex>(small.data(), k);
  } else {
    for (Location loc : locations) {
      if (loc != kAbsent) large.push_back(static_cast<PointIndex>(loc));
    }
    present = large;
    k = large.size();
  }
  switch (f) {
    case Functional::mst: return mst_length(space, present);
    case Functional::mpm: return mpm_length(space, present);
    case Functional::cc: return k < 2 ? 0.0 : cc_length(space, present);
    case Functional::nn_total: return k < 2 ? 0.0 : nn_graph(space, present).total;
    case Functional::nn_longest: return k < 2 ? 0.0 : nn_graph(space, present).longest.length;
  }
  return 0.0;
}

std::uint64_t enumeration_size(const StochasticGraph& g, const EventSpec& event) {
  return options_product(event_options(g, event));
}

void for_each_realization(const StochasticGraph& g, const EventSpec& event,
                          const std::function<void(std::span<const Location>, double)>& visit, std::uint64_t cap) {
  const auto options = event_options(g, event);
  const std::uint64_t count = options_product(options);
  if (count > cap) {
    throw BudgetError("enumeration needs " + std::to_string(count) + " realizations, cap is " + std::to_string(cap));
  }
  if (count == 0) return;
  for (std::size_t lead = 0; lead < options[0].size(); ++lead) enumerate_prefix(options, lead, visit);
}

ExactResult exact_term(const StochasticGraph& g, const RealizationFunction& fn, const EventSpec& event,
                       const ExactOptions& opts) {
  const auto options = event_options(g, event);
  const std::uint64_t count = options_product(options);
  if (count > opts.cap) {
    throw BudgetError("enumeration needs " + std::to_string(count) + " realizations, cap is " +
                      std::to_string(opts.cap));
  }
  ExactResult result;
  result.count = count;
  if (count == 0) return result;

  // Partition by the leading node's option; partial sums are combined in
  // partition order so the result does not depend on the thread count.
  const std::size_t parts = options[0].size();
  std::vector<CompensatedSum> value_parts(parts);
  std::vector<CompensatedSum> prob_parts(parts);
  auto run_part = [&](std::size_t lead) {
    enumerate_prefix(options, lead, [&](std::span<const Location> loc, double p) {
      value_parts[lead].add(p * fn(loc));
      prob_parts[lead].add(p);
    });
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(parts)));
  if (threads == 1) {
    for (std::size_t lead = 0; lead < parts; ++lead) run_part(lead);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          try {
            for (std::size_t lead = t; lead < parts; lead += threads) run_part(lead);
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
  CompensatedSum value;
  CompensatedSum prob;
  for (std::size_t lead = 0; lead < parts; ++lead) {
    value.add(value_parts[lead].value());
    prob.add(prob_parts[lead].value());
  }
  result.value = value.value();
  result.probability = prob.value();
  return result;
}

ExactResult exact_term(const StochasticGraph& g, Functional f, const EventSpec& event, const ExactOptions& options) {
  const MetricSpace& space = g.space();
  return exact_term(g, [&](std::span<const Location> loc) { return evaluate(f, space, loc); }, event, options);
}

ExactResult exact_expectation(const StochasticGraph& g, Functional f, const std::optional<EventSpec>& event,
                              const ExactOptions& options) {
  const EventSpec spec = event ? *event : EventSpec::unrestricted(g);
  ExactResult term = exact_term(g, f, spec, options);
  if (!(term.probability > 0.0)) throw DomainError("conditioning event has probability zero");
  term.value /= term.probability;
  return term;
}

}  // namespace stochgraph
