#pragma once

// Ground-truth expectations by exhaustive enumeration of realizations.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "stochgraph/stochastic_graph.hpp"

namespace stochgraph {

enum class Functional { mst, mpm, cc, nn_total, nn_longest };

std::string_view to_string(Functional f) noexcept;
/// Parses "mst", "mpm", "cc", "nn-total", "nn-longest". Throws ValidationError.
Functional parse_functional(std::string_view name);

/// Evaluates a functional on the present points of a realization. Fewer than
/// two present points give 0 for MST, NN and CC; an odd present count is a
/// DomainError for MPM.
double evaluate(Functional f, const MetricSpace& space, std::span<const Location> locations);

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

struct ExactOptions {
  std::uint64_t cap = kDefaultEnumerationCap;
  unsigned threads = 1;
};

struct ExactResult {
  double value = 0.0;        // Pr[event] * E[f | event], or E[f | event]
  double probability = 0.0;  // Pr[event]
  std::uint64_t count = 0;   // realizations enumerated
};

using RealizationFunction = std::function<double(std::span<const Location>)>;

/// Number of realizations inside the event (product of allowed-set sizes,
/// counting only options of positive probability). Saturates at UINT64_MAX.
std::uint64_t enumeration_size(const StochasticGraph& g, const EventSpec& event);

/// Sum over realizations r in event of Pr[r] * fn(r), Neumaier-summed in
/// mixed-radix order over nodes. Throws BudgetError beyond options.cap.
ExactResult exact_term(const StochasticGraph& g, const RealizationFunction& fn, const EventSpec& event,
                       const ExactOptions& options = {});

ExactResult exact_term(const StochasticGraph& g, Functional f, const EventSpec& event,
                       const ExactOptions& options = {});

/// E[f | event] (unconditional when event is empty). Throws DomainError when
/// the event has probability zero.
ExactResult exact_expectation(const StochasticGraph& g, Functional f, const std::optional<EventSpec>& event = {},
                              const ExactOptions& options = {});

/// Visits every positive-probability realization in the event with its probability.
void for_each_realization(const StochasticGraph& g, const EventSpec& event,
                          const std::function<void(std::span<const Location>, double)>& visit,
                          std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace stochgraph
