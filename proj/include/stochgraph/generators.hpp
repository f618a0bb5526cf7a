#pragma once

// Seeded random instance families.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "stochgraph/stochastic_graph.hpp"

namespace stochgraph {

enum class GeneratorKind { euclidean_uniform, random_metric, home_separated, colocated_mass };

std::string_view to_string(GeneratorKind kind) noexcept;
/// "euclidean-uniform", "random-metric", "home-separated", "colocated-mass".
GeneratorKind parse_generator(std::string_view name);
const std::vector<GeneratorKind>& all_generators();

struct GeneratorOptions {
  /// Each node is absent with this probability (existential mode when > 0).
  double absent_mass = 0.0;
  /// Largest support per node.
  std::size_t max_support = 3;
};

/// Distance from the cluster to the escape point of a home-separated instance.
inline constexpr double kFarDistance = 1e6;
/// Total probability mass (summed over nodes) placed on that escape point.
inline constexpr double kEscapeMass = 1e-3;

/// Deterministic in (kind, n, m, seed, options).
///  euclidean-uniform: points uniform in the unit square.
///  random-metric: uniform [1,10] weights closed under shortest paths.
///  home-separated: m-1 points in the unit square plus one at distance 1e6;
///    the far point receives kEscapeMass / n from each node.
///  colocated-mass: points on ceil(m/2) shared locations of a line, so
///    distinct points sit at distance zero.
/// Throws ValidationError when n < 1, m < 1, or home-separated with m < 2.
StochasticGraph generate(GeneratorKind kind, std::size_t n, std::size_t m, std::uint64_t seed,
                         const GeneratorOptions& options = {});

}  // namespace stochgraph
