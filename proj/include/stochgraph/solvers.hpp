#pragma once

// Exact deterministic solvers evaluated on a single realization.
//
// A realization is passed as the multiset of occupied points. Several nodes
// may share a point; such duplicates are distinct vertices joined by
// zero-length edges.

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "stochgraph/metric_space.hpp"

namespace stochgraph {

/// Total order on edges: by length, then by endpoint keys. Endpoint keys are
/// (point index, occurrence) packed into 64 bits, so distinct edges never tie.
struct EdgeKey {
  double length = 0.0;
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;

  static constexpr std::uint64_t vertex_key(PointIndex point, std::uint32_t occurrence = 0) noexcept {
    return (static_cast<std::uint64_t>(point) << 32) | occurrence;
  }
  static EdgeKey make(double length, std::uint64_t a, std::uint64_t b) noexcept {
    return a < b ? EdgeKey{length, a, b} : EdgeKey{length, b, a};
  }
  /// Key of the edge between two distinct points of a space.
  static EdgeKey between(const MetricSpace& space, PointIndex a, PointIndex b) noexcept {
    return make(space(a, b), vertex_key(a), vertex_key(b));
  }

  PointIndex lo_point() const noexcept { return static_cast<PointIndex>(lo >> 32); }
  PointIndex hi_point() const noexcept { return static_cast<PointIndex>(hi >> 32); }

  friend std::partial_ordering operator<=>(const EdgeKey& a, const EdgeKey& b) noexcept {
    if (auto c = a.length <=> b.length; c != 0) return c;
    if (a.lo != b.lo) return a.lo <=> b.lo;
    return a.hi <=> b.hi;
  }
  friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
};

/// Nearest-neighbor graph of a realized multiset.
struct NNGraph {
  struct Edge {
    std::uint32_t a;  // entry positions in the input span
    std::uint32_t b;
    EdgeKey key;
  };
  std::vector<Edge> edges;
  EdgeKey longest;
  double total = 0.0;
};

/// Vertex keys (point, occurrence) for each entry of a multiset.
std::vector<std::uint64_t> vertex_keys(std::span<const PointIndex> points);

/// Exact MST weight. Zero for fewer than two points.
double mst_length(const MetricSpace& space, std::span<const PointIndex> points);

/// Largest supported input for mpm_length (subset dynamic program).
inline constexpr std::size_t kMaxMatchingPoints = 22;

/// Exact minimum-weight perfect matching on the complete graph.
/// Throws DomainError on odd count or more than kMaxMatchingPoints points.
double mpm_length(const MetricSpace& space, std::span<const PointIndex> points);

/// Exact minimum cycle cover where a 2-cycle costs twice its edge.
/// Solved as an assignment problem with the diagonal forbidden.
/// Throws DomainError for fewer than two points.
double cc_length(const MetricSpace& space, std::span<const PointIndex> points);

/// Nearest-neighbor graph under EdgeKey order. Throws DomainError for fewer than two points.
NNGraph nn_graph(const MetricSpace& space, std::span<const PointIndex> points);

/// Longest NN edge. Throws DomainError for fewer than two points.
EdgeKey longest_nn_edge(const MetricSpace& space, std::span<const PointIndex> points);

}  // namespace stochgraph
