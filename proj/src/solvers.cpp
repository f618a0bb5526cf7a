#include "stochgraph/solvers.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "stochgraph/errors.hpp"

namespace stochgraph {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::vector<std::uint64_t> vertex_keys(std::span<const PointIndex> points) {
  std::vector<std::uint64_t> keys(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::uint32_t occurrence = 0;
    for (std::size_t j = 0; j < i; ++j) occurrence += points[j] == points[i] ? 1u : 0u;
    keys[i] = EdgeKey::vertex_key(points[i], occurrence);
  }
  return keys;
}

double mst_length(const MetricSpace& space, std::span<const PointIndex> points) {
  const std::size_t k = points.size();
  if (k < 2) return 0.0;
  // Prim on the dense graph.
  std::vector<double> best(k, kInf);
  std::vector<char> in_tree(k, 0);
  best[0] = 0.0;
  double total = 0.0;
  for (std::size_t step = 0; step < k; ++step) {
    std::size_t next = k;
    for (std::size_t i = 0; i < k; ++i) {
      if (!in_tree[i] && (next == k || best[i] < best[next])) next = i;
    }
    in_tree[next] = 1;
    total += best[next];
    for (std::size_t i = 0; i < k; ++i) {
      if (!in_tree[i]) best[i] = std::min(best[i], space(points[next], points[i]));
    }
  }
  return total;
}

double mpm_length(const MetricSpace& space, std::span<const PointIndex> points) {
  const std::size_t k = points.size();
  if (k % 2 != 0) throw DomainError("perfect matching needs an even number of points, got " + std::to_string(k));
  if (k > kMaxMatchingPoints) {
    throw DomainError("perfect matching supports at most " + std::to_string(kMaxMatchingPoints) + " points");
  }
  if (k == 0) return 0.0;
  if (k == 2) return space(points[0], points[1]);

  // best[mask] = cheapest perfect matching of the vertices in mask. Only masks
  // reachable by always pairing the lowest unmatched vertex are filled in.
  const std::size_t full = (std::size_t{1} << k) - 1;
  std::vector<double> best(full + 1, kInf);
  best[0] = 0.0;
  for (std::size_t mask = 0; mask < full; ++mask) {
    const double base = best[mask];
    if (base == kInf) continue;
    std::size_t i = 0;
    while (mask & (std::size_t{1} << i)) ++i;
    const std::size_t with_i = mask | (std::size_t{1} << i);
    for (std::size_t j = i + 1; j < k; ++j) {
      if (mask & (std::size_t{1} << j)) continue;
      const std::size_t next = with_i | (std::size_t{1} << j);
      const double cost = base + space(points[i], points[j]);
      if (cost < best[next]) best[next] = cost;
    }
  }
  return best[full];
}

double cc_length(const MetricSpace& space, std::span<const PointIndex> points) {
  const std::size_t k = points.size();
  if (k < 2) throw DomainError("cycle cover needs at least two points");
  if (k == 2) return 2.0 * space(points[0], points[1]);

  // Hungarian method (shortest augmenting paths with potentials) on the k x k
  // assignment matrix; the diagonal is excluded explicitly.
  std::vector<double> u(k + 1, 0.0);
  std::vector<double> v(k + 1, 0.0);
  std::vector<std::size_t> match(k + 1, 0);  // match[col] = row, 1-based
  std::vector<std::size_t> way(k + 1, 0);
  std::vector<double> minv(k + 1);
  std::vector<char> used(k + 1);
  auto cost = [&](std::size_t row, std::size_t col) {
    return row == col ? kInf : space(points[row - 1], points[col - 1]);
  };
  for (std::size_t row = 1; row <= k; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[col0] = 1;
      const std::size_t row0 = match[col0];
      double delta = kInf;
      std::size_t col1 = 0;
      for (std::size_t col = 1; col <= k; ++col) {
        if (used[col]) continue;
        const double c = cost(row0, col);
        if (c != kInf) {
          const double reduced = c - u[row0] - v[col];
          if (reduced < minv[col]) {
            minv[col] = reduced;
            way[col] = col0;
          }
        }
        if (minv[col] < delta || col1 == 0) {
          delta = minv[col];
          col1 = col;
        }
      }
      if (delta == kInf) throw InvariantViolation("cycle cover assignment has no augmenting path");
      for (std::size_t col = 0; col <= k; ++col) {
        if (used[col]) {
          u[match[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  double total = 0.0;
  for (std::size_t col = 1; col <= k; ++col) total += space(points[match[col] - 1], points[col - 1]);
  return total;
}

NNGraph nn_graph(const MetricSpace& space, std::span<const PointIndex> points) {
  const std::size_t k = points.size();
  if (k < 2) throw DomainError("nearest-neighbor graph needs at least two points");
  const auto keys = vertex_keys(points);
  NNGraph g;
  g.edges.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t nearest = k;
    EdgeKey best;
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      const EdgeKey key = EdgeKey::make(space(points[i], points[j]), keys[i], keys[j]);
      if (nearest == k || key < best) {
        nearest = j;
        best = key;
      }
    }
    const bool seen = std::any_of(g.edges.begin(), g.edges.end(), [&](const NNGraph::Edge& e) { return e.key == best; });
    if (!seen) {
      g.edges.push_back({static_cast<std::uint32_t>(std::min(i, nearest)),
                         static_cast<std::uint32_t>(std::max(i, nearest)), best});
    }
  }
  g.longest = g.edges.front().key;
  for (const auto& e : g.edges) {
    g.total += e.key.length;
    if (g.longest < e.key) g.longest = e.key;
  }
  return g;
}

EdgeKey longest_nn_edge(const MetricSpace& space, std::span<const PointIndex> points) {
  return nn_graph(space, points).longest;
}

}  // namespace stochgraph
