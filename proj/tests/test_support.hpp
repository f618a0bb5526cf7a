#pragma once

// Shared fixtures and brute-force reference implementations for the tests.
// Nothing here calls the library's solvers or enumerator.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "stochgraph/metric_space.hpp"
#include "stochgraph/stochastic_graph.hpp"

namespace testkit {

using namespace stochgraph;
using Rng = std::mt19937_64;

inline std::vector<std::string> ids(const char* prefix, std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

inline MetricSpace line(const std::vector<double>& xs) {
  std::vector<std::vector<double>> coords;
  for (double x : xs) coords.push_back({x});
  return MetricSpace::from_coords(ids("p", xs.size()), coords);
}

inline MetricSpace random_plane(Rng& rng, std::size_t m, double scale = 1.0) {
  std::uniform_real_distribution<double> u(0.0, scale);
  std::vector<std::vector<double>> coords(m);
  for (auto& c : coords) c = {u(rng), u(rng)};
  return MetricSpace::from_coords(ids("p", m), coords);
}

/// Shortest-path closure of random weights; exercises non-Euclidean metrics.
inline MetricSpace random_metric(Rng& rng, std::size_t m) {
  std::uniform_real_distribution<double> u(1.0, 10.0);
  std::vector<std::vector<double>> d(m, std::vector<double>(m, 0.0));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b) d[a][b] = d[b][a] = u(rng);
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) d[a][b] = std::min(d[a][b], d[a][k] + d[k][b]);
  return MetricSpace::from_matrix(ids("p", m), d);
}

/// Each node gets a random support of 1..max_support points with random weights.
inline StochasticGraph random_graph(Rng& rng, MetricSpace space, std::size_t n, std::size_t max_support = 3,
                                    double absent = 0.0) {
  const std::size_t m = space.size();
  std::uniform_real_distribution<double> w(0.1, 1.0);
  std::vector<std::vector<double>> probs(n, std::vector<double>(m, 0.0));
  for (auto& row : probs) {
    std::vector<PointIndex> pts(m);
    std::iota(pts.begin(), pts.end(), PointIndex{0});
    std::shuffle(pts.begin(), pts.end(), rng);
    const std::size_t k = 1 + rng() % std::min(max_support, m);
    std::vector<double> ws(k);
    for (double& x : ws) x = w(rng);
    const double sum = std::accumulate(ws.begin(), ws.end(), 0.0);
    double placed = 0.0;
    for (std::size_t i = 0; i + 1 < k; ++i) {
      row[pts[i]] = (1.0 - absent) * ws[i] / sum;
      placed += row[pts[i]];
    }
    row[pts[k - 1]] = (1.0 - absent) - placed;
  }
  return StochasticGraph(ids("v", n), std::move(space), std::move(probs),
                         absent > 0.0 ? PresenceMode::existential : PresenceMode::certain);
}

inline std::vector<PointIndex> random_points(Rng& rng, std::size_t count, std::size_t m) {
  std::vector<PointIndex> out(count);
  for (auto& p : out) p = static_cast<PointIndex>(rng() % m);
  return out;
}

inline bool close(double a, double b, double rel = 1e-9) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

// ---------------------------------------------------------------------------
// Reference solvers

/// Minimum over all labelled spanning trees, decoded from Pruefer sequences.
inline double brute_mst(const MetricSpace& space, const std::vector<PointIndex>& pts) {
  const std::size_t k = pts.size();
  if (k < 2) return 0.0;
  if (k == 2) return space(pts[0], pts[1]);
  std::vector<std::size_t> seq(k - 2, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<std::size_t> degree(k, 1);
    for (auto x : seq) ++degree[x];
    double total = 0.0;
    for (auto x : seq) {
      std::size_t leaf = 0;
      while (degree[leaf] != 1) ++leaf;
      total += space(pts[leaf], pts[x]);
      --degree[leaf];
      --degree[x];
    }
    std::size_t a = k, b = k;
    for (std::size_t i = 0; i < k; ++i) {
      if (degree[i] == 1) (a == k ? a : b) = i;
    }
    total += space(pts[a], pts[b]);
    best = std::min(best, total);
    std::size_t pos = 0;
    while (pos < seq.size() && ++seq[pos] == k) seq[pos++] = 0;
    if (pos == seq.size()) break;
  }
  return best;
}

/// Minimum over every perfect matching, listed explicitly.
inline double brute_mpm(const MetricSpace& space, const std::vector<PointIndex>& pts) {
  std::vector<char> used(pts.size(), 0);
  std::function<double()> rec = [&]() -> double {
    std::size_t first = 0;
    while (first < pts.size() && used[first]) ++first;
    if (first == pts.size()) return 0.0;
    used[first] = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = first + 1; j < pts.size(); ++j) {
      if (used[j]) continue;
      used[j] = 1;
      best = std::min(best, space(pts[first], pts[j]) + rec());
      used[j] = 0;
    }
    used[first] = 0;
    return best;
  };
  return rec();
}

/// Minimum over all fixed-point-free permutations of sum d(i, pi(i)).
inline double brute_cc(const MetricSpace& space, const std::vector<PointIndex>& pts) {
  std::vector<std::size_t> perm(pts.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    bool deranged = true;
    double total = 0.0;
    for (std::size_t i = 0; i < perm.size() && deranged; ++i) {
      deranged = perm[i] != i;
      total += space(pts[i], pts[perm[i]]);
    }
    if (deranged) best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Nearest neighbor of entry i under (length, point, occurrence) order, by direct scan.
struct BruteNN {
  double total = 0.0;
  double longest = 0.0;
  std::pair<std::size_t, std::size_t> longest_pair;  // entry positions, lower first
};

inline BruteNN brute_nn(const MetricSpace& space, const std::vector<PointIndex>& pts) {
  const std::size_t k = pts.size();
  // Occurrence index of each entry among equal points, in input order.
  std::vector<std::uint64_t> key(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::uint64_t occ = 0;
    for (std::size_t j = 0; j < i; ++j) occ += pts[j] == pts[i];
    key[i] = (static_cast<std::uint64_t>(pts[i]) << 32) | occ;
  }
  auto edge_less = [&](std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
    const double l1 = space(pts[a], pts[b]);
    const double l2 = space(pts[c], pts[d]);
    if (l1 != l2) return l1 < l2;
    const auto p = std::minmax(key[a], key[b]);
    const auto q = std::minmax(key[c], key[d]);
    return p < q;
  };
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t best = i == 0 ? 1 : 0;
    for (std::size_t j = 0; j < k; ++j) {
      if (j != i && edge_less(i, j, i, best)) best = j;
    }
    const auto e = std::minmax(i, best);
    if (std::find(edges.begin(), edges.end(), std::pair(e.first, e.second)) == edges.end()) {
      edges.emplace_back(e.first, e.second);
    }
  }
  BruteNN out;
  out.longest_pair = edges.front();
  for (const auto& e : edges) {
    out.total += space(pts[e.first], pts[e.second]);
    if (edge_less(out.longest_pair.first, out.longest_pair.second, e.first, e.second)) out.longest_pair = e;
  }
  out.longest = space(pts[out.longest_pair.first], pts[out.longest_pair.second]);
  return out;
}

// ---------------------------------------------------------------------------
// Reference enumeration: visits every realization with positive probability.

inline void enumerate(const StochasticGraph& g,
                      const std::function<void(const std::vector<Location>&, double)>& visit) {
  const std::size_t n = g.node_count();
  std::vector<Location> loc(n);
  std::function<void(std::size_t, double)> rec = [&](std::size_t v, double p) {
    if (v == n) {
      visit(loc, p);
      return;
    }
    for (std::size_t s = 0; s < g.point_count(); ++s) {
      const double q = g.prob(static_cast<NodeIndex>(v), static_cast<PointIndex>(s));
      if (q <= 0.0) continue;
      loc[v] = static_cast<Location>(s);
      rec(v + 1, p * q);
    }
    if (g.absent_mass(static_cast<NodeIndex>(v)) > 0.0) {
      loc[v] = kAbsent;
      rec(v + 1, p * g.absent_mass(static_cast<NodeIndex>(v)));
    }
  };
  rec(0, 1.0);
}

inline std::vector<PointIndex> present(const std::vector<Location>& loc) {
  std::vector<PointIndex> out;
  for (Location l : loc) {
    if (l != kAbsent) out.push_back(static_cast<PointIndex>(l));
  }
  return out;
}

/// E[f] by reference enumeration, with f applied to the present points.
inline double brute_expectation(const StochasticGraph& g,
                                const std::function<double(const std::vector<PointIndex>&)>& f) {
  double total = 0.0;
  enumerate(g, [&](const std::vector<Location>& loc, double p) { total += p * f(present(loc)); });
  return total;
}

}  // namespace testkit
