#pragma once

// Expected minimum cycle cover length.
//
// After splitting shared points so each point hosts at most one node, E[CC]
// is decomposed by the longest nearest-neighbor edge Lambda:
//   E[CC] = sum over edges e of Pr[Lambda = e] E[CC | Lambda = e],
// and each edge (s,t) is the inclusion-exclusion of A_s(t), A_t(s) and their
// intersection, where A_s(t) = "t is the nearest neighbor of s and (s,t) is the
// longest NN edge". Each part is estimated by sampling under the exactly
// computable event N_s(t) and counting samples whose longest NN edge is (s,t).

#include <string>
#include <vector>

#include "stochgraph/monte_carlo.hpp"
#include "stochgraph/stochastic_graph.hpp"

namespace stochgraph {

inline constexpr NodeIndex kNoOwner = static_cast<NodeIndex>(-1);

struct SplitSpace {
  StochasticGraph graph;            // at most one node with positive mass per point
  std::vector<PointIndex> origin;   // split point -> original point
  std::vector<NodeIndex> owner;     // split point -> its unique node, or kNoOwner
};

/// Gives every extra node with mass on a point its own zero-distance copy,
/// named "<point>#<node>". The first node (by index) keeps the original point.
SplitSpace split_points(const StochasticGraph& g);

/// Points strictly nearer to s than t under EdgeKey order, excluding s and t.
std::vector<PointIndex> nearer_ball(const MetricSpace& space, PointIndex s, PointIndex t);

/// Pr[N_s(t)]: owner(s) at s, owner(t) at t, and no other node inside nearer_ball(s,t).
/// Throws DomainError when s or t has no owner or both have the same one.
double prob_nearest(const SplitSpace& sp, PointIndex s, PointIndex t);

/// Pr[N_s(t) and N_t(s)].
double prob_mutual_nearest(const SplitSpace& sp, PointIndex s, PointIndex t);

/// Estimate of Pr[A] E[CC | A] for A = A_s(t) (or A_s(t) and A_t(s) when
/// mutual), from `samples` draws conditioned on N_s(t) (resp. both). Zero
/// samples are drawn when the conditioning event is impossible.
PairTerm estimate_pair_term(const SplitSpace& sp, PointIndex s, PointIndex t, bool mutual, std::uint64_t samples,
                            std::uint64_t seed, unsigned threads = 1, bool check_invariants = true);

/// Per-pair sample count ceil(c n^2 m^3 (ln n + ln m) / eps^3).
std::uint64_t pair_budget(double c, std::size_t n, std::size_t m, double epsilon);

EstimateReport estimate_ecc(const StochasticGraph& g, const EstimateOptions& options);

}  // namespace stochgraph
