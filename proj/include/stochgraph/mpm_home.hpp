#pragma once

// Expected minimum perfect matching length by home clustering.
//
// Points are swept into single-linkage clusters until every node keeps all
// but theta of its mass inside one cluster (its home) and every cluster is the
// home of an even number of nodes. The estimate is
//   Pr[every node at home] * E[MPM | every node at home]
//   + sum over v of Pr[only v away] * E[MPM | only v away],
// with far escapes charged d(s, H(v)).

#include <vector>

#include "stochgraph/monte_carlo.hpp"
#include "stochgraph/stochastic_graph.hpp"

namespace stochgraph {

struct HomeClustering {
  std::vector<std::vector<PointIndex>> clusters;  // each ascending; ordered by smallest member
  std::vector<std::size_t> home_of;               // node -> cluster index
  double T = 0.0;                                 // merge radius at acceptance
  double D = 0.0;                                 // max cluster diameter
  double theta = 0.0;

  const std::vector<PointIndex>& home(NodeIndex v) const { return clusters[home_of[v]]; }
};

/// theta = eps / (16 n m^3).
double escape_bound(double epsilon, std::size_t n, std::size_t m);

/// Single-linkage sweep over EdgeKey-sorted point pairs; returns the first
/// clustering where every node has mass >= 1 - theta in one component and each
/// such component is home to an even number of nodes. Only components that
/// home at least one node are kept. Requires even n, certain presence.
HomeClustering find_home_clusters(const StochasticGraph& g, double epsilon);

EstimateReport estimate_empm(const StochasticGraph& g, const EstimateOptions& options);

}  // namespace stochgraph
