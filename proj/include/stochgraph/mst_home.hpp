#pragma once

// Expected MST length by home-set conditioning.
//
// The home H is a ball that holds all but epsilon/16 of the expected node
// mass. E[MST] is estimated as
//   Pr[all nodes in H] * E[MST | all in H]
//   + sum over v of Pr[only v outside H] * E[MST | only v outside H],
// where a lone escape to a point s far from H (d(s,H) >= (n/eps) diam(H)) is
// charged d(s,H) directly. Events with two or more nodes outside H are dropped.

#include <vector>

#include "stochgraph/monte_carlo.hpp"
#include "stochgraph/stochastic_graph.hpp"

namespace stochgraph {

struct HomeSet {
  PointIndex center = 0;
  double radius = 0.0;
  std::vector<PointIndex> members;  // ascending
  double diameter = 0.0;
  double p_of_H = 0.0;              // expected number of nodes in H

  bool contains(PointIndex s) const;
};

/// Ball around the lower-indexed endpoint of the EdgeKey-furthest pair among
/// points with p(r) >= eps/(16m). Certain mode only; 0 < eps <= 1.
/// Throws InvariantViolation if p(H) >= n - eps/16 fails.
HomeSet find_home(const StochasticGraph& g, double epsilon);

EstimateReport estimate_emst(const StochasticGraph& g, const EstimateOptions& options);

}  // namespace stochgraph
