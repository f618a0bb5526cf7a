#pragma once

// Expected MST length by recursive conditioning over a point order.
//
// With one node per point, points u_1..u_m are ordered by descending mass.
// In(i) is the event that every node sits in {u_i..u_m} (or is absent):
//   E[i] = q_i E'[i] + (1 - q_i) E[i+1],   q_i = Pr[u_i occupied | In(i)].
// Given u_i occupied, the suffix is re-sorted by distance from u_i as
// r_i = u_i, r_{i+1}, ..., and
//   E'[i,j] = q'_ij E''[i,j] + (1 - q'_ij) E'[i,j-1],   E'[i] = E'[i,|suffix|].
// E''[i,j] (u_i and r_j both occupied, nobody beyond r_j) has MST between
// d(u_i,r_j) and n d(u_i,r_j), so it is sampled with a small budget.

#include <vector>

#include "stochgraph/cycle_cover.hpp"
#include "stochgraph/monte_carlo.hpp"

namespace stochgraph {

struct DPState {
  SplitSpace split;
  std::vector<PointIndex> order;               // u_1..u_m over points with positive mass
  std::vector<std::vector<PointIndex>> inner;  // inner[i] = r_i.. (starts with order[i])
  std::vector<double> q;                       // Pr[u_i occupied | In(i)]
  std::vector<std::vector<double>> q_inner;    // Pr[r_j occupied | In'(i,j), u_i occupied]
  std::vector<std::vector<double>> leaf_mean;  // E''[i][j]
  std::vector<std::vector<double>> leaf_weight;
  std::vector<std::vector<double>> e_prime;    // E'[i][j]
  std::vector<double> e;                       // E[i]; e[order.size()] = 0
  double base_weight = 0.0;                    // weight of realizations with MST identically zero
};

/// Pr[every node in `suffix` or absent] = product over w of (p_w(suffix) + absent_w).
double suffix_probability(const StochasticGraph& g, std::span<const PointIndex> suffix);

/// Leaf weights plus base weight; equals 1 up to rounding.
double total_weight(const DPState& state);

struct DPResult {
  EstimateReport report;
  DPState state;
};

DPResult run_mst_dp(const StochasticGraph& g, const EstimateOptions& options);

EstimateReport estimate_emst_dp(const StochasticGraph& g, const EstimateOptions& options);

}  // namespace stochgraph
