#include <doctest.h>

#include <map>

#include "stochgraph/cycle_cover.hpp"
#include "stochgraph/errors.hpp"
#include "stochgraph/exact_oracle.hpp"
#include "stochgraph/solvers.hpp"
#include "properties.hpp"

using namespace stochgraph;
using namespace testkit;

namespace {

/// Split point hosting node v when v sits at original point s.
PointIndex split_of(const SplitSpace& sp, NodeIndex v, PointIndex s) {
  for (PointIndex k = 0; k < sp.origin.size(); ++k) {
    if (sp.origin[k] == s && sp.owner[k] == v) return k;
  }
  throw std::logic_error("no split point");
}

StochasticGraph small_instance(Rng& rng, int trial) {
  const std::size_t m = 3 + trial % 3;
  const std::size_t n = 2 + trial % 3;
  const auto space = trial % 2 ? random_plane(rng, m) : random_metric(rng, m);
  return random_graph(rng, space, n, 3, trial % 5 == 4 ? 0.2 : 0.0);
}

}  // namespace

TEST_SUITE("cycle-cover") {

TEST_CASE("splitting shared points") {
  SUBCASE("disjoint supports are left alone") {
    const StochasticGraph g({"a", "b"}, line({0, 1, 2}), {{0.5, 0.5, 0}, {0, 0, 1}});
    const auto sp = split_points(g);
    CHECK(sp.graph.point_count() == 3);
    CHECK(sp.origin == std::vector<PointIndex>{0, 1, 2});
    CHECK(sp.owner == std::vector<NodeIndex>{0, 0, 1});
  }
  SUBCASE("a shared point gets a zero-distance copy") {
    const StochasticGraph g({"a", "b"}, line({0, 1}), {{0.5, 0.5}, {0.25, 0.75}});
    const auto sp = split_points(g);
    REQUIRE(sp.graph.point_count() == 4);
    CHECK(sp.graph.space().id(2) == "p0#b");
    CHECK(sp.graph.space().id(3) == "p1#b");
    CHECK(sp.graph.space()(0, 2) == 0.0);
    CHECK(sp.graph.space()(2, 1) == 1.0);
    CHECK(sp.graph.prob(1, 2) == 0.25);
    CHECK(sp.graph.prob(1, 0) == 0.0);
    CHECK(sp.owner == std::vector<NodeIndex>{0, 0, 1, 1});
  }
  SUBCASE("unused points keep no owner") {
    const StochasticGraph g({"a", "b"}, line({0, 1, 2}), {{1, 0, 0}, {0, 1, 0}});
    CHECK(split_points(g).owner[2] == kNoOwner);
  }
  SUBCASE("solver values are unchanged (100 realizations)") {
    Rng rng(51);
    for (int trial = 0; trial < 100; ++trial) {
      const auto g = random_graph(rng, random_plane(rng, 4), 4, 4);
      const auto sp = split_points(g);
      std::vector<PointIndex> orig(4), split(4);
      for (NodeIndex v = 0; v < 4; ++v) {
        const auto support = g.support(v);
        orig[v] = support[rng() % support.size()];
        split[v] = split_of(sp, v, orig[v]);
      }
      CHECK(close(mst_length(g.space(), orig), mst_length(sp.graph.space(), split), 1e-12));
      CHECK(close(cc_length(g.space(), orig), cc_length(sp.graph.space(), split), 1e-12));
      CHECK(close(mpm_length(g.space(), orig), mpm_length(sp.graph.space(), split), 1e-12));
    }
  }
}

TEST_CASE("nearer ball uses the edge-key order") {
  const auto s = line({0, 1, 2, -1});
  CHECK(nearer_ball(s, 0, 2) == std::vector<PointIndex>{1, 3});
  CHECK(nearer_ball(s, 0, 1).empty());
  // (0,3) ties (0,1) in length; (0,1) wins on the endpoint
  CHECK(nearer_ball(s, 0, 3) == std::vector<PointIndex>{1});
}

TEST_CASE("nearest-neighbor probabilities") {
  SUBCASE("examples") {
    const StochasticGraph det({"a", "b"}, line({0, 1}), {{1, 0}, {0, 1}});
    const auto sp = split_points(det);
    CHECK(prob_nearest(sp, 0, 1) == 1.0);
    CHECK(prob_mutual_nearest(sp, 0, 1) == 1.0);

    // c lands inside B(s, d(s,t)) with probability 0.3
    const StochasticGraph g({"a", "b", "c"}, line({0, 2, 1, 5}),
                            {{0.6, 0, 0, 0.4}, {0, 0.5, 0, 0.5}, {0, 0, 0.3, 0.7}});
    const auto sp3 = split_points(g);
    CHECK(prob_nearest(sp3, 0, 1) == doctest::Approx(0.6 * 0.5 * 0.7));
    CHECK_THROWS_AS(prob_nearest(sp3, 0, 3), DomainError);  // both owned by a
  }
  SUBCASE("match enumeration on 50 instances") {
    Rng rng(52);
    for (int trial = 0; trial < 50; ++trial) {
      const auto sp = split_points(small_instance(rng, trial));
      const auto& g = sp.graph;
      const auto& space = g.space();
      for (PointIndex s = 0; s < g.point_count(); ++s) {
        for (PointIndex t = 0; t < g.point_count(); ++t) {
          if (s == t || sp.owner[s] == kNoOwner || sp.owner[t] == kNoOwner || sp.owner[s] == sp.owner[t]) continue;
          double fwd = 0.0, both = 0.0;
          const auto bs = nearer_ball(space, s, t), bt = nearer_ball(space, t, s);
          enumerate(g, [&](const std::vector<Location>& loc, double p) {
            if (loc[sp.owner[s]] != static_cast<Location>(s) || loc[sp.owner[t]] != static_cast<Location>(t)) return;
            bool in_s = false, in_t = false;
            for (Location l : loc) {
              if (l == kAbsent) continue;
              const auto r = static_cast<PointIndex>(l);
              in_s |= std::find(bs.begin(), bs.end(), r) != bs.end();
              in_t |= std::find(bt.begin(), bt.end(), r) != bt.end();
            }
            if (!in_s) fwd += p;
            if (!in_s && !in_t) both += p;
          });
          CHECK(std::abs(prob_nearest(sp, s, t) - fwd) <= 1e-12);
          CHECK(std::abs(prob_mutual_nearest(sp, s, t) - both) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("longest-edge decomposition by enumeration") {
  Rng rng(53);
  for (int trial = 0; trial < 30; ++trial) {
    const auto sp = split_points(small_instance(rng, trial));
    const auto& g = sp.graph;
    double two_present = 0.0;
    const auto stats = lambda_edge_stats(sp, &two_present);
    double sum = 0.0;
    for (const auto& [edge, e] : stats) {
      sum += e.prob;
      // Lambda = {s,t} is exactly A_s(t) or A_t(s)
      CHECK(std::abs(e.prob - (e.fwd + e.rev - e.both)) <= 1e-12);
      const double d = g.space()(edge.first, edge.second);
      const double n = static_cast<double>(g.node_count());
      if (e.prob > 0.0) {
        const double cond = e.cc_mass / e.prob;
        CHECK(d <= cond * (1 + 1e-12));
        CHECK(cond <= 2.0 * n * d * (1 + 1e-12));
      }
    }
    CHECK(std::abs(sum - two_present) <= 1e-10);
    if (g.mode() == PresenceMode::certain) CHECK(std::abs(sum - 1.0) <= 1e-10);
  }
}

TEST_CASE("cycle cover can exceed n times the longest NN edge") {
  const auto s = line({0, 1, 2});
  const PointIndex pts[] = {0, 1, 2};
  const auto nn = nn_graph(s, pts);
  CHECK(nn.longest.length == 1.0);
  CHECK(cc_length(s, pts) == 4.0);
  CHECK(cc_length(s, pts) > 3.0 * nn.longest.length);
  CHECK(cc_length(s, pts) <= 2.0 * 3.0 * nn.longest.length);
}

TEST_CASE("pair terms") {
  SUBCASE("two fixed nodes give 2d") {
    const StochasticGraph g({"a", "b"}, line({0, 3}), {{1, 0}, {0, 1}});
    const auto sp = split_points(g);
    const auto p = estimate_pair_term(sp, 0, 1, false, 100, 1);
    CHECK(p.estimate == 6.0);
    CHECK(p.indicator_hits == 100);
    CHECK(p.s == "p0");
    CHECK(p.v == "a");
  }
  SUBCASE("impossible events draw nothing") {
    const StochasticGraph g({"a", "b", "c"}, line({0, 3, 1}), {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    const auto p = estimate_pair_term(split_points(g), 0, 1, false, 100, 1);
    CHECK(p.prob_ns_t == 0.0);
    CHECK(p.samples == 0);
    CHECK(p.estimate == 0.0);
  }
  SUBCASE("a node entirely inside the ball makes the event exactly impossible") {
    // 0.7 + 0.2 + 0.1 rounds below 1, so 1 - p_c(B) would be 1.1e-16
    const StochasticGraph g({"a", "b", "c"}, line({0, 10, 1, 2, 3}),
                            {{1, 0, 0, 0, 0}, {0, 1, 0, 0, 0}, {0, 0, 0.7, 0.2, 0.1}});
    const auto sp = split_points(g);
    CHECK(prob_nearest(sp, 0, 1) == 0.0);
    CHECK(prob_mutual_nearest(sp, 0, 1) == 0.0);
    CHECK(estimate_pair_term(sp, 0, 1, false, 100, 1).samples == 0);
  }
  SUBCASE("indicator counts are thread independent") {
    Rng rng(54);
    const auto sp = split_points(random_graph(rng, random_plane(rng, 5), 4, 3));
    for (PointIndex s = 0; s < sp.graph.point_count(); ++s) {
      for (PointIndex t = 0; t < sp.graph.point_count(); ++t) {
        if (s == t || sp.owner[s] == kNoOwner || sp.owner[t] == kNoOwner || sp.owner[s] == sp.owner[t]) continue;
        const auto a = estimate_pair_term(sp, s, t, false, 3000, 2, 1);
        const auto b = estimate_pair_term(sp, s, t, false, 3000, 2, 4);
        CHECK(a.estimate == b.estimate);
        CHECK(a.indicator_hits == b.indicator_hits);
      }
    }
  }
}

TEST_CASE("pair budget") {
  CHECK(pair_budget(4, 2, 2, 1.0) == static_cast<std::uint64_t>(std::ceil(4 * 4 * 8 * std::log(4.0))));
  CHECK(pair_budget(4, 1, 1, 1.0) == 4);  // log term floored at 1
  CHECK(pair_budget(4, 3, 4, 0.5) ==
        static_cast<std::uint64_t>(std::ceil(4 * 9 * 64 * (std::log(3.0) + std::log(4.0)) / 0.125)));
  CHECK_THROWS_AS(pair_budget(0, 2, 2, 0.5), DomainError);
  CHECK_THROWS_AS(pair_budget(4, 2, 2, 0.0), DomainError);
}

TEST_CASE("estimator") {
  SUBCASE("deterministic instance is exact") {
    const auto space = MetricSpace::from_coords(ids("p", 4), {{0, 0}, {1, 0}, {0, 2}, {3, 3}});
    const StochasticGraph g({"a", "b", "c", "d"}, space, {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}});
    const PointIndex pts[] = {0, 1, 2, 3};
    const auto r = estimate_ecc(g, {.seed = 1, .budget_scale = 1e-3});
    CHECK(r.value == doctest::Approx(cc_length(space, pts)).epsilon(1e-12));
  }
  SUBCASE("co-located nodes give zero through an exact term") {
    const StochasticGraph g({"a", "b"}, line({0, 1}), {{1, 0}, {1, 0}});
    const auto r = estimate_ecc(g, {});
    CHECK(r.value == 0.0);
    REQUIRE(r.terms.size() == 1);
    CHECK(r.terms[0].method == TermMethod::exact);
  }
  SUBCASE("single node is rejected") {
    const StochasticGraph g({"a"}, line({0, 1}), {{1, 0}});
    CHECK_THROWS_AS(estimate_ecc(g, {}), DomainError);
  }
  SUBCASE("estimates sit near the oracle and inside the NN sandwich") {
    Rng rng(55);
    for (int trial = 0; trial < 6; ++trial) {
      const auto g = small_instance(rng, trial);
      const double ecc = exact_expectation(g, Functional::cc).value;
      const double enn = exact_expectation(g, Functional::nn_total).value;
      const double eps = 0.25;
      const auto r = estimate_ecc(g, {.epsilon = eps, .seed = 11 + static_cast<std::uint64_t>(trial),
                                      .budget_scale = 0.05});
      CHECK(std::abs(r.value - ecc) <= eps * ecc);
      // the sandwich holds for the expectation; the estimate inherits it up to (1 +- eps)
      CHECK(r.value >= (1 - eps) * enn);
      CHECK(r.value <= 2 * (1 + eps) * enn);
      CHECK(r.pairs.size() >= r.terms.size());
    }
  }
}

}  // TEST_SUITE
