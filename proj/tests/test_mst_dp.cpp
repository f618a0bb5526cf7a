#include <doctest.h>

#include "stochgraph/errors.hpp"
#include "stochgraph/exact_oracle.hpp"
#include "stochgraph/mst_dp.hpp"
#include "stochgraph/solvers.hpp"
#include "test_support.hpp"

using namespace stochgraph;
using namespace testkit;

namespace {

StochasticGraph dp_instance(Rng& rng, int trial) {
  const std::size_t m = 3 + trial % 4;
  const std::size_t n = 2 + trial % 3;
  const auto space = trial % 2 ? random_plane(rng, m) : random_metric(rng, m);
  return random_graph(rng, space, n, 3, trial % 4 == 3 ? 0.2 : 0.0);
}

/// Leaf (i, j): o_i at u_i, owner of r_j at r_j, everyone within r_i..r_j (or absent).
EventSpec leaf_event(const DPState& st, std::size_t i, std::size_t j) {
  const auto& g = st.split.graph;
  const std::span<const PointIndex> prefix(st.inner[i].data(), j + 1);
  EventSpec e = EventSpec::unrestricted(g);
  for (NodeIndex w = 0; w < g.node_count(); ++w) {
    e.restrict_to(w, prefix, g.mode() == PresenceMode::existential);
  }
  e.force(st.split.owner[st.order[i]], st.order[i]);
  e.force(st.split.owner[st.inner[i][j]], st.inner[i][j]);
  return e;
}

}  // namespace

TEST_SUITE("mst-dp") {

TEST_CASE("suffix probability matches enumeration") {
  Rng rng(61);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = dp_instance(rng, trial);
    std::vector<PointIndex> suffix;
    for (PointIndex s = 0; s < g.point_count(); ++s) {
      if (rng() % 2) suffix.push_back(s);
    }
    double total = 0.0;
    enumerate(g, [&](const std::vector<Location>& loc, double p) {
      for (Location l : loc) {
        if (l != kAbsent && std::find(suffix.begin(), suffix.end(), static_cast<PointIndex>(l)) == suffix.end()) {
          return;
        }
      }
      total += p;
    });
    CHECK(std::abs(suffix_probability(g, suffix) - total) <= 1e-12);
  }
}

TEST_CASE("recursion weights telescope and match leaf events") {
  Rng rng(62);
  for (int trial = 0; trial < 40; ++trial) {
    const auto g = dp_instance(rng, trial);
    const auto res = run_mst_dp(g, {.epsilon = 0.5, .seed = 1, .budget_scale = 0.01});
    const auto& st = res.state;
    CHECK(std::abs(total_weight(st) - 1.0) <= 1e-12);
    CHECK(st.order.size() == st.inner.size());
    // masses descend along the order
    for (std::size_t i = 1; i < st.order.size(); ++i) {
      CHECK(st.split.graph.point_mass(st.order[i - 1]) >= st.split.graph.point_mass(st.order[i]));
    }
    double decomposed = 0.0;
    for (std::size_t i = 0; i < st.order.size(); ++i) {
      CHECK(st.inner[i][0] == st.order[i]);
      for (std::size_t j = 1; j < st.inner[i].size(); ++j) {
        const auto e = leaf_event(st, i, j);
        const double w = st.leaf_weight[i][j];
        if (st.split.owner[st.inner[i][j]] == st.split.owner[st.order[i]]) {
          CHECK(w == 0.0);
          continue;
        }
        CHECK(std::abs(w - event_probability(st.split.graph, e)) <= 1e-12);
        if (w > 0.0) decomposed += exact_term(st.split.graph, Functional::mst, e).value;
      }
    }
    // every realization with positive MST lies under exactly one leaf
    CHECK(close(decomposed, exact_expectation(g, Functional::mst).value, 1e-10));
  }
}

TEST_CASE("memo tables agree with the term sum") {
  Rng rng(63);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = dp_instance(rng, trial);
    const auto res = run_mst_dp(g, {.epsilon = 0.5, .seed = 2, .budget_scale = 0.05});
    const double e1 = res.state.order.empty() ? 0.0 : res.state.e[0];
    CHECK(close(e1, res.report.value, 1e-10));
    CHECK(res.report.notes.back().find("total weight=") != std::string::npos);
  }
}

TEST_CASE("degenerate and deterministic instances") {
  SUBCASE("deterministic nodes are exact") {
    const auto space = MetricSpace::from_coords(ids("p", 4), {{0, 0}, {1, 0}, {0, 2}, {5, 5}});
    const StochasticGraph g({"a", "b", "c"}, space, {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}});
    const PointIndex pts[] = {0, 1, 3};
    const auto r = estimate_emst_dp(g, {.seed = 1});
    CHECK(r.value == doctest::Approx(mst_length(space, pts)).epsilon(1e-12));
    for (const auto& t : r.terms) CHECK(t.method == TermMethod::exact);
  }
  SUBCASE("co-located nodes give zero") {
    const StochasticGraph g({"a", "b"}, line({0, 1}), {{1, 0}, {1, 0}});
    CHECK(estimate_emst_dp(g, {}).value == 0.0);
  }
  SUBCASE("bad epsilon") {
    const StochasticGraph g({"a"}, line({0, 1}), {{1, 0}});
    CHECK_THROWS_AS(estimate_emst_dp(g, {.epsilon = 2.0}), DomainError);
  }
}

TEST_CASE("full-budget estimates track the oracle, certain and existential") {
  Rng rng(64);
  int ok = 0, total = 0;
  for (int trial = 0; trial < 12; ++trial) {
    const auto g = dp_instance(rng, trial);
    const double truth = exact_expectation(g, Functional::mst).value;
    if (truth == 0.0) continue;
    const auto r = estimate_emst_dp(g, {.epsilon = 0.25, .seed = 30 + static_cast<std::uint64_t>(trial)});
    ++total;
    ok += std::abs(r.value - truth) <= 0.25 * truth;
    CHECK(r.samples_used == r.samples_full);
  }
  CHECK(ok == total);
}

TEST_CASE("thread count does not change the estimate") {
  Rng rng(65);
  const auto g = dp_instance(rng, 5);
  EstimateOptions opt{.epsilon = 0.25, .seed = 4, .threads = 1};
  const double one = estimate_emst_dp(g, opt).value;
  opt.threads = 8;
  CHECK(estimate_emst_dp(g, opt).value == one);
}

}  // TEST_SUITE
