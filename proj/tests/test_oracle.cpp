#include <doctest.h>

#include "stochgraph/errors.hpp"
#include "stochgraph/exact_oracle.hpp"
#include "stochgraph/solvers.hpp"
#include "test_support.hpp"

using namespace stochgraph;
using namespace testkit;

TEST_SUITE("oracle") {

TEST_CASE("functional names round-trip") {
  for (auto f : {Functional::mst, Functional::mpm, Functional::cc, Functional::nn_total, Functional::nn_longest}) {
    CHECK(parse_functional(to_string(f)) == f);
  }
  CHECK_THROWS_AS(parse_functional("tsp"), ValidationError);
}

TEST_CASE("small worked examples") {
  const auto s = line({0, 1});
  const StochasticGraph g({"v1", "v2"}, s, {{0.5, 0.5}, {0.5, 0.5}});
  CHECK(exact_expectation(g, Functional::mst).value == doctest::Approx(0.5));
  CHECK(exact_expectation(g, Functional::cc).value == doctest::Approx(1.0));  // 2 * E[pair distance]
  CHECK(exact_expectation(g, Functional::mst).count == 4);

  const StochasticGraph det({"v1", "v2"}, line({0, 3}), {{1, 0}, {0, 1}});
  CHECK(exact_expectation(det, Functional::mst).value == 3.0);
  CHECK(exact_expectation(det, Functional::cc).value == 6.0);
}

TEST_CASE("exact expectation equals reference enumeration") {
  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + trial % 3 * 1;
    const bool existential = trial % 4 == 3;
    const auto g = random_graph(rng, trial % 2 ? random_plane(rng, 5) : random_metric(rng, 5), n, 3,
                                existential ? 0.15 : 0.0);
    const auto& space = g.space();
    CHECK(close(exact_expectation(g, Functional::mst).value,
                brute_expectation(g, [&](const auto& p) { return brute_mst(space, p); }), 1e-12));
    CHECK(close(exact_expectation(g, Functional::cc).value,
                brute_expectation(g, [&](const auto& p) { return p.size() < 2 ? 0.0 : brute_cc(space, p); }), 1e-12));
    CHECK(close(exact_expectation(g, Functional::nn_total).value,
                brute_expectation(g, [&](const auto& p) { return p.size() < 2 ? 0.0 : brute_nn(space, p).total; }),
                1e-12));
    if (!existential && n % 2 == 0) {
      CHECK(close(exact_expectation(g, Functional::mpm).value,
                  brute_expectation(g, [&](const auto& p) { return brute_mpm(space, p); }), 1e-12));
    }
  }
}

TEST_CASE("law of total expectation over a product partition") {
  Rng rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = random_graph(rng, random_plane(rng, 4), 3, 4);
    const double total = exact_expectation(g, Functional::mst).value;
    // Partition on node 0's location, and on whether node 1 sits in {p0,p1}.
    const PointIndex low[] = {0, 1};
    const PointIndex high[] = {2, 3};
    double sum = 0.0;
    for (PointIndex s = 0; s < 4; ++s) {
      for (auto part : {std::span<const PointIndex>(low), std::span<const PointIndex>(high)}) {
        EventSpec e = EventSpec::unrestricted(g);
        e.force(0, s);
        e.restrict_to(1, part);
        sum += exact_term(g, Functional::mst, e).value;
      }
    }
    CHECK(close(sum, total, 1e-10));
  }
}

TEST_CASE("conditioning and zero-probability events") {
  const auto s = line({0, 1, 2});
  const StochasticGraph g({"a", "b"}, s, {{0.5, 0.5, 0}, {0, 0.5, 0.5}});
  EventSpec e = EventSpec::unrestricted(g);
  e.force(0, 2);  // a never sits at p2
  CHECK(exact_term(g, Functional::mst, e).value == 0.0);
  CHECK(exact_term(g, Functional::mst, e).probability == 0.0);
  CHECK_THROWS_AS(exact_expectation(g, Functional::mst, e), DomainError);

  EventSpec f = EventSpec::unrestricted(g);
  f.force(0, 0);
  const auto r = exact_expectation(g, Functional::mst, f);
  CHECK(r.value == doctest::Approx(1.5));
  CHECK(r.probability == doctest::Approx(0.5));
  CHECK(exact_term(g, Functional::mst, EventSpec::unrestricted(g)).value ==
        doctest::Approx(exact_expectation(g, Functional::mst).value));
}

TEST_CASE("cap refusal and thread invariance") {
  Rng rng(23);
  const auto g = random_graph(rng, random_plane(rng, 6), 6, 6);
  const auto size = enumeration_size(g, EventSpec::unrestricted(g));
  CHECK_THROWS_AS(exact_expectation(g, Functional::mst, std::nullopt, {size - 1, 1}), BudgetError);
  const double one = exact_expectation(g, Functional::mst, std::nullopt, {size, 1}).value;
  const double four = exact_expectation(g, Functional::mst, std::nullopt, {size, 4}).value;
  CHECK(one == four);
}

TEST_CASE("existential mode treats absence as a symbol") {
  const auto s = line({0, 2});
  const StochasticGraph g({"a", "b"}, s, {{0.5, 0.0}, {0.0, 1.0}}, PresenceMode::existential);
  CHECK(enumeration_size(g, EventSpec::unrestricted(g)) == 2);
  CHECK(exact_expectation(g, Functional::mst).value == doctest::Approx(1.0));
  CHECK(exact_expectation(g, Functional::cc).value == doctest::Approx(2.0));
  CHECK_THROWS_AS(exact_expectation(g, Functional::mpm), DomainError);  // odd present count occurs
}

TEST_CASE("matching lower bound from two disjoint sets") {
  // E[MPM] >= min(p_v(H1), p_v(H2)) / m * d(H1, H2) for any node v.
  Rng rng(24);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 4 + trial % 2;
    const auto g = random_graph(rng, trial % 2 ? random_plane(rng, m) : random_metric(rng, m), 2 + 2 * (trial % 2),
                                m);
    const double empm = exact_expectation(g, Functional::mpm).value;
    std::vector<PointIndex> pts(m);
    std::iota(pts.begin(), pts.end(), PointIndex{0});
    std::shuffle(pts.begin(), pts.end(), rng);
    const std::size_t cut = 1 + rng() % (m - 1);
    const std::vector<PointIndex> h1(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(cut));
    const std::vector<PointIndex> h2(pts.begin() + static_cast<std::ptrdiff_t>(cut), pts.end());
    const double gap = set_set_distance(g.space(), h1, h2);
    for (NodeIndex v = 0; v < g.node_count(); ++v) {
      const double bound = std::min(g.node_mass(v, h1), g.node_mass(v, h2)) / static_cast<double>(m) * gap;
      CHECK(empm >= bound * (1 - 1e-12));
      ++checked;
    }
  }
  CHECK(checked > 0);
}

}  // TEST_SUITE
