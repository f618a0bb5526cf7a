#include "stochgraph/cycle_cover.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>

#include "stochgraph/errors.hpp"
#include "stochgraph/solvers.hpp"

namespace stochgraph {

SplitSpace split_points(const StochasticGraph& g) {
  const std::size_t n = g.node_count();
  const std::size_t m = g.point_count();
  MetricSpace space = g.space();
  std::vector<PointIndex> origin(m);
  std::vector<NodeIndex> owner(m, kNoOwner);
  for (std::size_t s = 0; s < m; ++s) origin[s] = static_cast<PointIndex>(s);

  // columns[k] = (node, mass) placed on split point k
  std::vector<std::vector<std::pair<NodeIndex, double>>> columns(m);
  for (std::size_t s = 0; s < m; ++s) {
    for (std::size_t v = 0; v < n; ++v) {
      const double p = g.prob(static_cast<NodeIndex>(v), static_cast<PointIndex>(s));
      if (p <= 0.0) continue;
      if (owner[s] == kNoOwner) {
        owner[s] = static_cast<NodeIndex>(v);
        columns[s].emplace_back(static_cast<NodeIndex>(v), p);
        continue;
      }
      space.add_copy(static_cast<PointIndex>(s), g.space().id(static_cast<PointIndex>(s)) + "#" +
                                                     g.node_id(static_cast<NodeIndex>(v)));
      origin.push_back(static_cast<PointIndex>(s));
      owner.push_back(static_cast<NodeIndex>(v));
      columns.push_back({{static_cast<NodeIndex>(v), p}});
    }
  }
  std::vector<std::vector<double>> probs(n, std::vector<double>(space.size(), 0.0));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    for (const auto& [v, p] : columns[k]) probs[v][k] = p;
  }
  return {StochasticGraph(g.node_ids(), std::move(space), std::move(probs), g.mode()), std::move(origin),
          std::move(owner)};
}

std::vector<PointIndex> nearer_ball(const MetricSpace& space, PointIndex s, PointIndex t) {
  const EdgeKey bound = EdgeKey::between(space, s, t);
  std::vector<PointIndex> ball;
  for (PointIndex r = 0; r < space.size(); ++r) {
    if (r == s || r == t) continue;
    if (EdgeKey::between(space, s, r) < bound) ball.push_back(r);
  }
  return ball;
}

namespace {

struct PairSetup {
  NodeIndex v;
  NodeIndex u;
  std::vector<PointIndex> ball;
};

PairSetup setup(const SplitSpace& sp, PointIndex s, PointIndex t, bool mutual) {
  const std::size_t m = sp.graph.point_count();
  if (s >= m || t >= m || s == t) throw DomainError("pair term needs two distinct points");
  const NodeIndex v = sp.owner[s];
  const NodeIndex u = sp.owner[t];
  if (v == kNoOwner || u == kNoOwner) throw DomainError("pair term point has no node");
  if (v == u) throw DomainError("pair term points belong to the same node");
  PairSetup out{v, u, nearer_ball(sp.graph.space(), s, t)};
  if (mutual) {
    std::vector<char> member(m, 0);
    for (PointIndex r : out.ball) member[r] = 1;
    for (PointIndex r : nearer_ball(sp.graph.space(), t, s)) {
      if (!member[r]) out.ball.push_back(r);
    }
    std::sort(out.ball.begin(), out.ball.end());
  }
  return out;
}

double nearest_probability(const SplitSpace& sp, PointIndex s, PointIndex t, bool mutual) {
  const PairSetup pair = setup(sp, s, t, mutual);
  const StochasticGraph& g = sp.graph;
  double p = g.prob(pair.v, s) * g.prob(pair.u, t);
  std::vector<char> in_ball(g.point_count(), 0);
  for (PointIndex r : pair.ball) in_ball[r] = 1;
  for (std::size_t w = 0; w < g.node_count(); ++w) {
    if (w == pair.v || w == pair.u) continue;
    // 1 - p_w(B), summed over the complement so a fully covered node gives exactly 0
    double outside = g.absent_mass(static_cast<NodeIndex>(w));
    for (PointIndex r = 0; r < g.point_count(); ++r) {
      if (!in_ball[r]) outside += g.prob(static_cast<NodeIndex>(w), r);
    }
    p *= outside;
  }
  return std::max(0.0, p);
}

EventSpec nearest_event(const SplitSpace& sp, PointIndex s, PointIndex t, const PairSetup& pair) {
  EventSpec event = EventSpec::unrestricted(sp.graph);
  for (std::size_t w = 0; w < sp.graph.node_count(); ++w) {
    if (w == pair.v || w == pair.u) continue;
    event.exclude(static_cast<NodeIndex>(w), pair.ball);
  }
  event.force(pair.v, s);
  event.force(pair.u, t);
  return event;
}

}  // namespace

double prob_nearest(const SplitSpace& sp, PointIndex s, PointIndex t) { return nearest_probability(sp, s, t, false); }

double prob_mutual_nearest(const SplitSpace& sp, PointIndex s, PointIndex t) {
  return nearest_probability(sp, s, t, true);
}

PairTerm estimate_pair_term(const SplitSpace& sp, PointIndex s, PointIndex t, bool mutual, std::uint64_t samples,
                            std::uint64_t seed, unsigned threads, bool check_invariants) {
  const StochasticGraph& g = sp.graph;
  const MetricSpace& space = g.space();
  const PairSetup pair = setup(sp, s, t, mutual);
  PairTerm term{.s = space.id(s), .t = space.id(t), .v = g.node_id(pair.v), .u = g.node_id(pair.u), .mutual = mutual};
  term.prob_ns_t = nearest_probability(sp, s, t, mutual);
  if (term.prob_ns_t <= 0.0) return term;

  const ConditionalSampler sampler(g, nearest_event(sp, s, t, pair));
  const EdgeKey target = EdgeKey::between(space, s, t);
  const double d = target.length;
  const double n = static_cast<double>(g.node_count());
  std::atomic<std::uint64_t> hits{0};
  const std::string tag = "cc/" + term.s + ">" + term.t + (mutual ? "/mutual" : "");
  const double mean = parallel_mean(samples, {seed, stream_tag(tag)}, threads, [&](std::uint64_t, Substream& rng) {
    thread_local std::vector<Location> loc;
    thread_local std::vector<PointIndex> present;
    loc.resize(g.node_count());
    sampler.draw(rng, loc);
    present.clear();
    for (Location l : loc) {
      if (l != kAbsent) present.push_back(static_cast<PointIndex>(l));
    }
    const NNGraph nn = nn_graph(space, present);
    const bool indicator = nn.longest.lo_point() == target.lo_point() && nn.longest.hi_point() == target.hi_point();
    if (!check_invariants && !indicator) return 0.0;
    const double cc = cc_length(space, present);
    if (check_invariants) {
      const double slack = 1e-9 * std::max(1.0, cc);
      if (cc < nn.total - slack || cc > 2.0 * nn.total + slack) {
        throw InvariantViolation("sampled realization violates NN <= CC <= 2 NN");
      }
      const double lambda = nn.longest.length;
      if (lambda < nn.total / n - slack || lambda > nn.total + slack) {
        throw InvariantViolation("sampled realization violates NN/n <= Lambda <= NN");
      }
      if (indicator && (cc < d - slack || cc > 2.0 * n * d + slack)) {
        throw InvariantViolation("sampled realization violates d(s,t) <= CC <= 2n d(s,t) under A_s(t)");
      }
    }
    if (!indicator) return 0.0;
    hits.fetch_add(1, std::memory_order_relaxed);
    return cc;
  });
  term.samples = samples;
  term.indicator_hits = hits.load();
  term.estimate = mean * term.prob_ns_t;
  return term;
}

std::uint64_t pair_budget(double c, std::size_t n, std::size_t m, double epsilon) {
  if (!(c > 0.0)) throw DomainError("pair budget constant must be positive");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw DomainError("epsilon must lie in (0, 1]");
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  const double logs = std::max(std::log(nd) + std::log(md), 1.0);
  const double count = std::ceil(c * nd * nd * md * md * md * logs / (epsilon * epsilon * epsilon));
  if (!(count < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(count));
}

EstimateReport estimate_ecc(const StochasticGraph& g, const EstimateOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  if (!(options.epsilon > 0.0 && options.epsilon <= 1.0)) throw DomainError("epsilon must lie in (0, 1]");
  if (g.node_count() < 2) throw DomainError("cycle cover needs at least two nodes");

  EstimateReport report;
  report.estimator = "cc";
  report.epsilon = options.epsilon;
  report.epsilon_sampling = options.epsilon;
  report.epsilon_truncation = 0.0;
  report.seed = options.seed;
  report.budget_scale = options.budget_scale;
  note_budget_scale(report);

  const SplitSpace sp = split_points(g);
  const StochasticGraph& sg = sp.graph;
  const MetricSpace& space = sg.space();
  const std::size_t n = sg.node_count();
  const std::size_t m = sg.point_count();
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  report.notes.push_back("split points: " + std::to_string(g.point_count()) + " -> " + std::to_string(m));
  if (g.mode() == PresenceMode::existential) {
    report.notes.push_back("realizations with fewer than two present nodes contribute CC = 0");
  }

  struct Candidate {
    PointIndex s, t;
    double fwd, rev, both;
  };
  std::vector<Candidate> candidates;
  std::size_t pair_terms = 0;
  for (PointIndex s = 0; s < m; ++s) {
    for (PointIndex t = s + 1; t < m; ++t) {
      if (sp.owner[s] == kNoOwner || sp.owner[t] == kNoOwner || sp.owner[s] == sp.owner[t]) continue;
      Candidate c{s, t, prob_nearest(sp, s, t), prob_nearest(sp, t, s), prob_mutual_nearest(sp, s, t)};
      if (c.fwd <= 0.0 && c.rev <= 0.0) continue;
      pair_terms += (c.fwd > 0.0) + (c.rev > 0.0) + (c.both > 0.0);
      candidates.push_back(c);
    }
  }
  const std::uint64_t full = pair_budget(options.cc_budget_constant, n, m, options.epsilon);
  const std::uint64_t samples = scaled_samples(full, options.budget_scale);
  const double delta = 1.0 / (4.0 * static_cast<double>(std::max<std::size_t>(pair_terms, 1)));

  for (const Candidate& c : candidates) {
    const double d = space(c.s, c.t);
    TermReport term{.name = "cc/edge/" + space.id(c.s) + "~" + space.id(c.t),
                    .probability = c.fwd + c.rev - c.both};
    if (d == 0.0) {
      // Lambda of length zero forces every NN edge, hence CC, to zero.
      term.method = TermMethod::exact;
      term.flags.push_back("zero-length-edge");
      report.terms.push_back(std::move(term));
      continue;
    }
    term.method = TermMethod::monte_carlo;
    const std::size_t parts = (c.fwd > 0.0) + (c.rev > 0.0) + (c.both > 0.0);
    const std::uint64_t total =
        full > std::numeric_limits<std::uint64_t>::max() / parts ? std::numeric_limits<std::uint64_t>::max() : full * parts;
    term.budget = SampleBudget{total, 2.0 * nd * d, d * options.epsilon / (2.0 * nd * md * md * md),
                               options.epsilon, delta};
    double value = 0.0;
    auto run = [&](PointIndex a, PointIndex b, bool mutual, double sign) {
      PairTerm p = estimate_pair_term(sp, a, b, mutual, samples, options.seed, options.threads,
                                      options.check_invariants);
      value += sign * p.estimate;
      term.samples += p.samples;
      report.pairs.push_back(std::move(p));
    };
    if (c.fwd > 0.0) run(c.s, c.t, false, 1.0);
    if (c.rev > 0.0) run(c.t, c.s, false, 1.0);
    if (c.both > 0.0) run(c.s, c.t, true, -1.0);
    term.value = value;
    term.conditional_mean = term.probability > 0.0 ? value / term.probability : 0.0;
    if (value < 0.0) term.flags.push_back("negative-inclusion-exclusion");
    report.terms.push_back(std::move(term));
  }

  report.finalize();
  report.elapsed = std::chrono::steady_clock::now() - started;
  return report;
}

}  // namespace stochgraph
