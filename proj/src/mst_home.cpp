#include "stochgraph/mst_home.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "stochgraph/errors.hpp"
#include "stochgraph/solvers.hpp"

namespace stochgraph {

namespace {

void require_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw DomainError("epsilon must lie in (0, 1]");
}

std::string describe_home(const StochasticGraph& g, const HomeSet& home) {
  std::ostringstream out;
  out << "home: center=" << g.space().id(home.center) << " radius=" << home.radius
      << " |H|=" << home.members.size() << " diam=" << home.diameter << " p(H)=" << home.p_of_H;
  return out.str();
}

}  // namespace

bool HomeSet::contains(PointIndex s) const { return std::binary_search(members.begin(), members.end(), s); }

HomeSet find_home(const StochasticGraph& g, double epsilon) {
  require_epsilon(epsilon);
  if (g.mode() != PresenceMode::certain) throw DomainError("home construction requires certain presence");
  const MetricSpace& space = g.space();
  const std::size_t m = g.point_count();
  const double n = static_cast<double>(g.node_count());

  const double threshold = epsilon / (16.0 * static_cast<double>(m));
  std::vector<PointIndex> heavy;
  for (std::size_t r = 0; r < m; ++r) {
    if (g.point_mass(static_cast<PointIndex>(r)) >= threshold) heavy.push_back(static_cast<PointIndex>(r));
  }
  if (heavy.empty()) throw InvariantViolation("no point carries mass eps/(16m)");

  HomeSet home;
  home.center = heavy.front();
  home.radius = 0.0;
  if (heavy.size() > 1) {
    EdgeKey furthest = EdgeKey::between(space, heavy[0], heavy[1]);
    for (std::size_t a = 0; a < heavy.size(); ++a) {
      for (std::size_t b = a + 1; b < heavy.size(); ++b) {
        const EdgeKey key = EdgeKey::between(space, heavy[a], heavy[b]);
        if (furthest < key) furthest = key;
      }
    }
    home.center = furthest.lo_point();
    home.radius = furthest.length;
  }
  for (std::size_t r = 0; r < m; ++r) {
    if (space(home.center, static_cast<PointIndex>(r)) <= home.radius) home.members.push_back(static_cast<PointIndex>(r));
  }
  home.diameter = diameter(space, home.members);
  home.p_of_H = g.expected_mass(home.members);

  if (home.p_of_H < n - epsilon / 16.0 - 1e-12 * n) {
    throw InvariantViolation("home mass " + std::to_string(home.p_of_H) + " is below n - eps/16");
  }
  if (home.diameter > 2.0 * home.radius * (1.0 + 1e-12)) {
    throw InvariantViolation("home diameter exceeds twice its radius");
  }
  return home;
}

EstimateReport estimate_emst(const StochasticGraph& g, const EstimateOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  require_epsilon(options.epsilon);
  if (g.mode() != PresenceMode::certain) throw DomainError("home-method MST estimator requires certain presence");

  EstimateReport report;
  report.estimator = "mst-home";
  report.epsilon = options.epsilon;
  report.epsilon_sampling = options.epsilon / 2.0;
  report.epsilon_truncation = options.epsilon / 2.0;
  report.seed = options.seed;
  report.budget_scale = options.budget_scale;
  note_budget_scale(report);

  const std::size_t n = g.node_count();
  const std::size_t m = g.point_count();
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  const double eps_mc = report.epsilon_sampling;
  const double eps_tr = report.epsilon_truncation;
  const MetricSpace& space = g.space();

  if (n == 1) {
    report.terms.push_back({.name = "mst/single-node", .value = 0.0, .method = TermMethod::exact, .probability = 1.0});
    report.notes.push_back("single node: MST is identically zero");
    report.finalize();
    report.elapsed = std::chrono::steady_clock::now() - started;
    return report;
  }

  const HomeSet home = find_home(g, eps_tr);
  report.notes.push_back(describe_home(g, home));
  const double diam = home.diameter;
  const double far_radius = (nd / eps_tr) * diam;

  std::vector<double> home_mass(n);
  for (std::size_t v = 0; v < n; ++v) home_mass[v] = g.node_mass(static_cast<NodeIndex>(v), home.members);
  auto others_home = [&](std::size_t v) {
    double p = 1.0;
    for (std::size_t u = 0; u < n; ++u) {
      if (u != v) p *= home_mass[u];
    }
    return p;
  };
  double all_home = 1.0;
  for (double p : home_mass) all_home *= p;

  // Classify every escape point per node.
  struct Escape {
    std::vector<PointIndex> near;
    double near_mass = 0.0;
    double near_min_gap = 0.0;
    double far_weighted = 0.0;  // sum p_vs d(s,H)
    double far_mass = 0.0;
  };
  std::vector<Escape> escapes(n);
  for (std::size_t v = 0; v < n; ++v) {
    Escape& esc = escapes[v];
    esc.near_min_gap = std::numeric_limits<double>::infinity();
    for (PointIndex s : g.support(static_cast<NodeIndex>(v))) {
      if (home.contains(s)) continue;
      const double p = g.prob(static_cast<NodeIndex>(v), s);
      const double gap = point_set_distance(space, s, home.members);
      if (gap < far_radius) {
        esc.near.push_back(s);
        esc.near_mass += p;
        esc.near_min_gap = std::min(esc.near_min_gap, gap);
      } else {
        esc.far_weighted += p * gap;
        esc.far_mass += p;
      }
    }
  }

  std::size_t mc_terms = diam > 0.0 ? 1 : 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (escapes[v].near_mass > 0.0 && others_home(v) > 0.0) ++mc_terms;
  }
  const double delta = mc_terms > 0 ? 1.0 / (8.0 * static_cast<double>(mc_terms)) : 0.5;
  const double mu_home = diam * eps_tr * eps_tr / (32.0 * md * md);

  // All nodes at home.
  {
    TermReport term{.name = "mst/home-all", .probability = all_home};
    if (diam > 0.0) {
      const double upper = nd * diam;
      term.method = TermMethod::monte_carlo;
      term.budget = make_budget(upper, mu_home, eps_mc, delta);
      term.samples = scaled_samples(term.budget->samples, options.budget_scale);
      EventSpec event = EventSpec::unrestricted(g);
      for (std::size_t v = 0; v < n; ++v) event.restrict_to(static_cast<NodeIndex>(v), home.members);
      SampleObserver check;
      if (options.check_invariants) {
        check = [upper](std::span<const Location>, double value) {
          if (value < 0.0 || value > upper * (1.0 + 1e-9)) {
            throw InvariantViolation("MST under the all-home event exceeds n diam(H)");
          }
        };
      }
      const auto mean = estimate_conditional(g, Functional::mst, event, term.samples,
                                             {options.seed, stream_tag("mst-home/" + term.name)}, options.threads, check);
      term.conditional_mean = mean.mean;
      term.value = all_home * mean.mean;
      if (mean.mean < mu_home) term.flags.push_back("possibly-negligible");
    } else {
      term.method = TermMethod::exact;
      term.value = 0.0;
      term.flags.push_back("zero-diameter-home");
    }
    report.terms.push_back(std::move(term));
  }

  // Exactly one node outside the home.
  for (std::size_t v = 0; v < n; ++v) {
    const Escape& esc = escapes[v];
    const double others = others_home(v);
    const std::string& node = g.node_id(static_cast<NodeIndex>(v));
    if (esc.near_mass > 0.0 && others > 0.0) {
      TermReport term{.name = "mst/near/" + node, .method = TermMethod::monte_carlo,
                      .probability = esc.near_mass * others};
      const double upper = far_radius + nd * diam;
      const double mu_lower = std::max(mu_home / 2.0, esc.near_min_gap);
      term.budget = make_budget(upper, mu_lower, eps_mc, delta);
      term.samples = scaled_samples(term.budget->samples, options.budget_scale);
      EventSpec event = EventSpec::unrestricted(g);
      for (std::size_t u = 0; u < n; ++u) {
        if (u == v) {
          event.restrict_to(static_cast<NodeIndex>(u), esc.near);
        } else {
          event.restrict_to(static_cast<NodeIndex>(u), home.members);
        }
      }
      SampleObserver check;
      if (options.check_invariants) {
        check = [&, v, upper](std::span<const Location> loc, double value) {
          const double gap = point_set_distance(space, static_cast<PointIndex>(loc[v]), home.members);
          if (value < gap * (1.0 - 1e-12) || value > upper * (1.0 + 1e-9)) {
            throw InvariantViolation("MST under a near escape is outside [d(s,H), n/eps diam + n diam]");
          }
        };
      }
      const auto mean = estimate_conditional(g, Functional::mst, event, term.samples,
                                             {options.seed, stream_tag("mst-home/" + term.name)}, options.threads, check);
      term.conditional_mean = mean.mean;
      term.value = term.probability * mean.mean;
      report.terms.push_back(std::move(term));
    }
    if (esc.far_mass > 0.0) {
      TermReport term{.name = "mst/far/" + node, .method = TermMethod::far_field,
                      .probability = esc.far_mass * others};
      term.value = esc.far_weighted * others;
      term.conditional_mean = esc.far_weighted / esc.far_mass;
      report.terms.push_back(std::move(term));
    }
  }

  report.finalize();
  report.elapsed = std::chrono::steady_clock::now() - started;
  return report;
}

}  // namespace stochgraph
