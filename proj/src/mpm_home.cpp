#include "stochgraph/mpm_home.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "stochgraph/errors.hpp"
#include "stochgraph/solvers.hpp"

namespace stochgraph {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t size) : parent_(size) { std::iota(parent_.begin(), parent_.end(), 0u); }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<std::uint32_t> parent_;
};

void require_mpm_input(const StochasticGraph& g, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw DomainError("epsilon must lie in (0, 1]");
  if (g.mode() != PresenceMode::certain) throw DomainError("home clustering requires certain presence");
  if (g.node_count() % 2 != 0) throw DomainError("perfect matching needs an even number of nodes");
}

// Home root per node if Q1 and Q2 both hold for the current components.
std::optional<std::vector<std::uint32_t>> accept(const StochasticGraph& g, DisjointSets& sets, double theta) {
  const std::size_t m = g.point_count();
  std::vector<double> mass(m);
  std::vector<std::uint32_t> homes(g.node_count());
  std::vector<std::size_t> count(m, 0);
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    std::fill(mass.begin(), mass.end(), 0.0);
    const auto row = g.row(static_cast<NodeIndex>(v));
    for (std::size_t s = 0; s < m; ++s) {
      if (row[s] > 0.0) mass[sets.find(static_cast<std::uint32_t>(s))] += row[s];
    }
    const auto best = static_cast<std::uint32_t>(std::max_element(mass.begin(), mass.end()) - mass.begin());
    if (mass[best] < 1.0 - theta - 1e-12) return std::nullopt;
    homes[v] = best;
    ++count[best];
  }
  for (std::size_t c : count) {
    if (c % 2 != 0) return std::nullopt;
  }
  return homes;
}

HomeClustering build(const StochasticGraph& g, DisjointSets& sets, const std::vector<std::uint32_t>& homes,
                     double T, double theta) {
  const std::size_t m = g.point_count();
  HomeClustering out;
  out.T = T;
  out.theta = theta;
  std::vector<std::size_t> index(m, std::numeric_limits<std::size_t>::max());
  std::vector<char> used(m, 0);
  for (auto root : homes) used[root] = 1;
  // Points are scanned in ascending order, so clusters come out ordered by smallest member.
  for (std::size_t s = 0; s < m; ++s) {
    const auto root = sets.find(static_cast<std::uint32_t>(s));
    if (!used[root]) continue;
    if (index[root] == std::numeric_limits<std::size_t>::max()) {
      index[root] = out.clusters.size();
      out.clusters.emplace_back();
    }
    out.clusters[index[root]].push_back(static_cast<PointIndex>(s));
  }
  out.home_of.resize(homes.size());
  for (std::size_t v = 0; v < homes.size(); ++v) out.home_of[v] = index[homes[v]];
  for (const auto& cluster : out.clusters) out.D = std::max(out.D, diameter(g.space(), cluster));
  return out;
}

}  // namespace

double escape_bound(double epsilon, std::size_t n, std::size_t m) {
  const double md = static_cast<double>(m);
  return epsilon / (16.0 * static_cast<double>(n) * md * md * md);
}

HomeClustering find_home_clusters(const StochasticGraph& g, double epsilon) {
  require_mpm_input(g, epsilon);
  const MetricSpace& space = g.space();
  const std::size_t m = g.point_count();
  const double theta = escape_bound(epsilon, g.node_count(), m);

  std::vector<EdgeKey> edges;
  edges.reserve(m * (m - 1) / 2);
  for (PointIndex a = 0; a < m; ++a) {
    for (PointIndex b = a + 1; b < m; ++b) edges.push_back(EdgeKey::between(space, a, b));
  }
  std::sort(edges.begin(), edges.end(), [](const EdgeKey& x, const EdgeKey& y) { return x < y; });

  DisjointSets sets(m);
  if (auto homes = accept(g, sets, theta)) return build(g, sets, *homes, 0.0, theta);
  std::size_t i = 0;
  while (i < edges.size()) {
    const double length = edges[i].length;
    bool merged = false;
    for (; i < edges.size() && edges[i].length == length; ++i) {
      merged |= sets.unite(edges[i].lo_point(), edges[i].hi_point());
    }
    if (!merged) continue;
    if (auto homes = accept(g, sets, theta)) return build(g, sets, *homes, length / 2.0, theta);
  }
  throw InvariantViolation("cluster sweep ended without an acceptable clustering");
}

EstimateReport estimate_empm(const StochasticGraph& g, const EstimateOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  require_mpm_input(g, options.epsilon);

  EstimateReport report;
  report.estimator = "mpm-home";
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

  const HomeClustering homes = find_home_clusters(g, eps_tr);
  {
    std::ostringstream out;
    out << "clusters=" << homes.clusters.size() << " T=" << homes.T << " D=" << homes.D << " theta=" << homes.theta;
    report.notes.push_back(out.str());
  }
  const double D = homes.D;
  const double far_radius = (nd / eps_tr) * D;

  std::vector<double> home_mass(n);
  std::vector<std::vector<char>> in_home(n, std::vector<char>(m, 0));
  for (std::size_t v = 0; v < n; ++v) {
    const auto& h = homes.home(static_cast<NodeIndex>(v));
    home_mass[v] = g.node_mass(static_cast<NodeIndex>(v), h);
    for (PointIndex s : h) in_home[v][s] = 1;
  }
  auto others_home = [&](std::size_t v) {
    double p = 1.0;
    for (std::size_t u = 0; u < n; ++u) {
      if (u != v) p *= home_mass[u];
    }
    return p;
  };
  double all_home = 1.0;
  for (double p : home_mass) all_home *= p;

  struct Escape {
    std::vector<PointIndex> near;
    double near_mass = 0.0;
    double near_min_gap = std::numeric_limits<double>::infinity();
    double far_weighted = 0.0;
    double far_mass = 0.0;
  };
  std::vector<Escape> escapes(n);
  for (std::size_t v = 0; v < n; ++v) {
    const auto& h = homes.home(static_cast<NodeIndex>(v));
    for (PointIndex s : g.support(static_cast<NodeIndex>(v))) {
      if (in_home[v][s]) continue;
      const double p = g.prob(static_cast<NodeIndex>(v), s);
      const double gap = point_set_distance(space, s, h);
      if (gap < far_radius) {
        escapes[v].near.push_back(s);
        escapes[v].near_mass += p;
        escapes[v].near_min_gap = std::min(escapes[v].near_min_gap, gap);
      } else {
        escapes[v].far_weighted += p * gap;
        escapes[v].far_mass += p;
      }
    }
  }

  std::size_t mc_terms = D > 0.0 ? 1 : 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (escapes[v].near_mass > 0.0 && others_home(v) > 0.0) ++mc_terms;
  }
  const double delta = mc_terms > 0 ? 1.0 / (8.0 * static_cast<double>(mc_terms)) : 0.5;
  const double mu_home = eps_tr * D / (64.0 * nd * std::pow(md, 5));

  auto home_event = [&] {
    EventSpec event = EventSpec::unrestricted(g);
    for (std::size_t v = 0; v < n; ++v) event.restrict_to(static_cast<NodeIndex>(v), homes.home(static_cast<NodeIndex>(v)));
    return event;
  };

  {
    TermReport term{.name = "mpm/home-all", .probability = all_home};
    if (D > 0.0) {
      const double upper = nd * D;
      term.method = TermMethod::monte_carlo;
      term.budget = make_budget(upper, mu_home, eps_mc, delta);
      term.samples = scaled_samples(term.budget->samples, options.budget_scale);
      SampleObserver check;
      if (options.check_invariants) {
        check = [upper](std::span<const Location>, double value) {
          if (value < 0.0 || value > upper * (1.0 + 1e-9)) {
            throw InvariantViolation("MPM with every node at home exceeds n D");
          }
        };
      }
      const auto mean = estimate_conditional(g, Functional::mpm, home_event(), term.samples,
                                             {options.seed, stream_tag("mpm-home/" + term.name)}, options.threads, check);
      term.conditional_mean = mean.mean;
      term.value = all_home * mean.mean;
      if (mean.mean < mu_home) term.flags.push_back("possibly-negligible");
    } else {
      // Every cluster is a single location with an even number of residents.
      term.method = TermMethod::exact;
      term.flags.push_back("zero-diameter-homes");
    }
    report.terms.push_back(std::move(term));
  }

  for (std::size_t v = 0; v < n; ++v) {
    const Escape& esc = escapes[v];
    const double others = others_home(v);
    const std::string& node = g.node_id(static_cast<NodeIndex>(v));
    if (esc.near_mass > 0.0 && others > 0.0) {
      TermReport term{.name = "mpm/near/" + node, .method = TermMethod::monte_carlo,
                      .probability = esc.near_mass * others};
      const double upper = far_radius + (nd + 1.0) * D;
      const double mu_lower = std::max(mu_home / 2.0, esc.near_min_gap);
      term.budget = make_budget(upper, mu_lower, eps_mc, delta);
      term.samples = scaled_samples(term.budget->samples, options.budget_scale);
      EventSpec event = home_event();
      event.restrict_to(static_cast<NodeIndex>(v), esc.near);
      SampleObserver check;
      if (options.check_invariants) {
        const auto& h = homes.home(static_cast<NodeIndex>(v));
        check = [&space, &h, v, upper](std::span<const Location> loc, double value) {
          const double gap = point_set_distance(space, static_cast<PointIndex>(loc[v]), h);
          if (value < gap * (1.0 - 1e-12) || value > upper * (1.0 + 1e-9)) {
            throw InvariantViolation("MPM under a near escape is outside [d(s,H(v)), n/eps D + (n+1) D]");
          }
        };
      }
      const auto mean = estimate_conditional(g, Functional::mpm, event, term.samples,
                                             {options.seed, stream_tag("mpm-home/" + term.name)}, options.threads, check);
      term.conditional_mean = mean.mean;
      term.value = term.probability * mean.mean;
      report.terms.push_back(std::move(term));
    }
    if (esc.far_mass > 0.0) {
      TermReport term{.name = "mpm/far/" + node, .method = TermMethod::far_field,
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
