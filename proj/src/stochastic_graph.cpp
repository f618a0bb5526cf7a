#include "stochgraph/stochastic_graph.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "stochgraph/errors.hpp"

namespace stochgraph {

StochasticGraph::StochasticGraph(std::vector<std::string> node_ids, MetricSpace space,
                                 std::vector<std::vector<double>> probs, PresenceMode mode)
    : node_ids_(std::move(node_ids)), space_(std::move(space)), mode_(mode) {
  const std::size_t n = node_ids_.size();
  const std::size_t m = space_.size();
  if (n == 0) throw ValidationError("stochastic graph has no nodes");
  if (probs.size() != n) throw ValidationError("probability table has wrong number of rows");
  std::unordered_set<std::string> seen;
  for (const auto& id : node_ids_) {
    if (!seen.insert(id).second) throw ValidationError("duplicate node id '" + id + "'");
  }
  probs_.resize(n * m);
  absent_.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (probs[v].size() != m) throw ValidationError("node '" + node_ids_[v] + "' has wrong distribution length");
    double total = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
      const double p = probs[v][s];
      if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
        throw ValidationError("node '" + node_ids_[v] + "' has probability outside [0,1]");
      }
      probs_[v * m + s] = p;
      total += p;
    }
    if (mode_ == PresenceMode::certain) {
      if (std::abs(total - 1.0) > kMassTolerance) {
        throw ValidationError("node '" + node_ids_[v] + "' distribution sums to " + std::to_string(total) +
                              ", expected 1");
      }
      absent_[v] = 0.0;
    } else {
      if (total > 1.0 + kMassTolerance) {
        throw ValidationError("node '" + node_ids_[v] + "' distribution sums above 1");
      }
      absent_[v] = std::max(0.0, 1.0 - total);
    }
  }
}

double StochasticGraph::node_mass(NodeIndex v, std::span<const PointIndex> set) const noexcept {
  double total = 0.0;
  for (PointIndex s : set) total += prob(v, s);
  return total;
}

double StochasticGraph::point_mass(PointIndex s) const noexcept {
  double total = 0.0;
  for (std::size_t v = 0; v < node_count(); ++v) total += prob(static_cast<NodeIndex>(v), s);
  return total;
}

double StochasticGraph::expected_mass(std::span<const PointIndex> set) const noexcept {
  double total = 0.0;
  for (PointIndex s : set) total += point_mass(s);
  return total;
}

std::vector<PointIndex> StochasticGraph::support(NodeIndex v) const {
  std::vector<PointIndex> out;
  for (std::size_t s = 0; s < point_count(); ++s) {
    if (prob(v, static_cast<PointIndex>(s)) > 0.0) out.push_back(static_cast<PointIndex>(s));
  }
  return out;
}

StochasticGraph StochasticGraph::scaled(double c) const {
  StochasticGraph out = *this;
  out.space_ = space_.scaled(c);
  return out;
}

double realization_probability(const StochasticGraph& g, const Realization& r) {
  if (r.location.size() != g.node_count()) {
    throw ValidationError("realization assigns " + std::to_string(r.location.size()) + " nodes, graph has " +
                          std::to_string(g.node_count()));
  }
  double p = 1.0;
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    const Location loc = r.location[v];
    if (loc == kAbsent) {
      p *= g.absent_mass(static_cast<NodeIndex>(v));
    } else if (loc < 0 || static_cast<std::size_t>(loc) >= g.point_count()) {
      throw ValidationError("realization places node '" + g.node_id(static_cast<NodeIndex>(v)) +
                            "' at an unknown point");
    } else {
      p *= g.prob(static_cast<NodeIndex>(v), static_cast<PointIndex>(loc));
    }
  }
  return p;
}

EventSpec EventSpec::unrestricted(const StochasticGraph& g) {
  EventSpec e;
  e.points_ = g.point_count();
  e.allowed_.assign(g.node_count() * g.point_count(), 1);
  e.absent_ok_.assign(g.node_count(), g.mode() == PresenceMode::existential ? 1 : 0);
  return e;
}

EventSpec& EventSpec::restrict_to(NodeIndex v, std::span<const PointIndex> allowed, bool absent_ok) {
  if (v >= node_count()) throw DomainError("event: unknown node");
  std::fill_n(allowed_.begin() + static_cast<std::ptrdiff_t>(v * points_), points_, 0);
  for (PointIndex s : allowed) {
    if (s >= points_) throw DomainError("event: unknown point");
    allowed_[v * points_ + s] = 1;
  }
  absent_ok_[v] = absent_ok ? 1 : 0;
  return *this;
}

EventSpec& EventSpec::exclude(NodeIndex v, std::span<const PointIndex> excluded) {
  if (v >= node_count()) throw DomainError("event: unknown node");
  for (PointIndex s : excluded) {
    if (s >= points_) throw DomainError("event: unknown point");
    allowed_[v * points_ + s] = 0;
  }
  return *this;
}

EventSpec& EventSpec::force(NodeIndex v, PointIndex s) {
  const PointIndex one[] = {s};
  return restrict_to(v, one, false);
}

bool EventSpec::contains(const Realization& r) const {
  if (r.location.size() != node_count()) return false;
  for (std::size_t v = 0; v < node_count(); ++v) {
    if (!allows(static_cast<NodeIndex>(v), r.location[v])) return false;
  }
  return true;
}

std::vector<PointIndex> EventSpec::allowed_points(NodeIndex v) const {
  std::vector<PointIndex> out;
  for (std::size_t s = 0; s < points_; ++s) {
    if (allowed_[v * points_ + s]) out.push_back(static_cast<PointIndex>(s));
  }
  return out;
}

double allowed_mass(const StochasticGraph& g, const EventSpec& event, NodeIndex v) {
  double total = event.absent_allowed(v) ? g.absent_mass(v) : 0.0;
  for (std::size_t s = 0; s < g.point_count(); ++s) {
    if (event.allows(v, static_cast<Location>(s))) total += g.prob(v, static_cast<PointIndex>(s));
  }
  return total;
}

double event_probability(const StochasticGraph& g, const EventSpec& event) {
  if (event.node_count() != g.node_count() || event.point_count() != g.point_count()) {
    throw DomainError("event shape does not match graph");
  }
  double p = 1.0;
  for (std::size_t v = 0; v < g.node_count(); ++v) p *= allowed_mass(g, event, static_cast<NodeIndex>(v));
  return p;
}

ConditionalSampler::ConditionalSampler(const StochasticGraph& g, const EventSpec& event) {
  if (event.node_count() != g.node_count() || event.point_count() != g.point_count()) {
    throw DomainError("event shape does not match graph");
  }
  options_.resize(g.node_count());
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    const auto node = static_cast<NodeIndex>(v);
    double cumulative = 0.0;
    for (std::size_t s = 0; s < g.point_count(); ++s) {
      const double p = g.prob(node, static_cast<PointIndex>(s));
      if (p > 0.0 && event.allows(node, static_cast<Location>(s))) {
        cumulative += p;
        options_[v].push_back({static_cast<Location>(s), cumulative});
      }
    }
    if (event.absent_allowed(node) && g.absent_mass(node) > 0.0) {
      cumulative += g.absent_mass(node);
      options_[v].push_back({kAbsent, cumulative});
    }
    if (options_[v].empty()) {
      throw DomainError("conditioning event gives node '" + g.node_id(node) + "' zero probability");
    }
  }
}

void ConditionalSampler::draw(Substream& rng, std::span<Location> out) const {
  for (std::size_t v = 0; v < options_.size(); ++v) {
    const auto& opts = options_[v];
    if (opts.size() == 1) {
      out[v] = opts.front().location;
      continue;
    }
    const double target = rng.uniform() * opts.back().cumulative;
    auto it = std::upper_bound(opts.begin(), opts.end(), target,
                               [](double x, const Option& o) { return x < o.cumulative; });
    if (it == opts.end()) --it;
    out[v] = it->location;
  }
}

Realization ConditionalSampler::draw(Substream& rng) const {
  Realization r;
  r.location.resize(options_.size());
  draw(rng, r.location);
  return r;
}

Realization sample(const StochasticGraph& g, const EventSpec& event, StreamKey key, std::uint64_t index) {
  ConditionalSampler sampler(g, event);
  Substream rng(key, index);
  return sampler.draw(rng);
}

}  // namespace stochgraph
