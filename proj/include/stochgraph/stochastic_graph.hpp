#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stochgraph/metric_space.hpp"
#include "stochgraph/rng.hpp"

namespace stochgraph {

using NodeIndex = std::uint32_t;

/// Location of a node in a realization: a point index, or kAbsent.
using Location = std::int32_t;
inline constexpr Location kAbsent = -1;

enum class PresenceMode { certain, existential };

/// Nodes with independent discrete location distributions over a metric space.
class StochasticGraph {
 public:
  static constexpr double kMassTolerance = 1e-12;

  StochasticGraph() = default;

  /// probs[v][s] = Pr[node v realizes at point s]. Throws ValidationError when a
  /// row is negative, or does not sum to 1 (certain) / at most 1 (existential).
  StochasticGraph(std::vector<std::string> node_ids, MetricSpace space, std::vector<std::vector<double>> probs,
                  PresenceMode mode = PresenceMode::certain);

  std::size_t node_count() const noexcept { return node_ids_.size(); }
  std::size_t point_count() const noexcept { return space_.size(); }
  const MetricSpace& space() const noexcept { return space_; }
  PresenceMode mode() const noexcept { return mode_; }
  const std::string& node_id(NodeIndex v) const { return node_ids_.at(v); }
  const std::vector<std::string>& node_ids() const noexcept { return node_ids_; }

  double prob(NodeIndex v, PointIndex s) const noexcept { return probs_[v * space_.size() + s]; }
  std::span<const double> row(NodeIndex v) const noexcept {
    return {probs_.data() + v * space_.size(), space_.size()};
  }

  /// Pr[v absent]; zero in certain mode.
  double absent_mass(NodeIndex v) const noexcept { return absent_[v]; }

  /// p_v(H) = sum over s in H of p_vs.
  double node_mass(NodeIndex v, std::span<const PointIndex> set) const noexcept;

  /// p(s) = expected number of nodes at s.
  double point_mass(PointIndex s) const noexcept;

  /// p(H) = sum over s in H of p(s).
  double expected_mass(std::span<const PointIndex> set) const noexcept;

  /// Points s with p_vs > 0, ascending.
  std::vector<PointIndex> support(NodeIndex v) const;

  /// Same graph on a space with distances multiplied by c.
  StochasticGraph scaled(double c) const;

 private:
  std::vector<std::string> node_ids_;
  MetricSpace space_;
  std::vector<double> probs_;
  std::vector<double> absent_;
  PresenceMode mode_ = PresenceMode::certain;
};

/// One joint assignment of every node to a point (or kAbsent).
struct Realization {
  std::vector<Location> location;

  friend bool operator==(const Realization&, const Realization&) = default;
};

/// Pr[r] = product of per-node marginals. Throws ValidationError on a malformed realization.
double realization_probability(const StochasticGraph& g, const Realization& r);

/// Product-form event: each node is independently confined to an allowed set.
class EventSpec {
 public:
  EventSpec() = default;

  /// Every point (and absence, in existential mode) allowed for every node.
  static EventSpec unrestricted(const StochasticGraph& g);

  std::size_t node_count() const noexcept { return absent_ok_.size(); }
  std::size_t point_count() const noexcept { return points_; }

  /// Confines v to `allowed`; absence is permitted only if `absent_ok`.
  EventSpec& restrict_to(NodeIndex v, std::span<const PointIndex> allowed, bool absent_ok = false);

  /// Removes `excluded` from v's allowed set, keeping everything else.
  EventSpec& exclude(NodeIndex v, std::span<const PointIndex> excluded);

  /// Confines v to exactly one point.
  EventSpec& force(NodeIndex v, PointIndex s);

  bool allows(NodeIndex v, Location loc) const noexcept {
    return loc == kAbsent ? absent_ok_[v] != 0 : allowed_[v * points_ + static_cast<std::size_t>(loc)] != 0;
  }
  bool absent_allowed(NodeIndex v) const noexcept { return absent_ok_[v] != 0; }
  bool contains(const Realization& r) const;

  /// Allowed points of v, ascending.
  std::vector<PointIndex> allowed_points(NodeIndex v) const;

 private:
  std::size_t points_ = 0;
  std::vector<char> allowed_;
  std::vector<char> absent_ok_;
};

/// Probability mass of v's allowed set under its own distribution.
double allowed_mass(const StochasticGraph& g, const EventSpec& event, NodeIndex v);

/// Pr[event] = product over nodes of allowed_mass.
double event_probability(const StochasticGraph& g, const EventSpec& event);

/// Draws realizations from g conditioned on a product event by per-node
/// restriction and renormalization. Immutable and shareable across threads.
class ConditionalSampler {
 public:
  /// Throws DomainError if some node's allowed set has zero mass.
  ConditionalSampler(const StochasticGraph& g, const EventSpec& event);

  std::size_t node_count() const noexcept { return options_.size(); }

  /// Writes one location per node into `out` (size node_count()).
  void draw(Substream& rng, std::span<Location> out) const;

  Realization draw(Substream& rng) const;

 private:
  struct Option {
    Location location;
    double cumulative;
  };
  std::vector<std::vector<Option>> options_;
};

/// Convenience wrapper: one conditional draw from substream (key, index).
Realization sample(const StochasticGraph& g, const EventSpec& event, StreamKey key, std::uint64_t index);

}  // namespace stochgraph
