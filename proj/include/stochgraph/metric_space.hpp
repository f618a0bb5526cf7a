#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stochgraph {

using PointIndex = std::uint32_t;

/// Finite metric space over m named points, stored as a dense distance matrix.
class MetricSpace {
 public:
  /// Relative slack allowed in the triangle inequality during validation.
  static constexpr double kTriangleTolerance = 1e-9;

  MetricSpace() = default;

  /// Builds from an explicit matrix; throws ValidationError unless it is a metric.
  static MetricSpace from_matrix(std::vector<std::string> ids, const std::vector<std::vector<double>>& dist);

  /// Builds from coordinates, with Euclidean (L2) distances.
  static MetricSpace from_coords(std::vector<std::string> ids, std::vector<std::vector<double>> coords);

  std::size_t size() const noexcept { return ids_.size(); }

  double operator()(PointIndex a, PointIndex b) const noexcept { return dist_[a * ids_.size() + b]; }

  const std::string& id(PointIndex p) const { return ids_.at(p); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::optional<PointIndex> find(std::string_view id) const;

  bool has_coords() const noexcept { return !coords_.empty(); }
  const std::vector<double>& coords(PointIndex p) const { return coords_.at(p); }

  /// Same points with every distance multiplied by c > 0.
  MetricSpace scaled(double c) const;

  /// Appends a point at distance zero from `original`, sharing all its other distances.
  PointIndex add_copy(PointIndex original, std::string id);

 private:
  void index_ids();
  void validate() const;

  std::vector<std::string> ids_;
  std::vector<double> dist_;
  std::vector<std::vector<double>> coords_;
  std::unordered_map<std::string, PointIndex> by_id_;
};

/// min over h in set of d(p, h). Throws DomainError on an empty set.
double point_set_distance(const MetricSpace& space, PointIndex p, std::span<const PointIndex> set);

/// max over pairs in set of d(a, b). Throws DomainError on an empty set.
double diameter(const MetricSpace& space, std::span<const PointIndex> set);

/// min over a in lhs, b in rhs of d(a, b). Throws DomainError if either set is empty.
double set_set_distance(const MetricSpace& space, std::span<const PointIndex> lhs,
                        std::span<const PointIndex> rhs);

}  // namespace stochgraph
