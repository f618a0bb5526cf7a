#include "stochgraph/metric_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stochgraph/errors.hpp"

namespace stochgraph {

MetricSpace MetricSpace::from_matrix(std::vector<std::string> ids, const std::vector<std::vector<double>>& dist) {
  const std::size_t m = ids.size();
  if (dist.size() != m) {
    throw ValidationError("distance matrix has " + std::to_string(dist.size()) + " rows for " +
                          std::to_string(m) + " points");
  }
  MetricSpace space;
  space.ids_ = std::move(ids);
  space.dist_.resize(m * m);
  for (std::size_t a = 0; a < m; ++a) {
    if (dist[a].size() != m) throw ValidationError("distance matrix row " + std::to_string(a) + " has wrong length");
    std::copy(dist[a].begin(), dist[a].end(), space.dist_.begin() + static_cast<std::ptrdiff_t>(a * m));
  }
  space.index_ids();
  space.validate();
  return space;
}

MetricSpace MetricSpace::from_coords(std::vector<std::string> ids, std::vector<std::vector<double>> coords) {
  const std::size_t m = ids.size();
  if (coords.size() != m) throw ValidationError("coordinate count does not match point count");
  for (std::size_t a = 1; a < m; ++a) {
    if (coords[a].size() != coords[0].size()) throw ValidationError("points have mixed coordinate dimensions");
  }
  MetricSpace space;
  space.ids_ = std::move(ids);
  space.dist_.assign(m * m, 0.0);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      double sq = 0.0;
      for (std::size_t k = 0; k < coords[a].size(); ++k) {
        const double diff = coords[a][k] - coords[b][k];
        sq += diff * diff;
      }
      const double d = std::sqrt(sq);
      space.dist_[a * m + b] = d;
      space.dist_[b * m + a] = d;
    }
  }
  space.coords_ = std::move(coords);
  space.index_ids();
  space.validate();
  return space;
}

std::optional<PointIndex> MetricSpace::find(std::string_view id) const {
  const auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

MetricSpace MetricSpace::scaled(double c) const {
  if (!(c > 0.0)) throw DomainError("scale factor must be positive");
  MetricSpace out = *this;
  for (double& d : out.dist_) d *= c;
  for (auto& xs : out.coords_) {
    for (double& x : xs) x *= c;
  }
  return out;
}

PointIndex MetricSpace::add_copy(PointIndex original, std::string id) {
  const std::size_t m = size();
  if (original >= m) throw DomainError("add_copy: unknown point");
  if (by_id_.contains(id)) throw ValidationError("duplicate point id '" + id + "'");
  std::vector<double> grown((m + 1) * (m + 1), 0.0);
  for (std::size_t a = 0; a < m; ++a) {
    std::copy_n(dist_.begin() + static_cast<std::ptrdiff_t>(a * m), m,
                grown.begin() + static_cast<std::ptrdiff_t>(a * (m + 1)));
  }
  for (std::size_t b = 0; b < m; ++b) {
    const double d = dist_[original * m + b];
    grown[m * (m + 1) + b] = d;
    grown[b * (m + 1) + m] = d;
  }
  dist_ = std::move(grown);
  ids_.push_back(std::move(id));
  by_id_.emplace(ids_.back(), static_cast<PointIndex>(m));
  if (!coords_.empty()) coords_.push_back(coords_[original]);
  return static_cast<PointIndex>(m);
}

void MetricSpace::index_ids() {
  by_id_.clear();
  for (std::size_t p = 0; p < ids_.size(); ++p) {
    if (!by_id_.emplace(ids_[p], static_cast<PointIndex>(p)).second) {
      throw ValidationError("duplicate point id '" + ids_[p] + "'");
    }
  }
}

void MetricSpace::validate() const {
  const std::size_t m = size();
  if (m == 0) throw ValidationError("metric space has no points");
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      const double d = dist_[a * m + b];
      if (!std::isfinite(d) || d < 0.0) {
        throw ValidationError("distance " + ids_[a] + "-" + ids_[b] + " is negative or not finite");
      }
      if (a == b && d != 0.0) throw ValidationError("nonzero self distance at " + ids_[a]);
      if (d != dist_[b * m + a]) throw ValidationError("asymmetric distance " + ids_[a] + "-" + ids_[b]);
    }
  }
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      const double ab = dist_[a * m + b];
      for (std::size_t c = 0; c < m; ++c) {
        const double via = ab + dist_[b * m + c];
        if (dist_[a * m + c] > via * (1.0 + kTriangleTolerance)) {
          throw ValidationError("triangle inequality fails for " + ids_[a] + ", " + ids_[b] + ", " + ids_[c]);
        }
      }
    }
  }
}

double point_set_distance(const MetricSpace& space, PointIndex p, std::span<const PointIndex> set) {
  if (set.empty()) throw DomainError("distance to an empty point set");
  double best = std::numeric_limits<double>::infinity();
  for (PointIndex h : set) best = std::min(best, space(p, h));
  return best;
}

double diameter(const MetricSpace& space, std::span<const PointIndex> set) {
  if (set.empty()) throw DomainError("diameter of an empty point set");
  double best = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (std::size_t j = i + 1; j < set.size(); ++j) best = std::max(best, space(set[i], set[j]));
  }
  return best;
}

double set_set_distance(const MetricSpace& space, std::span<const PointIndex> lhs,
                        std::span<const PointIndex> rhs) {
  if (lhs.empty() || rhs.empty()) throw DomainError("distance between point sets requires nonempty sets");
  double best = std::numeric_limits<double>::infinity();
  for (PointIndex a : lhs) {
    for (PointIndex b : rhs) best = std::min(best, space(a, b));
  }
  return best;
}

}  // namespace stochgraph
