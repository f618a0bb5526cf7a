#include "stochgraph/generators.hpp"

#include <algorithm>
#include <numeric>

#include "stochgraph/errors.hpp"
#include "stochgraph/rng.hpp"

namespace stochgraph {

std::string_view to_string(GeneratorKind kind) noexcept {
  switch (kind) {
    case GeneratorKind::euclidean_uniform: return "euclidean-uniform";
    case GeneratorKind::random_metric: return "random-metric";
    case GeneratorKind::home_separated: return "home-separated";
    case GeneratorKind::colocated_mass: return "colocated-mass";
  }
  return "unknown";
}

const std::vector<GeneratorKind>& all_generators() {
  static const std::vector<GeneratorKind> kinds = {GeneratorKind::euclidean_uniform, GeneratorKind::random_metric,
                                                   GeneratorKind::home_separated, GeneratorKind::colocated_mass};
  return kinds;
}

GeneratorKind parse_generator(std::string_view name) {
  for (GeneratorKind kind : all_generators()) {
    if (to_string(kind) == name) return kind;
  }
  throw ValidationError("unknown generator '" + std::string(name) + "'");
}

namespace {

std::vector<std::string> numbered(const char* prefix, std::size_t count, std::size_t first) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < count; ++i) ids.push_back(prefix + std::to_string(first + i));
  return ids;
}

// k distinct entries of `pool`, in drawn order.
std::vector<PointIndex> choose(Substream& rng, std::vector<PointIndex> pool, std::size_t k) {
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

// Random weights on `support` summing to `total`.
void spread(Substream& rng, std::vector<double>& row, const std::vector<PointIndex>& support, double total) {
  std::vector<double> w(support.size());
  for (double& x : w) x = rng.uniform(0.1, 1.0);
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  double placed = 0.0;
  for (std::size_t i = 0; i + 1 < support.size(); ++i) {
    row[support[i]] += total * w[i] / sum;
    placed += total * w[i] / sum;
  }
  row[support.back()] += total - placed;
}

std::vector<PointIndex> iota_points(std::size_t count) {
  std::vector<PointIndex> pts(count);
  std::iota(pts.begin(), pts.end(), PointIndex{0});
  return pts;
}

}  // namespace

StochasticGraph generate(GeneratorKind kind, std::size_t n, std::size_t m, std::uint64_t seed,
                         const GeneratorOptions& options) {
  if (n < 1 || m < 1) throw ValidationError("generator needs at least one node and one point");
  if (kind == GeneratorKind::home_separated && m < 2) throw ValidationError("home-separated needs m >= 2");
  if (!(options.absent_mass >= 0.0 && options.absent_mass < 1.0)) {
    throw ValidationError("absent mass must lie in [0, 1)");
  }
  if (options.max_support < 1) throw ValidationError("max support must be positive");

  Substream rng({seed, stream_tag("gen/" + std::string(to_string(kind)))}, (static_cast<std::uint64_t>(n) << 32) | m);
  const auto point_ids = numbered("p", m, 0);
  const auto node_ids = numbered("v", n, 1);
  const double present = 1.0 - options.absent_mass;

  MetricSpace space;
  switch (kind) {
    case GeneratorKind::euclidean_uniform:
    case GeneratorKind::home_separated: {
      std::vector<std::vector<double>> coords(m);
      for (auto& c : coords) c = {rng.uniform(), rng.uniform()};
      if (kind == GeneratorKind::home_separated) coords.back() = {0.5 + kFarDistance, 0.5};
      space = MetricSpace::from_coords(point_ids, std::move(coords));
      break;
    }
    case GeneratorKind::random_metric: {
      std::vector<std::vector<double>> d(m, std::vector<double>(m, 0.0));
      for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) d[a][b] = d[b][a] = rng.uniform(1.0, 10.0);
      }
      for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t a = 0; a < m; ++a) {
          for (std::size_t b = 0; b < m; ++b) d[a][b] = std::min(d[a][b], d[a][k] + d[k][b]);
        }
      }
      space = MetricSpace::from_matrix(point_ids, d);
      break;
    }
    case GeneratorKind::colocated_mass: {
      const std::size_t sites = (m + 1) / 2;
      std::vector<double> where(sites);
      for (double& x : where) x = rng.uniform(0.0, 10.0);
      std::vector<std::vector<double>> coords(m);
      for (std::size_t s = 0; s < m; ++s) coords[s] = {where[s % sites]};
      space = MetricSpace::from_coords(point_ids, std::move(coords));
      break;
    }
  }

  std::vector<std::vector<double>> probs(n, std::vector<double>(m, 0.0));
  const std::size_t k_max = std::min(options.max_support, m);
  switch (kind) {
    case GeneratorKind::euclidean_uniform:
    case GeneratorKind::random_metric:
      for (auto& row : probs) {
        const auto k = 1 + static_cast<std::size_t>(rng.below(k_max));
        spread(rng, row, choose(rng, iota_points(m), k), present);
      }
      break;
    case GeneratorKind::home_separated: {
      const double escape = kEscapeMass / static_cast<double>(n);
      const std::size_t k_home = std::min(options.max_support, m - 1);
      for (auto& row : probs) {
        const auto k = 1 + static_cast<std::size_t>(rng.below(k_home));
        spread(rng, row, choose(rng, iota_points(m - 1), k), present * (1.0 - escape));
        row[m - 1] = present * escape;
      }
      break;
    }
    case GeneratorKind::colocated_mass: {
      // All nodes share one support, so several nodes crowd each shared site.
      const auto shared = choose(rng, iota_points(m), k_max);
      for (auto& row : probs) spread(rng, row, shared, present);
      break;
    }
  }
  return StochasticGraph(node_ids, std::move(space), std::move(probs),
                         options.absent_mass > 0.0 ? PresenceMode::existential : PresenceMode::certain);
}

}  // namespace stochgraph
