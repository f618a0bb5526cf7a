#include "stochgraph/mst_dp.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <sstream>

#include "stochgraph/errors.hpp"
#include "stochgraph/exact_oracle.hpp"
#include "stochgraph/solvers.hpp"

namespace stochgraph {

double suffix_probability(const StochasticGraph& g, std::span<const PointIndex> suffix) {
  double p = 1.0;
  for (std::size_t w = 0; w < g.node_count(); ++w) {
    p *= g.node_mass(static_cast<NodeIndex>(w), suffix) + g.absent_mass(static_cast<NodeIndex>(w));
  }
  return p;
}

double total_weight(const DPState& state) {
  double total = state.base_weight;
  for (const auto& row : state.leaf_weight) {
    for (double w : row) total += w;
  }
  return total;
}

DPResult run_mst_dp(const StochasticGraph& g, const EstimateOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  if (!(options.epsilon > 0.0 && options.epsilon <= 1.0)) throw DomainError("epsilon must lie in (0, 1]");

  DPResult result{.state = {.split = split_points(g)}};
  DPState& st = result.state;
  EstimateReport& report = result.report;
  report.estimator = "mst-dp";
  report.epsilon = options.epsilon;
  report.epsilon_sampling = options.epsilon;
  report.seed = options.seed;
  report.budget_scale = options.budget_scale;
  note_budget_scale(report);

  const StochasticGraph& sg = st.split.graph;
  const MetricSpace& space = sg.space();
  const std::size_t n = sg.node_count();
  const double nd = static_cast<double>(n);

  // Global order: descending mass, index tie-break. Massless points can never be occupied.
  for (PointIndex s = 0; s < sg.point_count(); ++s) {
    if (st.split.owner[s] != kNoOwner) st.order.push_back(s);
  }
  std::vector<double> mass(sg.point_count());
  for (PointIndex s : st.order) mass[s] = sg.point_mass(s);
  std::stable_sort(st.order.begin(), st.order.end(), [&](PointIndex a, PointIndex b) { return mass[a] > mass[b]; });
  const std::size_t K = st.order.size();

  st.inner.resize(K);
  st.q.assign(K, 0.0);
  st.q_inner.resize(K);
  for (std::size_t i = 0; i < K; ++i) {
    const PointIndex ui = st.order[i];
    const NodeIndex oi = st.split.owner[ui];
    const std::span<const PointIndex> suffix(st.order.begin() + static_cast<std::ptrdiff_t>(i), st.order.end());
    const double a = sg.node_mass(oi, suffix) + sg.absent_mass(oi);
    st.q[i] = a > 0.0 ? sg.prob(oi, ui) / a : 0.0;

    auto& inner = st.inner[i];
    inner.assign(suffix.begin() + 1, suffix.end());
    std::sort(inner.begin(), inner.end(), [&](PointIndex x, PointIndex y) {
      return EdgeKey::between(space, ui, x) < EdgeKey::between(space, ui, y);
    });
    inner.insert(inner.begin(), ui);

    st.q_inner[i].assign(inner.size(), 0.0);
    for (std::size_t j = 1; j < inner.size(); ++j) {
      const NodeIndex oj = st.split.owner[inner[j]];
      if (oj == oi) continue;  // oi already sits at u_i
      const std::span<const PointIndex> prefix(inner.data(), j + 1);
      const double aj = sg.node_mass(oj, prefix) + sg.absent_mass(oj);
      st.q_inner[i][j] = aj > 0.0 ? sg.prob(oj, inner[j]) / aj : 0.0;
    }
  }

  // Top-down weights.
  st.leaf_weight.resize(K);
  double outer = 1.0;
  for (std::size_t i = 0; i < K; ++i) {
    double w = outer * st.q[i];
    outer *= 1.0 - st.q[i];
    st.leaf_weight[i].assign(st.inner[i].size(), 0.0);
    for (std::size_t j = st.inner[i].size(); j-- > 1;) {
      st.leaf_weight[i][j] = w * st.q_inner[i][j];
      w *= 1.0 - st.q_inner[i][j];
    }
    st.base_weight += w;
  }
  st.base_weight += outer;

  std::size_t sampled_leaves = 0;
  for (std::size_t i = 0; i < K; ++i) {
    for (std::size_t j = 1; j < st.inner[i].size(); ++j) {
      if (st.leaf_weight[i][j] > 0.0 && space(st.order[i], st.inner[i][j]) > 0.0) ++sampled_leaves;
    }
  }
  const double delta = 1.0 / (4.0 * static_cast<double>(std::max<std::size_t>(sampled_leaves, 1)));

  st.leaf_mean.resize(K);
  for (std::size_t i = 0; i < K; ++i) {
    st.leaf_mean[i].assign(st.inner[i].size(), 0.0);
    const PointIndex ui = st.order[i];
    for (std::size_t j = 1; j < st.inner[i].size(); ++j) {
      const double weight = st.leaf_weight[i][j];
      if (!(weight > 0.0)) continue;
      const PointIndex rj = st.inner[i][j];
      const double d = space(ui, rj);
      TermReport term{.name = "mst-dp/leaf/" + space.id(ui) + "/" + space.id(rj), .probability = weight};
      if (d == 0.0) {
        term.method = TermMethod::exact;
        term.flags.push_back("zero-length");
        report.terms.push_back(std::move(term));
        continue;
      }
      const NodeIndex oi = st.split.owner[ui];
      const NodeIndex oj = st.split.owner[rj];
      const std::span<const PointIndex> prefix(st.inner[i].data(), j + 1);
      EventSpec event = EventSpec::unrestricted(sg);
      for (std::size_t w = 0; w < n; ++w) {
        event.restrict_to(static_cast<NodeIndex>(w), prefix, sg.mode() == PresenceMode::existential);
      }
      event.force(oi, ui);
      event.force(oj, rj);

      if (enumeration_size(sg, event) == 1) {
        const ExactResult exact = exact_term(sg, Functional::mst, event);
        term.method = TermMethod::exact;
        term.conditional_mean = exact.value / exact.probability;
      } else {
        const double upper = nd * d;
        term.method = TermMethod::monte_carlo;
        term.budget = make_budget(upper, d, options.epsilon, delta);
        term.samples = scaled_samples(term.budget->samples, options.budget_scale);
        SampleObserver check;
        if (options.check_invariants) {
          check = [d, upper](std::span<const Location>, double value) {
            if (value < d * (1.0 - 1e-12) || value > upper * (1.0 + 1e-9)) {
              throw InvariantViolation("MST at a recursion leaf is outside [d(u_i,r_j), n d(u_i,r_j)]");
            }
          };
        }
        const auto mean = estimate_conditional(sg, Functional::mst, event, term.samples,
                                               {options.seed, stream_tag(term.name)}, options.threads, check);
        term.conditional_mean = mean.mean;
      }
      st.leaf_mean[i][j] = term.conditional_mean;
      term.value = weight * term.conditional_mean;
      report.terms.push_back(std::move(term));
    }
  }

  // Bottom-up memo tables.
  st.e.assign(K + 1, 0.0);
  st.e_prime.resize(K);
  for (std::size_t i = K; i-- > 0;) {
    auto& row = st.e_prime[i];
    row.assign(st.inner[i].size(), 0.0);
    for (std::size_t j = 1; j < row.size(); ++j) {
      row[j] = st.q_inner[i][j] * st.leaf_mean[i][j] + (1.0 - st.q_inner[i][j]) * row[j - 1];
    }
    st.e[i] = st.q[i] * row.back() + (1.0 - st.q[i]) * st.e[i + 1];
  }

  report.finalize();
  std::ostringstream out;
  out << "ordered points=" << K << " recursion E[1]=" << (K > 0 ? st.e[0] : 0.0)
      << " total weight=" << total_weight(st);
  report.notes.push_back(out.str());
  report.elapsed = std::chrono::steady_clock::now() - started;
  return result;
}

EstimateReport estimate_emst_dp(const StochasticGraph& g, const EstimateOptions& options) {
  return run_mst_dp(g, options).report;
}

}  // namespace stochgraph
