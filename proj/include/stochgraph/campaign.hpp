#pragma once

// Estimator-versus-oracle comparison campaigns.

#include <optional>
#include <string>
#include <vector>

#include "stochgraph/exact_oracle.hpp"
#include "stochgraph/io.hpp"
#include "stochgraph/monte_carlo.hpp"

namespace stochgraph {

/// "mst" (home method), "mst-dp", "mpm", "cc".
const std::vector<std::string>& estimator_names();
/// Functional an estimator approximates. Throws ValidationError for unknown names.
Functional estimator_functional(const std::string& name);
EstimateReport run_estimator(const std::string& name, const StochasticGraph& g, const EstimateOptions& options);

struct NamedInstance {
  std::string name;
  StochasticGraph graph;
};

struct CampaignRow {
  std::string instance;
  std::string estimator;
  std::uint64_t seed = 0;
  double estimate = 0.0;
  double oracle = 0.0;
  double relative_error = 0.0;
  bool pass = false;
  bool skipped = false;
  std::string reason;
  std::uint64_t samples_used = 0;
  std::uint64_t samples_full = 0;
  double elapsed_seconds = 0.0;
};

struct EstimatorSummary {
  std::string estimator;
  std::size_t runs = 0;
  std::size_t passes = 0;
  double success_fraction = 0.0;
  std::uint64_t samples_used = 0;
  std::uint64_t samples_full = 0;
  double elapsed_seconds = 0.0;
};

struct CampaignResult {
  static constexpr int kSchemaVersion = 1;
  double epsilon = 0.0;
  std::vector<CampaignRow> rows;  // sorted by (instance, estimator, seed)
  std::vector<EstimatorSummary> summaries;
  double success_fraction = 0.0;

  const EstimatorSummary* summary(const std::string& estimator) const;
};

struct CampaignOptions {
  EstimateOptions estimate;  // epsilon, budget scale, thread count per estimator run
  ExactOptions exact;
  unsigned workers = 1;      // campaign rows run concurrently
};

/// Runs the oracle once per (instance, functional) and every estimator once
/// per seed. Rows whose oracle exceeds the cap, or whose estimator rejects the
/// instance, are kept as skipped rows with a reason.
/// pass <=> |estimate - oracle| <= epsilon * oracle.
CampaignResult run_campaign(const std::vector<NamedInstance>& instances, const std::vector<std::string>& estimators,
                            const std::vector<std::uint64_t>& seeds, const CampaignOptions& options);

Json campaign_to_json(const CampaignResult& result, bool include_timing = false);
/// schema_version,instance,estimator,seed,estimate,oracle,relative_error,pass,skipped,reason,samples_used,samples_full
std::string campaign_csv(const CampaignResult& result);

}  // namespace stochgraph
