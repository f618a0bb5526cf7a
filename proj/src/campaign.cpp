#include "stochgraph/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "stochgraph/cycle_cover.hpp"
#include "stochgraph/errors.hpp"
#include "stochgraph/mpm_home.hpp"
#include "stochgraph/mst_dp.hpp"
#include "stochgraph/mst_home.hpp"

namespace stochgraph {

const std::vector<std::string>& estimator_names() {
  static const std::vector<std::string> names = {"mst", "mst-dp", "mpm", "cc"};
  return names;
}

Functional estimator_functional(const std::string& name) {
  if (name == "mst" || name == "mst-dp") return Functional::mst;
  if (name == "mpm") return Functional::mpm;
  if (name == "cc") return Functional::cc;
  throw ValidationError("unknown estimator '" + name + "'");
}

EstimateReport run_estimator(const std::string& name, const StochasticGraph& g, const EstimateOptions& options) {
  if (name == "mst") return estimate_emst(g, options);
  if (name == "mst-dp") return estimate_emst_dp(g, options);
  if (name == "mpm") return estimate_empm(g, options);
  if (name == "cc") return estimate_ecc(g, options);
  throw ValidationError("unknown estimator '" + name + "'");
}

const EstimatorSummary* CampaignResult::summary(const std::string& estimator) const {
  for (const auto& s : summaries) {
    if (s.estimator == estimator) return &s;
  }
  return nullptr;
}

CampaignResult run_campaign(const std::vector<NamedInstance>& instances, const std::vector<std::string>& estimators,
                            const std::vector<std::uint64_t>& seeds, const CampaignOptions& options) {
  for (const auto& e : estimators) estimator_functional(e);

  struct Oracle {
    std::optional<double> value;
    std::string reason;
  };
  std::map<std::pair<std::size_t, Functional>, Oracle> oracles;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (const auto& e : estimators) {
      const auto key = std::make_pair(i, estimator_functional(e));
      if (oracles.contains(key)) continue;
      Oracle& o = oracles[key];
      try {
        o.value = exact_expectation(instances[i].graph, key.second, std::nullopt, options.exact).value;
      } catch (const BudgetError& err) {
        o.reason = std::string("oracle: ") + err.what();
      } catch (const DomainError& err) {
        o.reason = std::string("oracle: ") + err.what();
      }
    }
  }

  struct Job {
    std::size_t instance;
    std::string estimator;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (const auto& e : estimators) {
      for (auto seed : seeds) jobs.push_back({i, e, seed});
    }
  }

  const double eps = options.estimate.epsilon;
  std::vector<CampaignRow> rows(jobs.size());
  auto run_job = [&](std::size_t k) {
    const Job& job = jobs[k];
    CampaignRow& row = rows[k];
    row.instance = instances[job.instance].name;
    row.estimator = job.estimator;
    row.seed = job.seed;
    const Oracle& oracle = oracles.at({job.instance, estimator_functional(job.estimator)});
    if (!oracle.value) {
      row.skipped = true;
      row.reason = oracle.reason;
      return;
    }
    row.oracle = *oracle.value;
    EstimateOptions opts = options.estimate;
    opts.seed = job.seed;
    try {
      const auto started = std::chrono::steady_clock::now();
      const EstimateReport report = run_estimator(job.estimator, instances[job.instance].graph, opts);
      row.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      row.estimate = report.value;
      row.samples_used = report.samples_used;
      row.samples_full = report.samples_full;
    } catch (const DomainError& err) {
      row.skipped = true;
      row.reason = std::string("estimator: ") + err.what();
      return;
    }
    const double diff = std::abs(row.estimate - row.oracle);
    row.relative_error = row.oracle > 0.0 ? diff / row.oracle
                                          : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    row.pass = diff <= eps * row.oracle;
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(jobs.size())));
  if (workers <= 1) {
    for (std::size_t k = 0; k < jobs.size(); ++k) run_job(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
          try {
            for (std::size_t k; (k = next.fetch_add(1)) < jobs.size();) run_job(k);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::sort(rows.begin(), rows.end(), [](const CampaignRow& a, const CampaignRow& b) {
    return std::tie(a.instance, a.estimator, a.seed) < std::tie(b.instance, b.estimator, b.seed);
  });

  CampaignResult result;
  result.epsilon = eps;
  result.rows = std::move(rows);
  std::size_t runs = 0;
  std::size_t passes = 0;
  for (const auto& e : estimators) {
    EstimatorSummary s{.estimator = e};
    for (const auto& row : result.rows) {
      if (row.estimator != e || row.skipped) continue;
      ++s.runs;
      s.passes += row.pass;
      s.samples_used += row.samples_used;
      s.samples_full = (s.samples_full > std::numeric_limits<std::uint64_t>::max() - row.samples_full)
                           ? std::numeric_limits<std::uint64_t>::max()
                           : s.samples_full + row.samples_full;
      s.elapsed_seconds += row.elapsed_seconds;
    }
    s.success_fraction = s.runs > 0 ? static_cast<double>(s.passes) / static_cast<double>(s.runs) : 0.0;
    runs += s.runs;
    passes += s.passes;
    result.summaries.push_back(std::move(s));
  }
  result.success_fraction = runs > 0 ? static_cast<double>(passes) / static_cast<double>(runs) : 0.0;
  return result;
}

Json campaign_to_json(const CampaignResult& result, bool include_timing) {
  Json doc;
  doc["schema_version"] = CampaignResult::kSchemaVersion;
  doc["epsilon"] = result.epsilon;
  doc["success_fraction"] = result.success_fraction;
  Json summaries = Json::array();
  for (const auto& s : result.summaries) {
    Json j{{"estimator", s.estimator},
           {"runs", s.runs},
           {"passes", s.passes},
           {"success_fraction", s.success_fraction},
           {"samples_used", s.samples_used},
           {"samples_full", s.samples_full}};
    if (include_timing) j["elapsed_seconds"] = s.elapsed_seconds;
    summaries.push_back(std::move(j));
  }
  doc["summaries"] = std::move(summaries);
  Json rows = Json::array();
  for (const auto& r : result.rows) {
    Json j{{"instance", r.instance},
           {"estimator", r.estimator},
           {"seed", r.seed},
           {"estimate", r.estimate},
           {"oracle", r.oracle},
           {"relative_error", std::isfinite(r.relative_error) ? Json(r.relative_error) : Json("inf")},
           {"pass", r.pass},
           {"skipped", r.skipped},
           {"reason", r.reason},
           {"samples_used", r.samples_used},
           {"samples_full", r.samples_full}};
    if (include_timing) j["elapsed_seconds"] = r.elapsed_seconds;
    rows.push_back(std::move(j));
  }
  doc["rows"] = std::move(rows);
  return doc;
}

std::string campaign_csv(const CampaignResult& result) {
  std::ostringstream out;
  out << "schema_version,instance,estimator,seed,estimate,oracle,relative_error,pass,skipped,reason,samples_used,"
         "samples_full\n";
  for (const auto& r : result.rows) {
    std::string reason = r.reason;
    std::replace(reason.begin(), reason.end(), ',', ';');
    std::replace(reason.begin(), reason.end(), '\n', ' ');
    out << CampaignResult::kSchemaVersion << ',' << r.instance << ',' << r.estimator << ',' << r.seed << ','
        << format_double(r.estimate) << ',' << format_double(r.oracle) << ','
        << (std::isfinite(r.relative_error) ? format_double(r.relative_error) : std::string("inf")) << ','
        << (r.pass ? 1 : 0) << ',' << (r.skipped ? 1 : 0) << ',' << reason << ',' << r.samples_used << ','
        << r.samples_full << '\n';
  }
  return out.str();
}

}  // namespace stochgraph
