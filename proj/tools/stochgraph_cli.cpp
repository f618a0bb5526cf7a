// stochgraph: command-line front end.
//
// Exit codes: 0 success, 2 validation/domain failure, 3 budget or cap refusal,
// 4 internal invariant violation, 1 anything else.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stochgraph/campaign.hpp"
#include "stochgraph/cycle_cover.hpp"
#include "stochgraph/errors.hpp"
#include "stochgraph/exact_oracle.hpp"
#include "stochgraph/generators.hpp"
#include "stochgraph/io.hpp"
#include "stochgraph/mpm_home.hpp"
#include "stochgraph/mst_dp.hpp"
#include "stochgraph/mst_home.hpp"
#include "stochgraph/solvers.hpp"

namespace sg = stochgraph;

namespace {

constexpr const char* kThreadsEnv = "STOCHGRAPH_THREADS";

unsigned default_threads() {
  if (const char* env = std::getenv(kThreadsEnv)) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw sg::ValidationError(std::string(kThreadsEnv) + " must be a positive integer");
  }
  return 1;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    sg::write_text_file(path, text);
  }
}

sg::Json home_json(const sg::StochasticGraph& g, const sg::HomeSet& h) {
  sg::Json ids = sg::Json::array();
  for (auto s : h.members) ids.push_back(g.space().id(s));
  return {{"center", g.space().id(h.center)}, {"radius", h.radius}, {"members", ids},
          {"diameter", h.diameter}, {"p_of_H", h.p_of_H}};
}

sg::Json clustering_json(const sg::StochasticGraph& g, const sg::HomeClustering& c) {
  sg::Json clusters = sg::Json::array();
  for (const auto& cluster : c.clusters) {
    sg::Json ids = sg::Json::array();
    for (auto s : cluster) ids.push_back(g.space().id(s));
    clusters.push_back(std::move(ids));
  }
  sg::Json home = sg::Json::object();
  for (sg::NodeIndex v = 0; v < g.node_count(); ++v) home[g.node_id(v)] = c.home_of[v];
  return {{"clusters", clusters}, {"home_of", home}, {"T", c.T}, {"D", c.D}, {"theta", c.theta}};
}

struct EstimateArgs {
  std::string instance;
  std::string method = "home";
  double epsilon = 0.25;
  std::uint64_t seed = 0;
  double budget_scale = 1.0;
  unsigned threads = 1;
  std::string format = "json";
  std::string output;
  std::string pairs_output;
  std::string dump_homes;
  bool timing = false;
  bool no_checks = false;
  double cc_constant = 4.0;
};

sg::EstimateOptions to_options(const EstimateArgs& a) {
  sg::EstimateOptions o;
  o.epsilon = a.epsilon;
  o.seed = a.seed;
  o.threads = a.threads;
  o.budget_scale = a.budget_scale;
  o.check_invariants = !a.no_checks;
  o.cc_budget_constant = a.cc_constant;
  return o;
}

void warn_scale(double scale) {
  if (scale < 1.0) {
    std::cerr << "WARNING: --budget-scale " << scale
              << " < 1: Monte Carlo budgets are below the Chernoff sizing; the (1 +/- eps) guarantee is void.\n";
  }
}

int run_estimate(const std::string& target, const EstimateArgs& a) {
  warn_scale(a.budget_scale);
  const sg::StochasticGraph g = sg::parse_instance(sg::read_json_file(a.instance));
  const sg::EstimateOptions opts = to_options(a);
  std::string name = target;
  if (target == "mst" && a.method == "dp") name = "mst-dp";
  if (target != "mst" && a.method != "home") throw sg::ValidationError("--method applies to mst only");

  if (!a.dump_homes.empty()) {
    if (name == "mst") {
      sg::write_text_file(a.dump_homes, sg::dump(home_json(g, sg::find_home(g, a.epsilon / 2.0))));
    } else if (name == "mpm") {
      sg::write_text_file(a.dump_homes, sg::dump(clustering_json(g, sg::find_home_clusters(g, a.epsilon / 2.0))));
    } else {
      throw sg::ValidationError("--dump-homes applies to the home-method mst and mpm estimators");
    }
  }

  const sg::EstimateReport report = sg::run_estimator(name, g, opts);
  if (a.format == "csv") {
    emit(sg::report_terms_csv(report), a.output);
  } else {
    emit(sg::dump(sg::report_to_json(report, a.timing)), a.output);
  }
  if (!a.pairs_output.empty()) sg::write_text_file(a.pairs_output, sg::report_pairs_csv(report));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expected MST, perfect matching and cycle cover length over stochastic graphs"};
  app.require_subcommand(1);
  unsigned env_threads = 1;
  try {
    env_threads = default_threads();
  } catch (const sg::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  // validate
  auto* validate = app.add_subcommand("validate", "Check an instance (and optionally an event or realization)");
  std::string v_instance, v_event, v_realization;
  validate->add_option("instance", v_instance, "Instance JSON")->required();
  validate->add_option("--event", v_event, "Event JSON to check against the instance");
  validate->add_option("--realization", v_realization, "Realization JSON to check against the instance");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a random instance");
  std::string g_kind;
  std::size_t g_n = 3, g_m = 4;
  std::uint64_t g_seed = 0;
  double g_absent = 0.0;
  std::size_t g_support = 3;
  std::string g_out;
  gen->add_option("kind", g_kind, "euclidean-uniform | random-metric | home-separated | colocated-mass")->required();
  gen->add_option("n", g_n, "Number of nodes")->required()->check(CLI::PositiveNumber);
  gen->add_option("m", g_m, "Number of points")->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", g_seed, "Generator seed");
  gen->add_option("--absent-mass", g_absent, "Per-node absence probability (existential mode when > 0)");
  gen->add_option("--max-support", g_support, "Largest support per node")->check(CLI::PositiveNumber);
  gen->add_option("-o,--output", g_out, "Output file (default stdout)");

  // solve
  auto* solve = app.add_subcommand("solve", "Evaluate functionals on one realization");
  std::string s_instance, s_realization, s_functional = "all";
  solve->add_option("instance", s_instance, "Instance JSON")->required();
  solve->add_option("realization", s_realization, "Realization JSON")->required();
  solve->add_option("-f,--functional", s_functional, "mst | mpm | cc | nn-total | nn-longest | all");

  // exact
  auto* exact = app.add_subcommand("exact", "Exact expectation by enumeration");
  std::string x_instance, x_functional = "mst", x_event, x_out;
  std::uint64_t x_cap = sg::kDefaultEnumerationCap;
  unsigned x_threads = env_threads;
  exact->add_option("instance", x_instance, "Instance JSON")->required();
  exact->add_option("-f,--functional", x_functional, "mst | mpm | cc | nn-total | nn-longest");
  exact->add_option("--event", x_event, "Condition on this event");
  exact->add_option("--cap", x_cap, "Largest number of realizations to enumerate");
  exact->add_option("--threads", x_threads, "Worker threads")->check(CLI::PositiveNumber);
  exact->add_option("-o,--output", x_out, "Output file (default stdout)");

  // estimate
  auto* estimate = app.add_subcommand("estimate", "Run an estimator");
  estimate->require_subcommand(1);
  EstimateArgs e_args;
  e_args.threads = env_threads;
  std::string e_target;
  for (const char* target : {"mst", "mpm", "cc"}) {
    auto* sub = estimate->add_subcommand(target, std::string("Estimate E[") + target + "]");
    sub->add_option("instance", e_args.instance, "Instance JSON")->required();
    if (std::string(target) == "mst") {
      sub->add_option("--method", e_args.method, "home | dp")->check(CLI::IsMember({"home", "dp"}));
    }
    sub->add_option("-e,--epsilon", e_args.epsilon, "Relative error target in (0,1]")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--seed", e_args.seed, "Random seed");
    sub->add_option("--budget-scale", e_args.budget_scale, "Multiplier on every Monte Carlo budget")
        ->check(CLI::PositiveNumber);
    sub->add_option("--threads", e_args.threads, "Worker threads (default $STOCHGRAPH_THREADS or 1)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--format", e_args.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("-o,--output", e_args.output, "Output file (default stdout)");
    sub->add_flag("--timing", e_args.timing, "Include wall-clock time in the JSON report");
    sub->add_flag("--no-checks", e_args.no_checks, "Skip per-sample structural assertions");
    if (std::string(target) == "cc") {
      sub->add_option("--pairs-out", e_args.pairs_output, "Write the per-pair table as CSV");
      sub->add_option("--budget-constant", e_args.cc_constant, "Constant c of the per-pair budget")
          ->check(CLI::PositiveNumber);
    } else {
      sub->add_option("--dump-homes", e_args.dump_homes, "Write the home construction as JSON");
    }
    sub->callback([&e_target, target] { e_target = target; });
  }

  // compare
  auto* compare = app.add_subcommand("compare", "Estimators versus the exact oracle over seeds");
  std::vector<std::string> c_instances;
  std::vector<std::string> c_estimators = {"mst", "mst-dp", "cc"};
  std::size_t c_seeds = 20;
  std::uint64_t c_first_seed = 1;
  double c_epsilon = 0.25, c_scale = 1.0;
  unsigned c_workers = env_threads;
  std::uint64_t c_cap = sg::kDefaultEnumerationCap;
  std::string c_format = "json", c_out;
  bool c_timing = false;
  compare->add_option("instances", c_instances, "Instance JSON files")->required();
  compare->add_option("--estimators", c_estimators, "Any of mst, mst-dp, mpm, cc")->delimiter(',');
  compare->add_option("--seeds", c_seeds, "Seeds per instance")->check(CLI::PositiveNumber);
  compare->add_option("--first-seed", c_first_seed, "First seed; seeds are consecutive");
  compare->add_option("-e,--epsilon", c_epsilon, "Relative error target in (0,1]")->check(CLI::Range(0.0, 1.0));
  compare->add_option("--budget-scale", c_scale, "Multiplier on every Monte Carlo budget")
      ->check(CLI::PositiveNumber);
  compare->add_option("--workers", c_workers, "Concurrent campaign rows")->check(CLI::PositiveNumber);
  compare->add_option("--cap", c_cap, "Oracle enumeration cap");
  compare->add_option("--format", c_format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  compare->add_option("-o,--output", c_out, "Output file (default stdout)");
  compare->add_flag("--timing", c_timing, "Include wall-clock times");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*validate) {
      const sg::StochasticGraph g = sg::parse_instance(sg::read_json_file(v_instance));
      if (!v_event.empty()) {
        const sg::EventSpec event = sg::parse_event(g, sg::read_json_file(v_event));
        if (!(sg::event_probability(g, event) > 0.0)) throw sg::ValidationError("event has probability zero");
      }
      if (!v_realization.empty()) {
        const sg::Realization r = sg::parse_realization(g, sg::read_json_file(v_realization));
        sg::realization_probability(g, r);
      }
      std::cout << "ok: " << g.node_count() << " nodes, " << g.point_count() << " points, "
                << (g.mode() == sg::PresenceMode::certain ? "certain" : "existential") << " presence\n";
      return 0;
    }
    if (*gen) {
      sg::GeneratorOptions opts;
      opts.absent_mass = g_absent;
      opts.max_support = g_support;
      const auto g = sg::generate(sg::parse_generator(g_kind), g_n, g_m, g_seed, opts);
      emit(sg::dump(sg::instance_to_json(g)), g_out);
      return 0;
    }
    if (*solve) {
      const sg::StochasticGraph g = sg::parse_instance(sg::read_json_file(s_instance));
      const sg::Realization r = sg::parse_realization(g, sg::read_json_file(s_realization));
      std::vector<sg::Functional> fs;
      if (s_functional == "all") {
        fs = {sg::Functional::mst, sg::Functional::mpm, sg::Functional::cc, sg::Functional::nn_total,
              sg::Functional::nn_longest};
      } else {
        fs = {sg::parse_functional(s_functional)};
      }
      sg::Json out;
      out["probability"] = sg::realization_probability(g, r);
      for (auto f : fs) {
        try {
          out[std::string(sg::to_string(f))] = sg::evaluate(f, g.space(), r.location);
        } catch (const sg::DomainError& e) {
          if (s_functional != "all") throw;
          out[std::string(sg::to_string(f))] = nullptr;
        }
      }
      std::cout << sg::dump(out);
      return 0;
    }
    if (*exact) {
      const sg::StochasticGraph g = sg::parse_instance(sg::read_json_file(x_instance));
      std::optional<sg::EventSpec> event;
      if (!x_event.empty()) event = sg::parse_event(g, sg::read_json_file(x_event));
      const auto f = sg::parse_functional(x_functional);
      const auto result = sg::exact_expectation(g, f, event, {x_cap, x_threads});
      sg::Json out{{"functional", std::string(sg::to_string(f))},
                   {"value", result.value},
                   {"probability", result.probability},
                   {"realizations", result.count}};
      emit(sg::dump(out), x_out);
      return 0;
    }
    if (*estimate) return run_estimate(e_target, e_args);
    if (*compare) {
      warn_scale(c_scale);
      std::vector<sg::NamedInstance> instances;
      for (const auto& path : c_instances) {
        instances.push_back({path, sg::parse_instance(sg::read_json_file(path))});
      }
      std::vector<std::uint64_t> seeds;
      for (std::size_t i = 0; i < c_seeds; ++i) seeds.push_back(c_first_seed + i);
      sg::CampaignOptions opts;
      opts.estimate.epsilon = c_epsilon;
      opts.estimate.budget_scale = c_scale;
      opts.exact.cap = c_cap;
      opts.workers = c_workers;
      const auto result = sg::run_campaign(instances, c_estimators, seeds, opts);
      if (c_format == "csv") {
        emit(sg::campaign_csv(result), c_out);
      } else {
        emit(sg::dump(sg::campaign_to_json(result, c_timing)), c_out);
      }
      return 0;
    }
  } catch (const sg::BudgetError& e) {
    std::cerr << "budget: " << e.what() << '\n';
    return 3;
  } catch (const sg::InvariantViolation& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return 4;
  } catch (const sg::ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const sg::DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
