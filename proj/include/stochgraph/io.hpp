#pragma once

// JSON instance, realization and event formats; report serialization.
//
// Instance:
//   {"points": [{"id": "A", "coords": [x, y]}, ...]       (Euclidean), or
//    "points": [{"id": "A"}, ...], "distance_matrix": [[...], ...],
//    "nodes": [{"id": "v1", "dist": {"A": 0.5, "B": 0.5}}, ...],
//    "presence_mode": "certain" | "existential"}
// A distance matrix without "points" gets ids p0, p1, ...
//
// Realization: {"v1": "A", "v2": null}   (null = absent)
// Event: {"nodes": {"v1": {"allowed": ["A","B"], "absent": false}, "v2": {"force": "A"}}}
//   nodes not listed are unrestricted.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "stochgraph/monte_carlo.hpp"
#include "stochgraph/stochastic_graph.hpp"

namespace stochgraph {

using Json = nlohmann::ordered_json;

/// Throws ValidationError on any malformed or inconsistent field.
StochasticGraph parse_instance(const Json& doc);
Json instance_to_json(const StochasticGraph& g);

Realization parse_realization(const StochasticGraph& g, const Json& doc);
EventSpec parse_event(const StochasticGraph& g, const Json& doc);

/// Reads a JSON file; ValidationError on I/O or parse failure.
Json read_json_file(const std::filesystem::path& path);
/// Writes with two-space indentation and a trailing newline.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string dump(const Json& doc);

/// Report as JSON. "elapsed_seconds" only appears with include_timing, so
/// repeated runs produce identical bytes by default.
Json report_to_json(const EstimateReport& report, bool include_timing = false);

/// One row per term: schema_version,estimator,term,method,probability,
/// conditional_mean,value,samples,samples_full,flags
std::string report_terms_csv(const EstimateReport& report);
/// One row per pair term: schema_version,s,t,v,u,mutual,prob_ns_t,estimate,samples,indicator_hits
std::string report_pairs_csv(const EstimateReport& report);

/// Shortest %g form that reads back to the same double.
std::string format_double(double x);

}  // namespace stochgraph
