#include "stochgraph/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "stochgraph/errors.hpp"

namespace stochgraph {

namespace {

const Json& require(const Json& doc, const char* key, const char* where) {
  if (!doc.is_object() || !doc.contains(key)) {
    throw ValidationError(std::string(where) + ": missing field '" + key + "'");
  }
  return doc.at(key);
}

double number(const Json& value, const std::string& where) {
  if (!value.is_number()) throw ValidationError(where + ": expected a number");
  return value.get<double>();
}

std::string text(const Json& value, const std::string& where) {
  if (!value.is_string()) throw ValidationError(where + ": expected a string");
  return value.get<std::string>();
}

PointIndex point_of(const StochasticGraph& g, const Json& value, const std::string& where) {
  const std::string id = text(value, where);
  const auto p = g.space().find(id);
  if (!p) throw ValidationError(where + ": unknown point '" + id + "'");
  return *p;
}

NodeIndex node_of(const StochasticGraph& g, const std::string& id, const std::string& where) {
  const auto& ids = g.node_ids();
  const auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) throw ValidationError(where + ": unknown node '" + id + "'");
  return static_cast<NodeIndex>(it - ids.begin());
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

StochasticGraph parse_instance(const Json& doc) {
  if (!doc.is_object()) throw ValidationError("instance: expected a JSON object");
  std::vector<std::string> point_ids;
  std::vector<std::vector<double>> coords;
  bool all_coords = true;
  if (doc.contains("points")) {
    const Json& points = doc.at("points");
    if (!points.is_array()) throw ValidationError("instance: 'points' must be an array");
    for (std::size_t i = 0; i < points.size(); ++i) {
      const std::string where = "points[" + std::to_string(i) + "]";
      point_ids.push_back(text(require(points[i], "id", where.c_str()), where + ".id"));
      if (points[i].contains("coords")) {
        const Json& c = points[i].at("coords");
        if (!c.is_array() || c.empty()) throw ValidationError(where + ".coords: expected a nonempty array");
        std::vector<double> xs;
        for (const auto& x : c) xs.push_back(number(x, where + ".coords"));
        coords.push_back(std::move(xs));
      } else {
        all_coords = false;
      }
    }
    if (!coords.empty() && !all_coords) throw ValidationError("instance: coords given for some points but not all");
  }

  MetricSpace space;
  if (doc.contains("distance_matrix")) {
    if (!coords.empty()) throw ValidationError("instance: give either coords or a distance matrix, not both");
    const Json& rows = doc.at("distance_matrix");
    if (!rows.is_array()) throw ValidationError("instance: 'distance_matrix' must be an array of rows");
    std::vector<std::vector<double>> dist;
    for (std::size_t a = 0; a < rows.size(); ++a) {
      const std::string where = "distance_matrix[" + std::to_string(a) + "]";
      if (!rows[a].is_array()) throw ValidationError(where + ": expected an array");
      std::vector<double> row;
      for (const auto& x : rows[a]) row.push_back(number(x, where));
      dist.push_back(std::move(row));
    }
    if (point_ids.empty()) {
      for (std::size_t a = 0; a < dist.size(); ++a) point_ids.push_back("p" + std::to_string(a));
    }
    if (point_ids.size() != dist.size()) throw ValidationError("instance: point count does not match distance matrix");
    space = MetricSpace::from_matrix(std::move(point_ids), dist);
  } else {
    if (point_ids.empty()) throw ValidationError("instance: no points");
    if (coords.empty()) throw ValidationError("instance: points need coords when no distance matrix is given");
    space = MetricSpace::from_coords(std::move(point_ids), std::move(coords));
  }

  PresenceMode mode = PresenceMode::certain;
  if (doc.contains("presence_mode")) {
    const std::string m = text(doc.at("presence_mode"), "presence_mode");
    if (m == "existential") {
      mode = PresenceMode::existential;
    } else if (m != "certain") {
      throw ValidationError("presence_mode: expected 'certain' or 'existential', got '" + m + "'");
    }
  }

  const Json& nodes = require(doc, "nodes", "instance");
  if (!nodes.is_array() || nodes.empty()) throw ValidationError("instance: 'nodes' must be a nonempty array");
  std::vector<std::string> node_ids;
  std::vector<std::vector<double>> probs;
  for (std::size_t v = 0; v < nodes.size(); ++v) {
    const std::string where = "nodes[" + std::to_string(v) + "]";
    node_ids.push_back(text(require(nodes[v], "id", where.c_str()), where + ".id"));
    const Json& dist = require(nodes[v], "dist", where.c_str());
    if (!dist.is_object()) throw ValidationError(where + ".dist: expected an object");
    std::vector<double> row(space.size(), 0.0);
    for (const auto& [pid, p] : dist.items()) {
      const auto s = space.find(pid);
      if (!s) throw ValidationError(where + ".dist: unknown point '" + pid + "'");
      row[*s] = number(p, where + ".dist." + pid);
    }
    probs.push_back(std::move(row));
  }
  return StochasticGraph(std::move(node_ids), std::move(space), std::move(probs), mode);
}

Json instance_to_json(const StochasticGraph& g) {
  const MetricSpace& space = g.space();
  Json doc;
  doc["presence_mode"] = g.mode() == PresenceMode::certain ? "certain" : "existential";
  Json points = Json::array();
  for (PointIndex p = 0; p < space.size(); ++p) {
    Json point{{"id", space.id(p)}};
    if (space.has_coords()) point["coords"] = space.coords(p);
    points.push_back(std::move(point));
  }
  doc["points"] = std::move(points);
  if (!space.has_coords()) {
    Json rows = Json::array();
    for (PointIndex a = 0; a < space.size(); ++a) {
      Json row = Json::array();
      for (PointIndex b = 0; b < space.size(); ++b) row.push_back(space(a, b));
      rows.push_back(std::move(row));
    }
    doc["distance_matrix"] = std::move(rows);
  }
  Json nodes = Json::array();
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    Json dist = Json::object();
    for (PointIndex s = 0; s < space.size(); ++s) {
      if (g.prob(v, s) > 0.0) dist[space.id(s)] = g.prob(v, s);
    }
    nodes.push_back(Json{{"id", g.node_id(v)}, {"dist", std::move(dist)}});
  }
  doc["nodes"] = std::move(nodes);
  return doc;
}

Realization parse_realization(const StochasticGraph& g, const Json& doc) {
  if (!doc.is_object()) throw ValidationError("realization: expected an object of node -> point");
  Realization r;
  r.location.assign(g.node_count(), kAbsent);
  std::vector<char> seen(g.node_count(), 0);
  for (const auto& [id, value] : doc.items()) {
    const NodeIndex v = node_of(g, id, "realization");
    seen[v] = 1;
    if (value.is_null()) {
      if (g.mode() != PresenceMode::existential) {
        throw ValidationError("realization: node '" + id + "' absent in certain mode");
      }
      continue;
    }
    r.location[v] = static_cast<Location>(point_of(g, value, "realization." + id));
  }
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    if (!seen[v]) throw ValidationError("realization: node '" + g.node_id(v) + "' has no location");
  }
  return r;
}

EventSpec parse_event(const StochasticGraph& g, const Json& doc) {
  EventSpec event = EventSpec::unrestricted(g);
  const Json& nodes = require(doc, "nodes", "event");
  if (!nodes.is_object()) throw ValidationError("event: 'nodes' must be an object");
  for (const auto& [id, spec] : nodes.items()) {
    const std::string where = "event.nodes." + id;
    const NodeIndex v = node_of(g, id, "event");
    if (spec.contains("force")) {
      event.force(v, point_of(g, spec.at("force"), where + ".force"));
      continue;
    }
    const Json& allowed = require(spec, "allowed", where.c_str());
    if (!allowed.is_array()) throw ValidationError(where + ".allowed: expected an array");
    std::vector<PointIndex> points;
    for (const auto& p : allowed) points.push_back(point_of(g, p, where + ".allowed"));
    bool absent = false;
    if (spec.contains("absent")) {
      if (!spec.at("absent").is_boolean()) throw ValidationError(where + ".absent: expected a boolean");
      absent = spec.at("absent").get<bool>();
    }
    if (absent && g.mode() != PresenceMode::existential) {
      throw ValidationError(where + ": absence is only meaningful in existential mode");
    }
    event.restrict_to(v, points, absent);
  }
  return event;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << contents;
  if (!out) throw ValidationError("failed writing '" + path.string() + "'");
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

std::string format_double(double x) {
  char buf[40];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

Json report_to_json(const EstimateReport& report, bool include_timing) {
  Json doc;
  doc["schema_version"] = EstimateReport::kSchemaVersion;
  doc["estimator"] = report.estimator;
  doc["value"] = report.value;
  doc["epsilon"] = report.epsilon;
  doc["epsilon_sampling"] = report.epsilon_sampling;
  doc["epsilon_truncation"] = report.epsilon_truncation;
  doc["seed"] = report.seed;
  doc["budget_scale"] = report.budget_scale;
  doc["samples_used"] = report.samples_used;
  doc["samples_full"] = report.samples_full;
  if (include_timing) doc["elapsed_seconds"] = report.elapsed.count();
  doc["notes"] = report.notes;
  Json terms = Json::array();
  for (const auto& t : report.terms) {
    Json term{{"name", t.name},
              {"method", std::string(to_string(t.method))},
              {"value", t.value},
              {"probability", t.probability},
              {"conditional_mean", t.conditional_mean},
              {"samples", t.samples}};
    if (t.budget) {
      term["budget"] = Json{{"samples", t.budget->samples},
                            {"upper", t.budget->upper},
                            {"mu_lower", t.budget->mu_lower},
                            {"epsilon", t.budget->epsilon},
                            {"delta", t.budget->delta}};
    }
    term["flags"] = t.flags;
    terms.push_back(std::move(term));
  }
  doc["terms"] = std::move(terms);
  if (!report.pairs.empty()) {
    Json pairs = Json::array();
    for (const auto& p : report.pairs) {
      pairs.push_back(Json{{"s", p.s},
                           {"t", p.t},
                           {"v", p.v},
                           {"u", p.u},
                           {"mutual", p.mutual},
                           {"prob_ns_t", p.prob_ns_t},
                           {"estimate", p.estimate},
                           {"samples", p.samples},
                           {"indicator_hits", p.indicator_hits}});
    }
    doc["pairs"] = std::move(pairs);
  }
  return doc;
}

std::string report_terms_csv(const EstimateReport& report) {
  std::ostringstream out;
  out << "schema_version,estimator,term,method,probability,conditional_mean,value,samples,samples_full,flags\n";
  for (const auto& t : report.terms) {
    std::string flags;
    for (const auto& f : t.flags) flags += (flags.empty() ? "" : ";") + f;
    out << EstimateReport::kSchemaVersion << ',' << csv_field(report.estimator) << ',' << csv_field(t.name) << ','
        << to_string(t.method) << ',' << format_double(t.probability) << ',' << format_double(t.conditional_mean)
        << ',' << format_double(t.value) << ',' << t.samples << ',' << (t.budget ? t.budget->samples : 0) << ','
        << csv_field(flags) << '\n';
  }
  return out.str();
}

std::string report_pairs_csv(const EstimateReport& report) {
  std::ostringstream out;
  out << "schema_version,s,t,v,u,mutual,prob_ns_t,estimate,samples,indicator_hits\n";
  for (const auto& p : report.pairs) {
    out << EstimateReport::kSchemaVersion << ',' << csv_field(p.s) << ',' << csv_field(p.t) << ',' << csv_field(p.v)
        << ',' << csv_field(p.u) << ',' << (p.mutual ? 1 : 0) << ',' << format_double(p.prob_ns_t) << ','
        << format_double(p.estimate) << ',' << p.samples << ',' << p.indicator_hits << '\n';
  }
  return out.str();
}

}  // namespace stochgraph
