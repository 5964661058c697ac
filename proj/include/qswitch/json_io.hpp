#pragma once

// JSON (de)serialisation for instances, edge vectors, matchings, mixtures
// and simulation results.
//
// Instance file:
//   {
//     "vertices":    ["a", "b", "c"],
//     "edges":       [["a", "b"], ["b", "c"]],
//     "node_params": {"a": {"lambda": 0.3, "mu": 0.03, "buffer": 10}, ...},
//     "edge_demand": [{"edge": ["a", "b"], "nu": 0.05,
//                      "sigma2": 0.0475, "arrival_kind": "bernoulli"}, ...]
//   }
// "edge_demand" entries are optional per edge (default nu = 0); "sigma2"
// defaults to the variance of the arrival law.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "qswitch/decomposition.hpp"
#include "qswitch/lp_scheduler.hpp"
#include "qswitch/model.hpp"
#include "qswitch/refchain.hpp"
#include "qswitch/switch_sim.hpp"

namespace qswitch {

using json = nlohmann::json;

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error("malformed JSON in " + path + ": " + e.what());
  }
}

inline RawInstance parse_raw_instance(const json& j) {
  std::vector<std::string> issues;
  RawInstance raw;
  if (!j.is_object()) throw ValidationError({"instance must be a JSON object"});

  auto need = [&](const char* key, bool (json::*is)() const noexcept) -> const json* {
    if (!j.contains(key)) {
      issues.push_back(std::string("missing key '") + key + "'");
      return nullptr;
    }
    const json& v = j.at(key);
    if (!(v.*is)()) {
      issues.push_back(std::string("key '") + key + "' has the wrong type");
      return nullptr;
    }
    return &v;
  };

  auto pair_of_names = [&](const json& e, const std::string& where) -> std::optional<std::pair<std::string, std::string>> {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
      issues.push_back(where + ": edge must be a pair of vertex ids");
      return std::nullopt;
    }
    return std::make_pair(e[0].get<std::string>(), e[1].get<std::string>());
  };

  if (const json* vs = need("vertices", &json::is_array)) {
    for (const auto& v : *vs) {
      if (v.is_string())
        raw.vertices.push_back(v.get<std::string>());
      else
        issues.push_back("vertex ids must be strings");
    }
  }
  if (const json* es = need("edges", &json::is_array)) {
    for (const auto& e : *es)
      if (auto p = pair_of_names(e, "edges")) raw.edges.push_back(*p);
  }
  if (const json* np = need("node_params", &json::is_object)) {
    for (const auto& [name, p] : np->items()) {
      if (!p.is_object() || !p.contains("lambda") || !p.contains("mu") || !p.contains("buffer") ||
          !p["lambda"].is_number() || !p["mu"].is_number() || !p["buffer"].is_number_integer()) {
        issues.push_back("node_params for '" + name + "' needs numeric lambda, mu and integer buffer");
        continue;
      }
      raw.node_params[name] = NodeParams{p["lambda"].get<double>(), p["mu"].get<double>(), p["buffer"].get<int>()};
    }
  }
  if (j.contains("edge_demand")) {
    const json& ed = j.at("edge_demand");
    if (!ed.is_array()) {
      issues.push_back("key 'edge_demand' has the wrong type");
    } else {
      for (const auto& d : ed) {
        if (!d.is_object() || !d.contains("edge") || !d.contains("nu") || !d["nu"].is_number()) {
          issues.push_back("edge_demand entries need 'edge' and numeric 'nu'");
          continue;
        }
        auto p = pair_of_names(d["edge"], "edge_demand");
        if (!p) continue;
        RawInstance::RawDemand rd;
        rd.u = p->first;
        rd.v = p->second;
        rd.nu = d["nu"].get<double>();
        if (d.contains("sigma2")) {
          if (!d["sigma2"].is_number()) {
            issues.push_back("sigma2 must be numeric");
            continue;
          }
          rd.sigma2 = d["sigma2"].get<double>();
        }
        if (d.contains("arrival_kind")) {
          if (!d["arrival_kind"].is_string()) {
            issues.push_back("arrival_kind must be a string");
            continue;
          }
          rd.kind = d["arrival_kind"].get<std::string>();
        }
        raw.edge_demand.push_back(std::move(rd));
      }
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return raw;
}

inline SwitchInstance instance_from_json(const json& j) { return validate_instance(parse_raw_instance(j)); }

inline json edge_json(const SwitchInstance& g, EdgeId e) {
  return json::array({g.vertex_name(g.edge(e).u), g.vertex_name(g.edge(e).v)});
}

inline json to_json(const SwitchInstance& g) {
  json j;
  j["vertices"] = g.vertex_names();
  j["edges"] = json::array();
  for (EdgeId e = 0; e < g.num_edges(); ++e) j["edges"].push_back(edge_json(g, e));
  j["node_params"] = json::object();
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    const NodeParams& p = g.node(v);
    j["node_params"][g.vertex_name(v)] = {{"lambda", p.lambda}, {"mu", p.mu}, {"buffer", p.buffer}};
  }
  j["edge_demand"] = json::array();
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const EdgeDemand& d = g.demand(e);
    j["edge_demand"].push_back(
        {{"edge", edge_json(g, e)}, {"nu", d.nu}, {"sigma2", d.sigma2}, {"arrival_kind", to_string(d.kind)}});
  }
  return j;
}

inline EdgeId edge_from_json(const SwitchInstance& g, const json& e) {
  if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
    throw Error("edge must be a pair of vertex ids");
  auto id = g.find_edge(e[0].get<std::string>(), e[1].get<std::string>());
  if (!id) throw Error("unknown edge (" + e[0].get<std::string>() + "," + e[1].get<std::string>() + ")");
  return *id;
}

/// Per-edge values given either as a plain array in canonical edge order or
/// as [{"edge": [u, v], "<field>": value}, ...] (missing edges are 0).
inline std::vector<double> edge_values_from_json(const SwitchInstance& g, const json& j, const std::string& field) {
  if (!j.is_array()) throw Error("edge values must be an array");
  std::vector<double> out(g.num_edges(), 0.0);
  if (!j.empty() && j[0].is_number()) {
    if (j.size() != g.num_edges()) throw Error("edge value array has wrong length");
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_number()) throw Error("edge values must be numbers");
      out[i] = j[i].get<double>();
    }
    return out;
  }
  std::vector<char> seen(g.num_edges(), 0);
  for (const auto& item : j) {
    if (!item.is_object() || !item.contains("edge") || !item.contains(field) || !item[field].is_number())
      throw Error("edge value entries need 'edge' and numeric '" + field + "'");
    const EdgeId e = edge_from_json(g, item["edge"]);
    if (seen[e]) throw Error("edge listed twice in edge values");
    seen[e] = 1;
    out[e] = item[field].get<double>();
  }
  return out;
}

inline json edge_values_to_json(const SwitchInstance& g, const std::vector<double>& v, const std::string& field) {
  json arr = json::array();
  for (EdgeId e = 0; e < g.num_edges(); ++e) arr.push_back({{"edge", edge_json(g, e)}, {field, v[e]}});
  return arr;
}

inline json matching_to_json(const SwitchInstance& g, const Matching& m) {
  json arr = json::array();
  for (EdgeId e : m.edges) arr.push_back(edge_json(g, e));
  return arr;
}

inline Matching matching_from_json(const SwitchInstance& g, const json& j) {
  if (!j.is_array()) throw Error("matching must be an array of edges");
  std::vector<EdgeId> es;
  for (const auto& e : j) es.push_back(edge_from_json(g, e));
  Matching m(es);
  if (m.size() != es.size() || !is_matching(g, m)) throw Error("edge set is not a matching");
  return m;
}

inline json mixture_to_json(const SwitchInstance& g, const MatchingMixture& mix) {
  json atoms = json::array();
  for (const auto& a : mix.atoms) atoms.push_back({{"p", a.p}, {"matching", matching_to_json(g, a.matching)}});
  return {{"atoms", atoms}};
}

inline MatchingMixture mixture_from_json(const SwitchInstance& g, const json& j) {
  if (!j.is_object() || !j.contains("atoms") || !j["atoms"].is_array()) throw Error("mixture needs an 'atoms' array");
  MatchingMixture mix;
  for (const auto& a : j["atoms"]) {
    if (!a.is_object() || !a.contains("p") || !a["p"].is_number() || !a.contains("matching"))
      throw Error("mixture atoms need numeric 'p' and 'matching'");
    mix.atoms.push_back({a["p"].get<double>(), matching_from_json(g, a["matching"])});
  }
  check_mixture(g, mix);
  return mix;
}

inline json odd_set_to_json(const SwitchInstance& g, const OddSet& s) {
  json arr = json::array();
  for (VertexId v : s.members) arr.push_back(g.vertex_name(v));
  return arr;
}

inline json lp_solution_to_json(const SwitchInstance& g, const LpSolution& sol) {
  json cuts = json::array();
  for (const auto& s : sol.active_cuts) cuts.push_back(odd_set_to_json(g, s));
  return {{"x", edge_values_to_json(g, sol.x.values, "value")},
          {"value", sol.objective_value},
          {"cuts", cuts},
          {"iteration_values", sol.iteration_values}};
}

inline json coherence_to_json(const SwitchInstance& g, const CoherenceReport& r) {
  json nodes = json::object();
  for (VertexId v = 0; v < g.num_vertices(); ++v) nodes[g.vertex_name(v)] = r.node_availability[v];
  json j = {{"variant", to_string(r.variant)},
            {"availability", nodes},
            {"gamma", r.gamma},
            {"gamma_product", r.gamma_product},
            {"clipped", r.clipped}};
  j["binding_edge"] = r.binding_edge ? edge_json(g, *r.binding_edge) : json(nullptr);
  if (r.variant == Variant::alg2) j["guarantee"] = 2.0 / 3.0 * r.gamma;
  else j["guarantee"] = r.gamma;
  return j;
}

inline json drift_to_json(const DriftReport& d) {
  auto summary = [](const DriftSummary& s) {
    return json{{"count", s.count}, {"mean", s.mean}, {"ci95", {s.ci_low, s.ci_high}}};
  };
  return {{"all_frames", summary(d.all_frames)},
          {"large_backlog", summary(d.large_backlog)},
          {"backlog_threshold", d.backlog_threshold},
          {"fraction_positive", d.fraction_positive},
          {"max_backlog", d.max_backlog},
          {"max_backlog_first_half", d.max_backlog_first_half},
          {"max_backlog_second_half", d.max_backlog_second_half},
          {"growth_slope", d.growth_slope},
          {"growth_slope_se", d.growth_slope_se},
          {"growth_detected", d.growth_detected},
          {"negative_drift", d.negative_drift},
          {"verdict", d.verdict}};
}

inline json stats_to_json(const SwitchInstance& g, const SimStats& s) {
  json edges = json::array();
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    edges.push_back({{"edge", edge_json(g, e)},
                     {"served", s.served[e]},
                     {"potential", s.potential[e]},
                     {"scheduled", s.scheduled[e]},
                     {"arrivals", s.arrivals[e]},
                     {"both_available", s.both_available[e]},
                     {"mean_R", s.time_average_R(e)},
                     {"max_R", s.max_R[e]},
                     {"final_R", s.final_state.R[e]}});
  }
  json nodes = json::array();
  for (VertexId v = 0; v < g.num_vertices(); ++v)
    nodes.push_back({{"vertex", g.vertex_name(v)},
                     {"nonempty", s.nonempty[v]},
                     {"empty_frequency", s.empty_frequency(v)},
                     {"final_L", s.final_state.L[v]}});
  json frames = json::array();
  for (const auto& f : s.frames)
    frames.push_back({f.start, f.length, f.lyapunov_start, f.lyapunov_end, f.backlog_start, f.max_backlog});
  return {{"slots", s.slots},
          {"frame_length", s.frame_length},
          {"edges", edges},
          {"nodes", nodes},
          {"frame_columns", {"start", "length", "V_start", "V_end", "backlog_start", "max_backlog"}},
          {"frames", frames}};
}

}  // namespace qswitch
