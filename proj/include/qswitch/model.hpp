#pragma once

// Domain types for a quantum switch: the graph with per-node entanglement
// physics and per-edge request demand, plus matchings and fractional edge
// vectors over that graph.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qswitch {

using VertexId = std::size_t;
using EdgeId = std::size_t;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Instance validation failure; carries every violated invariant, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> issues)
      : Error(join(issues)), issues_(std::move(issues)) {}

  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out = "invalid instance";
    for (const auto& i : issues) out += "; " + i;
    return out;
  }
  std::vector<std::string> issues_;
};

enum class ArrivalKind { bernoulli, poisson };

inline const char* to_string(ArrivalKind k) {
  return k == ArrivalKind::bernoulli ? "bernoulli" : "poisson";
}

inline std::optional<ArrivalKind> parse_arrival_kind(const std::string& s) {
  if (s == "bernoulli") return ArrivalKind::bernoulli;
  if (s == "poisson") return ArrivalKind::poisson;
  return std::nullopt;
}

struct NodeParams {
  double lambda = 0.0;  // entanglement arrival probability per slot
  double mu = 0.0;      // per-entanglement decoherence probability per slot
  int buffer = 1;

  friend bool operator==(const NodeParams&, const NodeParams&) = default;
};

struct EdgeDemand {
  double nu = 0.0;      // mean requests per slot
  double sigma2 = 0.0;  // variance of requests per slot
  ArrivalKind kind = ArrivalKind::bernoulli;

  friend bool operator==(const EdgeDemand&, const EdgeDemand&) = default;
};

/// Variance implied by the arrival law when the instance file omits it.
inline double default_variance(ArrivalKind kind, double nu) {
  return kind == ArrivalKind::bernoulli ? nu * (1.0 - nu) : nu;
}

/// Canonical undirected edge: u < v in vertex-index order.
struct Edge {
  VertexId u = 0;
  VertexId v = 0;

  bool touches(VertexId w) const noexcept { return u == w || v == w; }
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Description of an instance as read from a file, before any checking.
struct RawInstance {
  struct RawDemand {
    std::string u, v;
    double nu = 0.0;
    std::optional<double> sigma2;
    std::string kind = "bernoulli";
  };

  std::vector<std::string> vertices;
  std::vector<std::pair<std::string, std::string>> edges;
  std::map<std::string, NodeParams> node_params;
  std::vector<RawDemand> edge_demand;
};

class SwitchInstance;
SwitchInstance validate_instance(const RawInstance& raw);

/// Validated switch graph. Immutable once built by validate_instance.
///
/// Vertices keep their declared order; edges are sorted by their canonical
/// (u, v) index pair and EdgeId is the position in that order, so every
/// per-edge vector in the library is ordered deterministically.
class SwitchInstance {
 public:
  std::size_t num_vertices() const noexcept { return names_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  const std::vector<std::string>& vertex_names() const noexcept { return names_; }
  const std::string& vertex_name(VertexId v) const { return names_.at(v); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_.at(e); }
  const NodeParams& node(VertexId v) const { return nodes_.at(v); }
  const std::vector<NodeParams>& nodes() const noexcept { return nodes_; }
  const EdgeDemand& demand(EdgeId e) const { return demand_.at(e); }
  const std::vector<EdgeDemand>& demands() const noexcept { return demand_; }
  const std::vector<EdgeId>& incident(VertexId v) const { return incident_.at(v); }

  std::optional<VertexId> find_vertex(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<VertexId>(it - names_.begin());
  }

  std::optional<EdgeId> find_edge(VertexId a, VertexId b) const {
    Edge key{std::min(a, b), std::max(a, b)};
    auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
    if (it == edges_.end() || *it != key) return std::nullopt;
    return static_cast<EdgeId>(it - edges_.begin());
  }

  std::optional<EdgeId> find_edge(const std::string& a, const std::string& b) const {
    auto ia = find_vertex(a);
    auto ib = find_vertex(b);
    if (!ia || !ib) return std::nullopt;
    return find_edge(*ia, *ib);
  }

  /// "u-v" label used in CSV headers.
  std::string edge_label(EdgeId e) const {
    const Edge& ed = edge(e);
    return names_[ed.u] + "-" + names_[ed.v];
  }

  /// Copy with a different demand vector (same topology and physics).
  SwitchInstance with_demand(std::vector<EdgeDemand> demand) const {
    if (demand.size() != edges_.size()) throw Error("demand vector size mismatch");
    SwitchInstance out = *this;
    out.demand_ = std::move(demand);
    return out;
  }

  friend bool operator==(const SwitchInstance&, const SwitchInstance&) = default;

 private:
  friend SwitchInstance validate_instance(const RawInstance& raw);

  std::vector<std::string> names_;
  std::vector<NodeParams> nodes_;
  std::vector<Edge> edges_;
  std::vector<EdgeDemand> demand_;
  std::vector<std::vector<EdgeId>> incident_;
};

/// Set of edges, kept sorted by EdgeId.
struct Matching {
  std::vector<EdgeId> edges;

  Matching() = default;
  explicit Matching(std::vector<EdgeId> es) : edges(std::move(es)) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  }

  bool empty() const noexcept { return edges.empty(); }
  std::size_t size() const noexcept { return edges.size(); }
  bool contains(EdgeId e) const { return std::binary_search(edges.begin(), edges.end(), e); }

  friend auto operator<=>(const Matching&, const Matching&) = default;
};

/// Point x in [0,1]^E indexed by EdgeId.
struct FractionalEdgeVector {
  std::vector<double> values;

  FractionalEdgeVector() = default;
  explicit FractionalEdgeVector(std::vector<double> v) : values(std::move(v)) {}
  static FractionalEdgeVector zeros(std::size_t n) { return FractionalEdgeVector(std::vector<double>(n, 0.0)); }

  std::size_t size() const noexcept { return values.size(); }
  double operator[](EdgeId e) const { return values[e]; }
  double& operator[](EdgeId e) { return values[e]; }
};

/// Throws unless x has one finite nonnegative value per edge of g.
inline void check_edge_vector(const SwitchInstance& g, const FractionalEdgeVector& x) {
  if (x.size() != g.num_edges()) throw Error("edge vector has wrong dimension");
  for (double v : x.values)
    if (!std::isfinite(v) || v < 0.0) throw Error("edge vector entries must be finite and nonnegative");
}

inline bool is_matching(const SwitchInstance& g, const std::vector<EdgeId>& s) {
  std::vector<char> used(g.num_vertices(), 0);
  for (EdgeId e : s) {
    if (e >= g.num_edges()) throw Error("unknown edge id " + std::to_string(e));
  }
  std::vector<EdgeId> sorted(s);
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
  for (EdgeId e : sorted) {
    const Edge& ed = g.edge(e);
    if (used[ed.u] || used[ed.v]) return false;
    used[ed.u] = used[ed.v] = 1;
  }
  return true;
}

inline bool is_matching(const SwitchInstance& g, const Matching& m) { return is_matching(g, m.edges); }

inline SwitchInstance validate_instance(const RawInstance& raw) {
  std::vector<std::string> issues;
  SwitchInstance g;

  std::map<std::string, VertexId> index;
  for (const auto& name : raw.vertices) {
    if (name.empty()) {
      issues.push_back("empty vertex id");
      continue;
    }
    if (!index.emplace(name, g.names_.size()).second) {
      issues.push_back("duplicate vertex '" + name + "'");
      continue;
    }
    g.names_.push_back(name);
  }

  g.nodes_.resize(g.names_.size());
  for (VertexId v = 0; v < g.names_.size(); ++v) {
    const std::string& name = g.names_[v];
    auto it = raw.node_params.find(name);
    if (it == raw.node_params.end()) {
      issues.push_back("missing node_params for '" + name + "'");
      continue;
    }
    const NodeParams& p = it->second;
    if (!(p.lambda >= 0.0 && p.lambda <= 1.0)) issues.push_back("lambda out of range at '" + name + "'");
    if (!(p.mu >= 0.0 && p.mu <= 1.0)) issues.push_back("mu out of range at '" + name + "'");
    if (p.buffer < 1) issues.push_back("buffer < 1 at '" + name + "'");
    g.nodes_[v] = p;
  }
  for (const auto& [name, p] : raw.node_params) {
    if (!index.count(name)) issues.push_back("node_params for undeclared vertex '" + name + "'");
  }

  auto label = [](const std::string& a, const std::string& b) { return "(" + a + "," + b + ")"; };

  for (const auto& [a, b] : raw.edges) {
    bool ok = true;
    if (!index.count(a)) {
      issues.push_back("dangling endpoint '" + a + "' in edge " + label(a, b));
      ok = false;
    }
    if (!index.count(b)) {
      issues.push_back("dangling endpoint '" + b + "' in edge " + label(a, b));
      ok = false;
    }
    if (a == b) {
      issues.push_back("self-loop " + label(a, b));
      ok = false;
    }
    if (!ok) continue;
    VertexId ia = index[a], ib = index[b];
    Edge e{std::min(ia, ib), std::max(ia, ib)};
    if (std::find(g.edges_.begin(), g.edges_.end(), e) != g.edges_.end()) {
      issues.push_back("duplicate edge " + label(a, b));
      continue;
    }
    g.edges_.push_back(e);
  }
  std::sort(g.edges_.begin(), g.edges_.end());

  g.demand_.assign(g.edges_.size(), EdgeDemand{});
  std::vector<char> seen(g.edges_.size(), 0);
  for (const auto& d : raw.edge_demand) {
    auto e = g.find_edge(d.u, d.v);
    if (!e) {
      issues.push_back("edge_demand for unknown edge " + label(d.u, d.v));
      continue;
    }
    if (seen[*e]) {
      issues.push_back("duplicate edge_demand for " + label(d.u, d.v));
      continue;
    }
    seen[*e] = 1;
    auto kind = parse_arrival_kind(d.kind);
    if (!kind) {
      issues.push_back("unknown arrival_kind '" + d.kind + "' on " + label(d.u, d.v));
      continue;
    }
    if (!(d.nu >= 0.0) || !std::isfinite(d.nu)) issues.push_back("nu out of range on " + label(d.u, d.v));
    if (*kind == ArrivalKind::bernoulli && d.nu > 1.0)
      issues.push_back("nu > 1 with bernoulli arrivals on " + label(d.u, d.v));
    double s2 = d.sigma2.value_or(default_variance(*kind, d.nu));
    if (!(s2 >= 0.0) || !std::isfinite(s2)) issues.push_back("sigma2 out of range on " + label(d.u, d.v));
    g.demand_[*e] = EdgeDemand{d.nu, s2, *kind};
  }

  if (!issues.empty()) throw ValidationError(std::move(issues));

  g.incident_.assign(g.names_.size(), {});
  for (EdgeId e = 0; e < g.edges_.size(); ++e) {
    g.incident_[g.edges_[e].u].push_back(e);
    g.incident_[g.edges_[e].v].push_back(e);
  }
  return g;
}

/// Same per-node physics on every vertex; handy for tests and sweeps.
inline SwitchInstance make_uniform_instance(const std::vector<std::string>& vertices,
                                            const std::vector<std::pair<std::string, std::string>>& edges,
                                            NodeParams params, double nu = 0.0,
                                            ArrivalKind kind = ArrivalKind::bernoulli) {
  RawInstance raw;
  raw.vertices = vertices;
  raw.edges = edges;
  for (const auto& v : vertices) raw.node_params[v] = params;
  for (const auto& [a, b] : edges) raw.edge_demand.push_back({a, b, nu, std::nullopt, to_string(kind)});
  return validate_instance(raw);
}

}  // namespace qswitch
