#pragma once

// Fractional scheduling LPs over the degree-capped matching polytope.
//
//   maximise   sum_e w_e x_e
//   subject to sum_{e in delta(v)} x_e <= lambda_v          for every vertex v
//              sum_{e in E(S)}     x_e <= (|S| - 1) / 2     for odd S, |S| >= 3
//              x >= 0
//
// solve_algorithm1 adds the odd-set (blossom) rows lazily, one most-violated
// set per round. solve_algorithm2 drops them and scales the degree-only
// optimum by 2/3, which always lands inside the matching polytope.

#include <cstdint>
#include <optional>
#include <vector>

#include "qswitch/model.hpp"
#include "qswitch/simplex.hpp"

namespace qswitch {

inline constexpr std::size_t kDefaultSeparationCap = 20;
inline constexpr double kCutTolerance = 1e-9;

/// Odd vertex set S with |S| >= 3; members sorted.
struct OddSet {
  std::vector<VertexId> members;

  double rhs() const { return static_cast<double>(members.size() - 1) / 2.0; }
  bool contains(VertexId v) const { return std::binary_search(members.begin(), members.end(), v); }
  friend auto operator<=>(const OddSet&, const OddSet&) = default;
};

struct LpProblem {
  std::size_t num_vertices = 0;
  std::vector<Edge> edges;
  std::vector<double> objective;    // w_e
  std::vector<double> degree_caps;  // lambda_v
  std::vector<OddSet> blossom_cuts;

  static LpProblem from_instance(const SwitchInstance& g, std::vector<double> weights) {
    if (weights.size() != g.num_edges()) throw Error("weight vector has wrong dimension");
    LpProblem p;
    p.num_vertices = g.num_vertices();
    p.edges = g.edges();
    p.objective = std::move(weights);
    for (const auto& n : g.nodes()) p.degree_caps.push_back(n.lambda);
    return p;
  }
};

struct LpSolution {
  FractionalEdgeVector x;
  double objective_value = 0.0;
  std::vector<OddSet> active_cuts;        // cuts added by separation, in order
  std::vector<double> iteration_values;   // objective after each cutting-plane round
  double duality_gap = 0.0;
};

struct BlossomViolation {
  OddSet set;
  double violation = 0.0;  // sum_{E(S)} x_e - (|S|-1)/2
};

/// Thrown when the LP solver cannot certify an optimum.
class NumericalError : public Error {
 public:
  using Error::Error;
};

inline LpSolution solve_lp(const LpProblem& prob) {
  const std::size_t m = prob.edges.size();
  if (prob.objective.size() != m) throw Error("objective has wrong dimension");
  if (prob.degree_caps.size() != prob.num_vertices) throw Error("degree caps have wrong dimension");
  for (const auto& s : prob.blossom_cuts)
    if (s.members.size() < 3 || s.members.size() % 2 == 0) throw Error("blossom cut needs an odd set of size >= 3");

  LinearProgram lp(m, prob.objective, true);
  for (VertexId v = 0; v < prob.num_vertices; ++v) {
    std::vector<double> row(m, 0.0);
    for (EdgeId e = 0; e < m; ++e)
      if (prob.edges[e].touches(v)) row[e] = 1.0;
    lp.add(std::move(row), Sense::le, prob.degree_caps[v]);
  }
  for (const auto& s : prob.blossom_cuts) {
    std::vector<double> row(m, 0.0);
    for (EdgeId e = 0; e < m; ++e)
      if (s.contains(prob.edges[e].u) && s.contains(prob.edges[e].v)) row[e] = 1.0;
    lp.add(std::move(row), Sense::le, s.rhs());
  }

  LpResult r = simplex(lp);
  if (r.status != LpStatus::optimal) throw NumericalError(std::string("LP solve failed: ") + to_string(r.status));
  const double scale = 1.0 + std::abs(r.objective);
  if (r.duality_gap > 1e-9 * scale || r.primal_residual > 1e-9 || r.dual_residual > 1e-9 * scale)
    throw NumericalError("LP optimum not certified (gap " + std::to_string(r.duality_gap) + ")");

  LpSolution sol;
  sol.x = FractionalEdgeVector(std::move(r.x));
  sol.objective_value = r.objective;
  sol.duality_gap = r.duality_gap;
  return sol;
}

/// Most violated odd-set inequality by exhaustive enumeration of odd vertex
/// subsets, or nothing when every set satisfies its bound to within 1e-9.
/// Ties between equally violated sets go to the smallest bitmask.
inline std::optional<BlossomViolation> separate_blossom(std::size_t num_vertices, const std::vector<Edge>& edges,
                                                        const FractionalEdgeVector& x,
                                                        std::size_t cap = kDefaultSeparationCap) {
  if (num_vertices > cap)
    throw Error("separate_blossom: " + std::to_string(num_vertices) + " vertices exceeds cap " + std::to_string(cap));
  if (x.size() != edges.size()) throw Error("edge vector has wrong dimension");
  if (num_vertices < 3) return std::nullopt;

  const std::size_t n = num_vertices;
  // lower[v] lists (neighbour, x_e) for the lower-indexed end of each edge at v.
  std::vector<std::vector<std::pair<VertexId, double>>> lower(n);
  for (EdgeId e = 0; e < edges.size(); ++e) lower[edges[e].v].push_back({edges[e].u, x[e]});

  // inside[mask] = sum of x over edges with both ends in mask, built by
  // adding the highest vertex of mask to mask without it.
  std::vector<double> inside(std::size_t{1} << n, 0.0);
  std::optional<BlossomViolation> best;
  std::uint32_t best_mask = 0;
  for (std::uint32_t mask = 1; mask < inside.size(); ++mask) {
    const VertexId top = 31 - static_cast<VertexId>(__builtin_clz(mask));
    const std::uint32_t rest = mask & ~(1u << top);
    double s = inside[rest];
    for (const auto& [u, val] : lower[top])
      if (rest >> u & 1u) s += val;
    inside[mask] = s;

    const int size = __builtin_popcount(mask);
    if (size < 3 || size % 2 == 0) continue;
    const double viol = s - static_cast<double>(size - 1) / 2.0;
    if (viol > kCutTolerance && (!best || viol > best->violation)) {
      best = BlossomViolation{{}, viol};
      best_mask = mask;
    }
  }
  if (best) {
    for (VertexId v = 0; v < n; ++v)
      if (best_mask >> v & 1u) best->set.members.push_back(v);
  }
  return best;
}

inline std::optional<BlossomViolation> separate_blossom(const SwitchInstance& g, const FractionalEdgeVector& x,
                                                        std::size_t cap = kDefaultSeparationCap) {
  return separate_blossom(g.num_vertices(), g.edges(), x, cap);
}

/// Cutting-plane solve of the full LP (degree caps plus lazily separated
/// odd-set rows).
inline LpSolution solve_algorithm1(const SwitchInstance& g, const std::vector<double>& weights,
                                   std::size_t separation_cap = kDefaultSeparationCap,
                                   std::size_t max_rounds = 10000) {
  LpProblem prob = LpProblem::from_instance(g, weights);
  std::vector<double> values;
  for (std::size_t round = 0; round < max_rounds; ++round) {
    LpSolution sol = solve_lp(prob);
    values.push_back(sol.objective_value);
    auto cut = separate_blossom(g, sol.x, separation_cap);
    if (!cut) {
      sol.active_cuts = prob.blossom_cuts;
      sol.iteration_values = std::move(values);
      return sol;
    }
    if (std::find(prob.blossom_cuts.begin(), prob.blossom_cuts.end(), cut->set) != prob.blossom_cuts.end())
      throw NumericalError("separation returned a cut that is already in the LP");
    prob.blossom_cuts.push_back(std::move(cut->set));
  }
  throw NumericalError("cutting-plane loop exceeded its round limit");
}

/// Degree-only LP optimum scaled by 2/3.
inline LpSolution solve_algorithm2(const SwitchInstance& g, const std::vector<double>& weights) {
  LpSolution sol = solve_lp(LpProblem::from_instance(g, weights));
  for (double& v : sol.x.values) v *= 2.0 / 3.0;
  sol.objective_value = 0.0;
  for (EdgeId e = 0; e < g.num_edges(); ++e) sol.objective_value += weights[e] * sol.x[e];
  sol.iteration_values = {sol.objective_value};
  return sol;
}

}  // namespace qswitch
