#pragma once

// Exact maximum-weight matching and exhaustive matching enumeration.
//
// The optimum is found with a dynamic program over vertex subsets: the best
// matching inside a vertex set either leaves its lowest vertex exposed or
// matches it to a neighbour in the set. A second pass walks the matchings in
// lexicographic order of their sorted edge ids, pruned by the subset table,
// and returns the first one attaining the optimum.

#include <cstdint>
#include <limits>
#include <vector>

#include "qswitch/model.hpp"

namespace qswitch {

inline constexpr std::size_t kMaxMatchingVertices = 22;
inline constexpr std::size_t kDefaultEnumerationCap = 20;

struct WeightedMatchingResult {
  Matching matching;
  double weight = 0.0;
};

namespace detail {

class SubsetMatchingTable {
 public:
  SubsetMatchingTable(const SwitchInstance& g, const std::vector<double>& weights)
      : g_(g), w_(weights), n_(g.num_vertices()) {
    best_.assign(std::size_t{1} << n_, 0.0);
    for (std::uint32_t mask = 1; mask < best_.size(); ++mask) {
      const VertexId low = static_cast<VertexId>(__builtin_ctz(mask));
      const std::uint32_t rest = mask & (mask - 1);
      double b = best_[rest];
      for (EdgeId e : g_.incident(low)) {
        if (!(w_[e] > 0.0)) continue;
        const Edge& ed = g_.edge(e);
        const VertexId other = ed.u == low ? ed.v : ed.u;
        if (!(rest >> other & 1u)) continue;
        b = std::max(b, w_[e] + best_[rest & ~(1u << other)]);
      }
      best_[mask] = b;
    }
  }

  double optimum() const { return best_.back(); }

  /// Lexicographically smallest edge set (sorted by EdgeId) with weight within
  /// tol of the optimum. Negative-weight edges never appear in an optimum.
  Matching lexicographic_optimum(double tol) const {
    const double target = optimum();
    std::vector<EdgeId> chosen;
    const std::uint32_t all = static_cast<std::uint32_t>(best_.size() - 1);
    search(all, 0, 0.0, target, tol, chosen);
    return Matching(chosen);
  }

 private:
  bool search(std::uint32_t free, EdgeId next, double weight, double target, double tol,
              std::vector<EdgeId>& chosen) const {
    if (weight >= target - tol) return true;
    if (weight + best_[free] < target - tol) return false;
    for (EdgeId e = next; e < g_.num_edges(); ++e) {
      if (w_[e] < 0.0) continue;
      const Edge& ed = g_.edge(e);
      if (!(free >> ed.u & 1u) || !(free >> ed.v & 1u)) continue;
      chosen.push_back(e);
      if (search(free & ~(1u << ed.u) & ~(1u << ed.v), e + 1, weight + w_[e], target, tol, chosen)) return true;
      chosen.pop_back();
    }
    return false;
  }

  const SwitchInstance& g_;
  const std::vector<double>& w_;
  std::size_t n_;
  std::vector<double> best_;
};

}  // namespace detail

/// Maximum-weight matching over all matchings of g, the empty one included,
/// so the returned weight is never negative. Ties go to the lexicographically
/// smallest edge set.
inline WeightedMatchingResult max_weight_matching(const SwitchInstance& g, const std::vector<double>& weights) {
  if (weights.size() != g.num_edges()) throw Error("weight vector has wrong dimension");
  for (double w : weights)
    if (!std::isfinite(w)) throw Error("weights must be finite");
  if (g.num_vertices() > kMaxMatchingVertices)
    throw Error("max_weight_matching supports at most " + std::to_string(kMaxMatchingVertices) + " vertices");

  detail::SubsetMatchingTable table(g, weights);
  const double opt = table.optimum();
  WeightedMatchingResult out;
  out.matching = table.lexicographic_optimum(1e-12 * (1.0 + std::abs(opt)));
  for (EdgeId e : out.matching.edges) out.weight += weights[e];
  return out;
}

/// Every matching of g exactly once, in lexicographic order of the sorted
/// edge-id sequence (so the empty matching comes first).
inline std::vector<Matching> enumerate_matchings(const SwitchInstance& g, std::size_t cap = kDefaultEnumerationCap) {
  if (g.num_edges() > cap)
    throw Error("enumerate_matchings: " + std::to_string(g.num_edges()) + " edges exceeds cap " + std::to_string(cap));
  std::vector<Matching> out;
  std::vector<EdgeId> current;
  std::vector<char> used(g.num_vertices(), 0);
  auto visit = [&](auto&& self, EdgeId next) -> void {
    out.emplace_back(current);
    for (EdgeId e = next; e < g.num_edges(); ++e) {
      const Edge& ed = g.edge(e);
      if (used[ed.u] || used[ed.v]) continue;
      used[ed.u] = used[ed.v] = 1;
      current.push_back(e);
      self(self, e + 1);
      current.pop_back();
      used[ed.u] = used[ed.v] = 0;
    }
  };
  visit(visit, 0);
  return out;
}

}  // namespace qswitch
