#pragma once

// Independent reference implementations used only by the tests. Each one is
// deliberately naive: exhaustive enumeration, no shared code paths with the
// library beyond the plain data types.

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "qswitch/model.hpp"

namespace oracle {

using qswitch::Edge;
using qswitch::SwitchInstance;

/// True iff the edges selected by mask are pairwise vertex-disjoint.
inline bool disjoint(const std::vector<Edge>& edges, std::uint64_t mask) {
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!(mask >> e & 1)) continue;
    for (std::size_t f = e + 1; f < edges.size(); ++f) {
      if (!(mask >> f & 1)) continue;
      if (edges[e].u == edges[f].u || edges[e].u == edges[f].v || edges[e].v == edges[f].u ||
          edges[e].v == edges[f].v)
        return false;
    }
  }
  return true;
}

/// Every matching as an edge bitmask, by subset enumeration.
inline std::vector<std::uint64_t> all_matchings(const std::vector<Edge>& edges) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << edges.size()); ++mask)
    if (disjoint(edges, mask)) out.push_back(mask);
  return out;
}

inline double mask_weight(const std::vector<double>& w, std::uint64_t mask) {
  double s = 0.0;
  for (std::size_t e = 0; e < w.size(); ++e)
    if (mask >> e & 1) s += w[e];
  return s;
}

inline double max_matching_weight(const std::vector<Edge>& edges, const std::vector<double>& w) {
  double best = 0.0;
  for (auto m : all_matchings(edges)) best = std::max(best, mask_weight(w, m));
  return best;
}

inline std::vector<Edge> edges_of(const SwitchInstance& g) {
  std::vector<Edge> out;
  for (qswitch::EdgeId e = 0; e < g.num_edges(); ++e) out.push_back(g.edge(e));
  return out;
}

/// Reference-chain kernel by enumerating every (service coin, arrival coin,
/// per-entanglement survival coin) outcome.
inline Eigen::MatrixXd brute_kernel(double lambda, double mu, double p_serve, int B) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(B + 1, B + 1);
  for (int i = 0; i <= B; ++i)
    for (int s = 0; s <= 1; ++s)
      for (int a = 0; a <= 1; ++a) {
        const int kept = std::max(0, i - s);
        const double base = (s ? p_serve : 1 - p_serve) * (a ? lambda : 1 - lambda);
        for (unsigned coins = 0; coins < (1u << kept); ++coins) {
          double pr = base;
          int survivors = 0;
          for (int k = 0; k < kept; ++k) {
            if (coins >> k & 1) {
              pr *= 1 - mu;
              ++survivors;
            } else {
              pr *= mu;
            }
          }
          P(i, std::min(B, survivors + a)) += pr;
        }
      }
  return P;
}

/// Maximum odd-set violation sum_{E(S)} x - (|S|-1)/2 over every odd S with
/// |S| >= 3, by direct enumeration. Returns -inf when there is no such set.
inline double max_blossom_violation(std::size_t n, const std::vector<Edge>& edges, const std::vector<double>& x) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << n); ++s) {
    const int size = std::popcount(s);
    if (size < 3 || size % 2 == 0) continue;
    double inside = 0.0;
    for (std::size_t e = 0; e < edges.size(); ++e)
      if ((s >> edges[e].u & 1) && (s >> edges[e].v & 1)) inside += x[e];
    worst = std::max(worst, inside - (size - 1) / 2.0);
  }
  return worst;
}

/// Maximum degree-constraint violation sum_{delta(v)} x - cap_v.
inline double max_degree_violation(std::size_t n, const std::vector<Edge>& edges, const std::vector<double>& x,
                                   const std::vector<double>& cap) {
  std::vector<double> deg(n, 0.0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    deg[edges[e].u] += x[e];
    deg[edges[e].v] += x[e];
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < n; ++v) worst = std::max(worst, deg[v] - cap[v]);
  return worst;
}

/// Dense LP  max c.x  s.t.  A x <= b,  x >= 0  solved by enumerating every
/// basic solution. Only for a handful of variables.
struct VertexLpResult {
  bool feasible = false;
  double value = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd x;
};

inline VertexLpResult vertex_enumeration(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  const Eigen::Index n = A.cols(), m = A.rows();
  // Stack x >= 0 as -x <= 0.
  Eigen::MatrixXd G(m + n, n);
  G << A, -Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd h(m + n);
  h << b, Eigen::VectorXd::Zero(n);
  const Eigen::Index rows = m + n;

  VertexLpResult best;
  // Iterate over all n-subsets of the rows.
  std::vector<bool> sel(static_cast<std::size_t>(rows), false);
  std::fill(sel.begin(), sel.begin() + n, true);
  do {
    Eigen::MatrixXd M(n, n);
    Eigen::VectorXd r(n);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
      if (sel[static_cast<std::size_t>(i)]) {
        M.row(k) = G.row(i);
        r(k) = h(i);
        ++k;
      }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible()) continue;
    Eigen::VectorXd x = lu.solve(r);
    if (((G * x - h).array() > 1e-9).any()) continue;
    const double v = c.dot(x);
    if (!best.feasible || v > best.value) {
      best.feasible = true;
      best.value = v;
      best.x = x;
    }
  } while (std::prev_permutation(sel.begin(), sel.end()));
  return best;
}

/// Random graph on n vertices with each pair present with probability p,
/// edges capped at max_edges.
inline std::vector<std::pair<int, int>> random_graph(std::mt19937_64& rng, int n, double p, std::size_t max_edges) {
  std::vector<std::pair<int, int>> out;
  std::bernoulli_distribution coin(p);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (coin(rng) && out.size() < max_edges) out.emplace_back(u, v);
  return out;
}

inline SwitchInstance instance_from_pairs(int n, const std::vector<std::pair<int, int>>& pairs,
                                          qswitch::NodeParams np = {0.3, 0.03, 10}, double nu = 0.05) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back((i < 10 ? "v0" : "v") + std::to_string(i));
  std::vector<std::pair<std::string, std::string>> es;
  for (auto [u, v] : pairs) es.emplace_back(names[static_cast<std::size_t>(u)], names[static_cast<std::size_t>(v)]);
  return qswitch::make_uniform_instance(names, es, np, nu);
}

}  // namespace oracle
