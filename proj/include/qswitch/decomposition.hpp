#pragma once

// Convex decomposition of a matching-polytope point into matchings by
// column generation.
//
// The restricted master is the feasibility LP
//     sum_M p_M 1_M + a = x,   sum_M p_M + a_0 = 1,   p, a >= 0
// minimising the artificial mass sum(a). Its duals (y, z) on the edge rows
// and the normalisation row price new columns: a matching M improves the
// master iff y . 1_M + z > 0, so the pricing step is a maximum-weight
// matching under weights y and the loop stops once W* <= -z.

#include <numeric>
#include <string>
#include <vector>

#include "qswitch/lp_scheduler.hpp"
#include "qswitch/matching.hpp"
#include "qswitch/model.hpp"
#include "qswitch/rng.hpp"
#include "qswitch/simplex.hpp"

namespace qswitch {

struct MixtureAtom {
  double p = 0.0;
  Matching matching;

  friend bool operator==(const MixtureAtom&, const MixtureAtom&) = default;
};

struct MatchingMixture {
  std::vector<MixtureAtom> atoms;

  static MatchingMixture point_mass(Matching m) { return MatchingMixture{{MixtureAtom{1.0, std::move(m)}}}; }

  double total_probability() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.p;
    return s;
  }

  friend bool operator==(const MatchingMixture&, const MatchingMixture&) = default;
};

/// sum_j p_j 1_{M_j}, i.e. the per-edge inclusion probability.
inline FractionalEdgeVector edge_marginals(const SwitchInstance& g, const MatchingMixture& mix) {
  FractionalEdgeVector x = FractionalEdgeVector::zeros(g.num_edges());
  for (const auto& a : mix.atoms)
    for (EdgeId e : a.matching.edges) x[e] += a.p;
  return x;
}

/// Throws unless mix is a probability distribution over matchings of g.
inline void check_mixture(const SwitchInstance& g, const MatchingMixture& mix, double tol = 1e-9) {
  if (mix.atoms.empty()) throw Error("mixture has no atoms");
  for (const auto& a : mix.atoms) {
    if (!(a.p >= 0.0) || !std::isfinite(a.p)) throw Error("mixture probability must be finite and nonnegative");
    if (!is_matching(g, a.matching)) throw Error("mixture atom is not a matching");
  }
  if (std::abs(mix.total_probability() - 1.0) > tol) throw Error("mixture probabilities do not sum to 1");
}

class DecompositionError : public Error {
 public:
  enum class Kind { infeasible_master, iteration_cap, numerical };

  DecompositionError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct DecompositionOptions {
  double column_cap_factor = 10.0;  // at most factor * |E| columns in the master
  double termination_tol = 1e-9;    // W* <= -z + tol ends the loop
  double feasibility_tol = 1e-10;   // artificial mass regarded as zero
  double prune_below = 1e-12;
};

struct DecompositionResult {
  MatchingMixture mixture;
  std::size_t columns = 0;     // size of the column set at termination
  std::size_t iterations = 0;  // master solves
  double max_error = 0.0;      // max_e |sum_j p_j 1_{M_j}(e) - x_e|
};

namespace detail {

struct MasterSolution {
  std::vector<double> p;
  std::vector<double> y;
  double z = 0.0;
  double artificial_mass = 0.0;
};

inline MasterSolution solve_master(const SwitchInstance& g, const FractionalEdgeVector& x,
                                   const std::vector<Matching>& columns) {
  const std::size_t m = g.num_edges();
  const std::size_t k = columns.size();
  // Variables: k matching columns, then m + 1 explicit artificials.
  std::vector<double> cost(k + m + 1, 0.0);
  for (std::size_t i = k; i < cost.size(); ++i) cost[i] = 1.0;
  LinearProgram lp(k + m + 1, cost, false);
  for (EdgeId e = 0; e < m; ++e) {
    std::vector<double> row(k + m + 1, 0.0);
    for (std::size_t j = 0; j < k; ++j)
      if (columns[j].contains(e)) row[j] = 1.0;
    row[k + e] = 1.0;
    lp.add(std::move(row), Sense::eq, x[e]);
  }
  std::vector<double> norm(k + m + 1, 0.0);
  for (std::size_t j = 0; j < k; ++j) norm[j] = 1.0;
  norm[k + m] = 1.0;
  lp.add(std::move(norm), Sense::eq, 1.0);

  LpResult r = simplex(lp);
  if (r.status != LpStatus::optimal)
    throw DecompositionError(DecompositionError::Kind::numerical,
                             std::string("restricted master failed: ") + to_string(r.status));
  MasterSolution out;
  out.p.assign(r.x.begin(), r.x.begin() + static_cast<std::ptrdiff_t>(k));
  out.y.assign(r.duals.begin(), r.duals.begin() + static_cast<std::ptrdiff_t>(m));
  out.z = r.duals[m];
  out.artificial_mass = r.objective;
  return out;
}

}  // namespace detail

/// Writes x as a convex combination of matchings of g. Throws
/// DecompositionError when x lies outside the matching polytope or the
/// column cap is hit.
inline DecompositionResult decompose(const SwitchInstance& g, const FractionalEdgeVector& x,
                                     const DecompositionOptions& opt = {}) {
  check_edge_vector(g, x);
  const std::size_t m = g.num_edges();
  DecompositionResult result;

  std::vector<Matching> columns;
  columns.emplace_back();
  for (EdgeId e = 0; e < m; ++e)
    if (x[e] > 0.0) columns.push_back(Matching({e}));
  const std::size_t cap = std::max<std::size_t>(1, static_cast<std::size_t>(opt.column_cap_factor * m));
  if (columns.size() > cap)
    throw DecompositionError(DecompositionError::Kind::iteration_cap, "iteration cap exceeded");

  detail::MasterSolution master;
  while (true) {
    master = detail::solve_master(g, x, columns);
    ++result.iterations;
    // A feasible master has objective 0, so (y, z) = (0, 0) is an optimal
    // dual and W* = 0 <= -z holds for every matching.
    if (master.artificial_mass <= opt.feasibility_tol) break;

    WeightedMatchingResult priced = max_weight_matching(g, master.y);
    if (priced.weight <= -master.z + opt.termination_tol)
      throw DecompositionError(DecompositionError::Kind::infeasible_master,
                               "infeasible master at termination: point is outside the matching polytope");
    if (std::find(columns.begin(), columns.end(), priced.matching) != columns.end())
      throw DecompositionError(DecompositionError::Kind::numerical, "pricing returned an existing column");
    if (columns.size() + 1 > cap)
      throw DecompositionError(DecompositionError::Kind::iteration_cap, "iteration cap exceeded");
    columns.push_back(std::move(priced.matching));
  }

  result.columns = columns.size();
  double total = 0.0;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (master.p[j] < opt.prune_below) continue;
    result.mixture.atoms.push_back({master.p[j], columns[j]});
    total += master.p[j];
  }
  if (result.mixture.atoms.empty() || total <= 0.0)
    throw DecompositionError(DecompositionError::Kind::numerical, "decomposition produced no atoms");
  for (auto& a : result.mixture.atoms) a.p /= total;

  FractionalEdgeVector rec = edge_marginals(g, result.mixture);
  for (EdgeId e = 0; e < m; ++e) result.max_error = std::max(result.max_error, std::abs(rec[e] - x[e]));
  return result;
}

/// Draws atoms of a mixture with one uniform variate per draw.
class MixtureSampler {
 public:
  explicit MixtureSampler(MatchingMixture mix) : mix_(std::move(mix)) {
    if (mix_.atoms.empty()) throw Error("cannot sample from an empty mixture");
    double s = 0.0;
    for (const auto& a : mix_.atoms) cdf_.push_back(s += a.p);
  }

  const Matching& sample(RandomStream& rng) const {
    const double u = rng.uniform() * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return mix_.atoms[static_cast<std::size_t>(it - cdf_.begin())].matching;
  }

  const MatchingMixture& mixture() const noexcept { return mix_; }

 private:
  MatchingMixture mix_;
  std::vector<double> cdf_;
};

inline Matching sample_matching(const MatchingMixture& mix, RandomStream& rng) {
  return MixtureSampler(mix).sample(rng);
}

}  // namespace qswitch
