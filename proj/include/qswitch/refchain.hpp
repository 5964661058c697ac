#pragma once

// Single-node reference chain for the entanglement buffer.
//
// State L in {0..B}. Each slot: a service attempt (prob p_serve) removes one
// entanglement if any; each survivor then decoheres independently with
// prob mu; finally one entanglement arrives with prob lambda, truncated at B.
// The stationary probability of a nonempty buffer, C = 1 - pi_0, lower-bounds
// availability under any schedule that attempts service at most p_serve.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "qswitch/model.hpp"

namespace qswitch {

struct ChainSpec {
  double lambda = 0.0;
  double mu = 0.0;
  double p_serve = 0.0;
  int buffer = 1;
};

inline void check_chain_spec(const ChainSpec& s) {
  auto prob = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!prob(s.lambda) || !prob(s.mu) || !prob(s.p_serve)) throw Error("chain probabilities must lie in [0,1]");
  if (s.buffer < 1) throw Error("chain buffer must be >= 1");
}

/// Which policy's service-attempt rate feeds the reference chain.
enum class Variant { alg1, alg2 };

inline const char* to_string(Variant v) { return v == Variant::alg1 ? "alg1" : "alg2"; }

/// p_serve used for a node with arrival probability lambda.
inline double service_attempt_probability(double lambda, Variant v) {
  return v == Variant::alg1 ? lambda : 2.0 / 3.0 * lambda;
}

class ReducibleChainError : public Error {
 public:
  using Error::Error;
};

struct ChainAnalysis {
  Eigen::MatrixXd kernel;
  Eigen::VectorXd stationary;
  double availability = 0.0;
  double residual = 0.0;  // ||pi P - pi||_inf
};

namespace detail {

// The chain is built and solved in extended precision. Availabilities
// saturate in B well before double resolution runs out, and the gaps
// C^{B'} - C^B must still come out with the right sign.
using Real = long double;
using MatrixR = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using VectorR = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

/// Binomial(n, q) pmf for k = 0..n.
inline std::vector<Real> binomial_pmf(int n, Real q) {
  std::vector<Real> pmf(static_cast<std::size_t>(n) + 1, 0.0L);
  if (q <= 0.0L) {
    pmf[0] = 1.0L;
    return pmf;
  }
  if (q >= 1.0L) {
    pmf[static_cast<std::size_t>(n)] = 1.0L;
    return pmf;
  }
  // Log space keeps (1-q)^n representable for large n.
  const Real lq = std::log(q), l1q = std::log1p(-q);
  for (int k = 0; k <= n; ++k) {
    const Real lc = std::lgamma(n + 1.0L) - std::lgamma(k + 1.0L) - std::lgamma(n - k + 1.0L);
    pmf[static_cast<std::size_t>(k)] = std::exp(lc + k * lq + (n - k) * l1q);
  }
  return pmf;
}

inline MatrixR build_kernel_ext(const ChainSpec& spec) {
  check_chain_spec(spec);
  const int B = spec.buffer;
  MatrixR P = MatrixR::Zero(B + 1, B + 1);
  const Real p = spec.p_serve, lam = spec.lambda;
  const Real ps[2] = {1.0L - p, p};
  const Real pa[2] = {1.0L - lam, lam};
  for (int i = 0; i <= B; ++i) {
    for (int s = 0; s < 2; ++s) {
      const int kept = std::max(0, i - s);
      const std::vector<Real> survive = binomial_pmf(kept, 1.0L - static_cast<Real>(spec.mu));
      for (int a = 0; a < 2; ++a) {
        const Real w = ps[s] * pa[a];
        if (w == 0.0L) continue;
        for (int k = 0; k <= kept; ++k) P(i, std::min(B, k + a)) += w * survive[static_cast<std::size_t>(k)];
      }
    }
  }
  return P;
}

/// Solves (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
inline VectorR stationary_ext(const MatrixR& P) {
  const Eigen::Index n = P.rows();
  if (n == 0 || P.cols() != n) throw Error("kernel must be square and nonempty");
  MatrixR A = P.transpose() - MatrixR::Identity(n, n);
  A.row(n - 1).setOnes();
  VectorR b = VectorR::Zero(n);
  b(n - 1) = 1.0L;

  Eigen::FullPivLU<MatrixR> lu(A);
  lu.setThreshold(1e-12L);
  if (!lu.isInvertible()) throw ReducibleChainError("reducible chain: stationary distribution is not unique");
  VectorR pi = lu.solve(b);
  // One step of iterative refinement.
  pi += lu.solve(b - A * pi);
  for (Eigen::Index i = 0; i < n; ++i)
    if (pi(i) < 0.0L && pi(i) > -1e-14L) pi(i) = 0.0L;
  if ((pi.array() < 0.0L).any()) throw ReducibleChainError("stationary solve produced negative mass");
  return pi;
}

/// Stationary law of the chain started from the empty buffer: the solve is
/// restricted to the states reachable from 0, which form a closed set. This
/// stays well defined when lambda = 0 or mu = 0 leave other states
/// absorbing.
inline VectorR stationary_from_empty(const MatrixR& P) {
  const Eigen::Index n = P.rows();
  std::vector<Eigen::Index> reach{0};
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  seen[0] = 1;
  for (std::size_t k = 0; k < reach.size(); ++k)
    for (Eigen::Index j = 0; j < n; ++j)
      if (P(reach[k], j) > 0.0L && !seen[static_cast<std::size_t>(j)]) {
        seen[static_cast<std::size_t>(j)] = 1;
        reach.push_back(j);
      }
  if (static_cast<Eigen::Index>(reach.size()) == n) return stationary_ext(P);
  std::sort(reach.begin(), reach.end());
  const auto m = static_cast<Eigen::Index>(reach.size());
  MatrixR Q(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) Q(a, b) = P(reach[a], reach[b]);
  const VectorR sub = stationary_ext(Q);
  VectorR pi = VectorR::Zero(n);
  for (Eigen::Index a = 0; a < m; ++a) pi(reach[a]) = sub(a);
  return pi;
}

/// 1 - pi_0 summed from the nonempty states.
inline Real availability_ext(const VectorR& pi) { return pi.tail(pi.size() - 1).sum(); }

}  // namespace detail

/// (B+1)x(B+1) row-stochastic transition matrix of the reference chain.
inline Eigen::MatrixXd build_kernel(const ChainSpec& spec) { return detail::build_kernel_ext(spec).cast<double>(); }

/// Unique stationary distribution via a dense direct solve of
/// (P^T - I) pi = 0 with one equation replaced by sum(pi) = 1.
inline Eigen::VectorXd stationary(const Eigen::MatrixXd& P) {
  return detail::stationary_ext(P.cast<detail::Real>()).cast<double>();
}

inline double stationarity_residual(const Eigen::MatrixXd& P, const Eigen::VectorXd& pi) {
  return (P.transpose() * pi - pi).cwiseAbs().maxCoeff();
}

inline ChainAnalysis analyze_chain(const ChainSpec& spec) {
  const detail::MatrixR P = detail::build_kernel_ext(spec);
  const detail::VectorR pi = detail::stationary_from_empty(P);
  ChainAnalysis out;
  out.kernel = P.cast<double>();
  out.stationary = pi.cast<double>();
  out.availability = static_cast<double>(detail::availability_ext(pi));
  out.residual = stationarity_residual(out.kernel, out.stationary);
  return out;
}

/// C = 1 - pi_0 for the reference chain.
inline double availability(const ChainSpec& spec) {
  return static_cast<double>(detail::availability_ext(detail::stationary_from_empty(detail::build_kernel_ext(spec))));
}

namespace detail {
inline Real availability_ext(const ChainSpec& spec) { return availability_ext(stationary_from_empty(build_kernel_ext(spec))); }
}  // namespace detail

struct CoherenceReport {
  Variant variant = Variant::alg1;
  std::vector<double> node_availability;
  double gamma = 0.0;          // min_e (C_u + C_v - 1)^+
  double gamma_product = 0.0;  // min_e C_u C_v, reported for comparison
  bool clipped = false;        // the positive part clipped at the minimising edge
  std::optional<EdgeId> binding_edge;
};

inline CoherenceReport coherence_factor(const SwitchInstance& g, Variant variant) {
  CoherenceReport r;
  r.variant = variant;
  for (const auto& n : g.nodes()) {
    ChainSpec s{n.lambda, n.mu, service_attempt_probability(n.lambda, variant), n.buffer};
    r.node_availability.push_back(availability(s));
  }
  if (g.num_edges() == 0) return r;
  double best = std::numeric_limits<double>::infinity();
  double best_product = std::numeric_limits<double>::infinity();
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const double cu = r.node_availability[g.edge(e).u];
    const double cv = r.node_availability[g.edge(e).v];
    const double raw = cu + cv - 1.0;
    if (raw < best) {
      best = raw;
      r.binding_edge = e;
    }
    best_product = std::min(best_product, cu * cv);
  }
  r.clipped = best < 0.0;
  r.gamma = std::max(0.0, best);
  r.gamma_product = best_product;
  return r;
}

/// (2C - 1)^+, the single-worst-node form of the coherence factor.
inline double single_node_gamma(double c) { return std::max(0.0, 2.0 * c - 1.0); }

struct ConvergencePoint {
  int buffer = 0;
  double availability = 0.0;
  double gap = 0.0;  // C^{B_max} - C^B
};

struct ConvergenceProfile {
  int reference_buffer = 0;
  double reference_availability = 0.0;
  std::vector<ConvergencePoint> points;
  // Least-squares fit of log(gap) against B over the points with gap > 0.
  double log_slope = 0.0;
  double log_intercept = 0.0;
  double r_squared = 0.0;
  std::size_t fitted_points = 0;
};

inline ConvergenceProfile convergence_profile(double lambda, double mu, double p_serve, const std::vector<int>& b_grid,
                                              int b_max = 200) {
  if (!std::is_sorted(b_grid.begin(), b_grid.end())) throw Error("buffer grid must be sorted ascending");
  ConvergenceProfile prof;
  prof.reference_buffer = b_max;
  const detail::Real ref = detail::availability_ext(ChainSpec{lambda, mu, p_serve, b_max});
  prof.reference_availability = static_cast<double>(ref);
  for (int b : b_grid) {
    const detail::Real c = b == b_max ? ref : detail::availability_ext(ChainSpec{lambda, mu, p_serve, b});
    prof.points.push_back({b, static_cast<double>(c), static_cast<double>(ref - c)});
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  std::size_t n = 0;
  for (const auto& p : prof.points) {
    if (!(p.gap > 0.0)) continue;
    const double x = p.buffer, y = std::log(p.gap);
    sx += x, sy += y, sxx += x * x, sxy += x * y, syy += y * y;
    ++n;
  }
  prof.fitted_points = n;
  if (n >= 2) {
    const double dn = static_cast<double>(n);
    const double vx = sxx - sx * sx / dn, vy = syy - sy * sy / dn, cxy = sxy - sx * sy / dn;
    if (vx > 0.0) {
      prof.log_slope = cxy / vx;
      prof.log_intercept = (sy - prof.log_slope * sx) / dn;
      prof.r_squared = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
    }
  }
  return prof;
}

}  // namespace qswitch
