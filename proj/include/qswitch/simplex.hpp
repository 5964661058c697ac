#pragma once

// Dense two-phase tableau simplex with Bland's rule.
//
// Intended for the small LPs of this library (tens of rows and columns).
// Besides the primal optimum it returns one dual value per constraint, read
// off the tableau columns of the initial identity basis.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "qswitch/model.hpp"

namespace qswitch {

enum class Sense { le, eq, ge };

struct LinearProgram {
  struct Constraint {
    std::vector<double> coeffs;  // dense, one entry per variable
    Sense sense = Sense::le;
    double rhs = 0.0;
  };

  std::size_t num_vars = 0;
  std::vector<double> objective;
  bool maximize = true;
  std::vector<Constraint> constraints;

  LinearProgram() = default;
  LinearProgram(std::size_t n, std::vector<double> c, bool max = true)
      : num_vars(n), objective(std::move(c)), maximize(max) {}

  void add(std::vector<double> coeffs, Sense sense, double rhs) {
    constraints.push_back({std::move(coeffs), sense, rhs});
  }
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration limit";
  }
  return "?";
}

/// Duals follow the problem's own sense: at an optimum the reduced costs
/// c - A^T y are <= 0 for a maximisation and >= 0 for a minimisation, and
/// b^T y equals the objective value.
struct LpResult {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;
  std::vector<double> duals;
  double objective = 0.0;
  double duality_gap = 0.0;      // |c^T x - b^T y|
  double primal_residual = 0.0;  // worst constraint or bound violation
  double dual_residual = 0.0;    // worst reduced-cost sign violation
  std::size_t pivots = 0;
};

struct SimplexOptions {
  double pivot_tol = 1e-11;
  double cost_tol = 1e-11;  // scaled by max(1, |c|_inf)
  double feasibility_tol = 1e-9;
  std::size_t max_pivots = 200000;
};

namespace detail {

class Tableau {
 public:
  Tableau(const LinearProgram& lp, const SimplexOptions& opt) : lp_(lp), opt_(opt) {
    m_ = lp.constraints.size();
    n_ = lp.num_vars;
    sign_.assign(m_, 1.0);
    std::size_t slacks = 0, arts = 0;
    for (const auto& c : lp.constraints) {
      if (c.coeffs.size() != n_) throw Error("LP constraint has wrong width");
      Sense s = effective_sense(c);
      if (s != Sense::eq) ++slacks;
      if (s != Sense::le) ++arts;
    }
    art_begin_ = n_ + slacks;
    cols_ = art_begin_ + arts;
    t_.assign(m_, std::vector<double>(cols_, 0.0));
    rhs_.assign(m_, 0.0);
    basis_.assign(m_, 0);
    unit_col_.assign(m_, 0);

    std::size_t next_slack = n_, next_art = art_begin_;
    for (std::size_t i = 0; i < m_; ++i) {
      const auto& c = lp.constraints[i];
      sign_[i] = c.rhs < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_; ++j) t_[i][j] = sign_[i] * c.coeffs[j];
      rhs_[i] = sign_[i] * c.rhs;
      Sense s = effective_sense(c);
      if (s == Sense::le) {
        t_[i][next_slack] = 1.0;
        basis_[i] = unit_col_[i] = next_slack++;
      } else {
        if (s == Sense::ge) t_[i][next_slack++] = -1.0;
        t_[i][next_art] = 1.0;
        basis_[i] = unit_col_[i] = next_art++;
      }
    }
  }

  LpResult solve() {
    LpResult res;
    const double cscale = std::max(1.0, max_abs(lp_.objective));

    if (cols_ > art_begin_) {
      std::vector<double> phase1(cols_, 0.0);
      for (std::size_t j = art_begin_; j < cols_; ++j) phase1[j] = 1.0;
      set_costs(phase1);
      LpStatus s = iterate(cols_, opt_.cost_tol, res.pivots);
      if (s == LpStatus::iteration_limit) return fail(res, s);
      double infeas = 0.0;
      for (std::size_t i = 0; i < m_; ++i)
        if (basis_[i] >= art_begin_) infeas += rhs_[i];
      if (infeas > opt_.feasibility_tol) return fail(res, LpStatus::infeasible);
      drive_out_artificials(res.pivots);
    }

    std::vector<double> phase2(cols_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) phase2[j] = lp_.maximize ? -lp_.objective[j] : lp_.objective[j];
    set_costs(phase2);
    LpStatus s = iterate(art_begin_, opt_.cost_tol * cscale, res.pivots);
    if (s != LpStatus::optimal) return fail(res, s);

    res.status = LpStatus::optimal;
    res.x.assign(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < n_) res.x[basis_[i]] = std::max(0.0, rhs_[i]);
    res.duals.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t u = unit_col_[i];
      const double y = cost_[u] - d_[u];
      res.duals[i] = (lp_.maximize ? -1.0 : 1.0) * sign_[i] * y;
    }
    certify(res);
    return res;
  }

 private:
  static Sense effective_sense(const LinearProgram::Constraint& c) {
    if (c.rhs >= 0.0 || c.sense == Sense::eq) return c.sense;
    return c.sense == Sense::le ? Sense::ge : Sense::le;
  }

  static double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }

  LpResult& fail(LpResult& res, LpStatus s) {
    res.status = s;
    return res;
  }

  void set_costs(const std::vector<double>& c) {
    cost_ = c;
    d_ = c;
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost_[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < cols_; ++j) d_[j] -= cb * t_[i][j];
    }
  }

  void pivot(std::size_t r, std::size_t q) {
    const double p = t_[r][q];
    for (std::size_t j = 0; j < cols_; ++j) t_[r][j] /= p;
    rhs_[r] /= p;
    t_[r][q] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = t_[i][q];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols_; ++j) t_[i][j] -= f * t_[r][j];
      t_[i][q] = 0.0;
      rhs_[i] -= f * rhs_[r];
      if (rhs_[i] < 0.0 && rhs_[i] > -opt_.feasibility_tol) rhs_[i] = 0.0;
    }
    const double f = d_[q];
    if (f != 0.0) {
      for (std::size_t j = 0; j < cols_; ++j) d_[j] -= f * t_[r][j];
      d_[q] = 0.0;
    }
    basis_[r] = q;
  }

  // Bland's rule over columns [0, limit).
  LpStatus iterate(std::size_t limit, double tol, std::size_t& pivots) {
    while (true) {
      std::size_t q = limit;
      for (std::size_t j = 0; j < limit; ++j) {
        if (d_[j] < -tol) {
          q = j;
          break;
        }
      }
      if (q == limit) return LpStatus::optimal;

      std::size_t r = m_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        if (t_[i][q] <= opt_.pivot_tol) continue;
        const double ratio = rhs_[i] / t_[i][q];
        const double eps = 1e-12 * (1.0 + std::abs(ratio));
        if (r == m_ || ratio < best - eps) {
          best = ratio;
          r = i;
        } else if (ratio <= best + eps && basis_[i] < basis_[r]) {
          best = std::min(best, ratio);
          r = i;
        }
      }
      if (r == m_) return LpStatus::unbounded;
      if (++pivots > opt_.max_pivots) return LpStatus::iteration_limit;
      pivot(r, q);
    }
  }

  void drive_out_artificials(std::size_t& pivots) {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < art_begin_) continue;
      std::size_t q = art_begin_;
      double best = 1e-9;
      for (std::size_t j = 0; j < art_begin_; ++j) {
        if (std::abs(t_[i][j]) > best) {
          best = std::abs(t_[i][j]);
          q = j;
        }
      }
      if (q == art_begin_) continue;  // redundant row; the artificial stays basic at zero
      rhs_[i] = 0.0;
      pivot(i, q);
      ++pivots;
    }
  }

  void certify(LpResult& res) const {
    double obj = 0.0;
    for (std::size_t j = 0; j < n_; ++j) obj += lp_.objective[j] * res.x[j];
    res.objective = obj;

    double dual_obj = 0.0, primal_res = 0.0, dual_res = 0.0;
    for (double v : res.x) primal_res = std::max(primal_res, -v);
    for (std::size_t i = 0; i < m_; ++i) {
      const auto& c = lp_.constraints[i];
      dual_obj += c.rhs * res.duals[i];
      double lhs = 0.0;
      for (std::size_t j = 0; j < n_; ++j) lhs += c.coeffs[j] * res.x[j];
      double viol = 0.0;
      if (c.sense == Sense::le) viol = lhs - c.rhs;
      if (c.sense == Sense::ge) viol = c.rhs - lhs;
      if (c.sense == Sense::eq) viol = std::abs(lhs - c.rhs);
      primal_res = std::max(primal_res, viol);
      // Sign conditions on the duals themselves.
      const double y = lp_.maximize ? res.duals[i] : -res.duals[i];
      if (c.sense == Sense::le) dual_res = std::max(dual_res, -y);
      if (c.sense == Sense::ge) dual_res = std::max(dual_res, y);
    }
    for (std::size_t j = 0; j < n_; ++j) {
      double red = lp_.objective[j];
      for (std::size_t i = 0; i < m_; ++i) red -= lp_.constraints[i].coeffs[j] * res.duals[i];
      dual_res = std::max(dual_res, lp_.maximize ? red : -red);
    }
    res.duality_gap = std::abs(obj - dual_obj);
    res.primal_residual = primal_res;
    res.dual_residual = dual_res;
  }

  const LinearProgram& lp_;
  SimplexOptions opt_;
  std::size_t m_ = 0, n_ = 0, cols_ = 0, art_begin_ = 0;
  std::vector<std::vector<double>> t_;
  std::vector<double> rhs_, cost_, d_, sign_;
  std::vector<std::size_t> basis_, unit_col_;
};

}  // namespace detail

inline LpResult simplex(const LinearProgram& lp, const SimplexOptions& opt = {}) {
  if (lp.objective.size() != lp.num_vars) throw Error("LP objective has wrong width");
  detail::Tableau tab(lp, opt);
  return tab.solve();
}

}  // namespace qswitch
