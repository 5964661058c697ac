#pragma once

// Parameter sweeps over the reference chain and their CSV form.

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <future>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "qswitch/refchain.hpp"

namespace qswitch {

/// Shortest round-trip decimal form; locale independent.
inline std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf, end);
}

enum class MuRuleKind { fraction, explicit_values };

/// How mu is derived from lambda at each grid point.
struct MuRule {
  MuRuleKind kind = MuRuleKind::fraction;
  double fraction = 0.05;             // mu = fraction * lambda
  std::vector<double> values;         // explicit mu values, crossed with lambda

  static MuRule times_lambda(double f) { return MuRule{MuRuleKind::fraction, f, {}}; }
  static MuRule list(std::vector<double> v) { return MuRule{MuRuleKind::explicit_values, 0.0, std::move(v)}; }

  std::string label() const {
    if (kind == MuRuleKind::fraction) return format_number(fraction) + "*lambda";
    return "explicit";
  }
};

struct SweepSpec {
  std::vector<double> lambda_grid;
  std::vector<MuRule> mu_rules;
  std::vector<int> b_grid;
  std::vector<Variant> variants;

  /// lambda in {0.1..0.5}, mu in {0.05, 0.1} * lambda, B in 5..25, both variants.
  static SweepSpec paper_grid() {
    SweepSpec s;
    s.lambda_grid = {0.1, 0.2, 0.3, 0.4, 0.5};
    s.mu_rules = {MuRule::times_lambda(0.05), MuRule::times_lambda(0.1)};
    for (int b = 5; b <= 25; ++b) s.b_grid.push_back(b);
    s.variants = {Variant::alg1, Variant::alg2};
    return s;
  }
};

inline void check_sweep(const SweepSpec& s) {
  if (s.lambda_grid.empty() || s.mu_rules.empty() || s.b_grid.empty() || s.variants.empty())
    throw Error("sweep grids must be nonempty");
  for (double l : s.lambda_grid)
    if (!(l >= 0.0 && l <= 1.0)) throw Error("lambda grid values must lie in [0,1]");
  for (int b : s.b_grid)
    if (b < 1) throw Error("buffer grid values must be >= 1");
  for (const auto& r : s.mu_rules) {
    if (r.kind == MuRuleKind::explicit_values && r.values.empty()) throw Error("explicit mu rule needs values");
    for (double m : r.values)
      if (!(m >= 0.0 && m <= 1.0)) throw Error("mu values must lie in [0,1]");
    if (r.kind == MuRuleKind::fraction && !(r.fraction >= 0.0)) throw Error("mu fraction must be nonnegative");
  }
}

struct SweepRow {
  double lambda = 0.0;
  double mu = 0.0;
  int buffer = 0;
  Variant variant = Variant::alg1;
  std::string mu_rule;
  double p_serve = 0.0;
  double availability = 0.0;   // C^B
  double gamma = 0.0;          // (2C - 1)^+
  double guarantee = 0.0;      // gamma for alg1, (2/3) gamma for alg2
  double gamma_product = 0.0;  // C^2, the product-form reading
};

/// Worker count from QSWITCH_WORKERS, else hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("QSWITCH_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned workers = worker_count()) {
  check_sweep(spec);
  std::vector<SweepRow> jobs;
  for (Variant var : spec.variants)
    for (const auto& rule : spec.mu_rules)
      for (double lam : spec.lambda_grid) {
        std::vector<double> mus = rule.kind == MuRuleKind::fraction ? std::vector<double>{rule.fraction * lam}
                                                                     : rule.values;
        for (double mu : mus)
          for (int b : spec.b_grid) {
            SweepRow r;
            r.lambda = lam;
            r.mu = mu;
            r.buffer = b;
            r.variant = var;
            r.mu_rule = rule.label();
            r.p_serve = service_attempt_probability(lam, var);
            jobs.push_back(r);
          }
      }

  auto evaluate = [&jobs](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < jobs.size(); i += stride) {
      SweepRow& r = jobs[i];
      r.availability = availability({r.lambda, r.mu, r.p_serve, r.buffer});
      r.gamma = single_node_gamma(r.availability);
      r.guarantee = r.variant == Variant::alg1 ? r.gamma : 2.0 / 3.0 * r.gamma;
      r.gamma_product = r.availability * r.availability;
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(jobs.size())));
  std::vector<std::future<void>> pool;
  for (unsigned w = 1; w < workers; ++w) pool.push_back(std::async(std::launch::async, evaluate, w, workers));
  evaluate(0, workers);
  for (auto& f : pool) f.get();

  std::stable_sort(jobs.begin(), jobs.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.variant, a.mu_rule, a.lambda, a.mu, a.buffer) <
           std::tie(b.variant, b.mu_rule, b.lambda, b.mu, b.buffer);
  });
  return jobs;
}

inline constexpr const char* kSweepCsvHeader = "lambda,mu,B,variant,C,gamma,guarantee,gamma_product,mu_rule,p_serve";

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kSweepCsvHeader << '\n';
  for (const auto& r : rows) {
    os << format_number(r.lambda) << ',' << format_number(r.mu) << ',' << r.buffer << ',' << to_string(r.variant)
       << ',' << format_number(r.availability) << ',' << format_number(r.gamma) << ','
       << format_number(r.guarantee) << ',' << format_number(r.gamma_product) << ',' << r.mu_rule << ','
       << format_number(r.p_serve) << '\n';
  }
}

struct VariantComparison {
  double lambda = 0.0;
  double mu = 0.0;
  int buffer = 0;
  double alg1 = 0.0;        // Gamma
  double alg2 = 0.0;        // (2/3) Gamma'
  double difference = 0.0;  // alg1 - alg2
};

struct ComparisonReport {
  std::vector<VariantComparison> points;
  std::size_t alg1_dominates = 0;
  std::size_t ties = 0;
  double dominance_fraction = 0.0;  // strict alg1 > alg2, over all points
};

/// Pairs alg1/alg2 rows on (lambda, mu, B) and compares their guarantees.
inline ComparisonReport compare_variants(const std::vector<SweepRow>& rows, double tie_tol = 1e-12) {
  std::map<std::tuple<double, double, int>, std::pair<const SweepRow*, const SweepRow*>> paired;
  for (const auto& r : rows) {
    auto& slot = paired[{r.lambda, r.mu, r.buffer}];
    (r.variant == Variant::alg1 ? slot.first : slot.second) = &r;
  }
  ComparisonReport rep;
  for (const auto& [key, pr] : paired) {
    if (!pr.first || !pr.second) throw Error("compare_variants: missing variant rows");
    VariantComparison c;
    std::tie(c.lambda, c.mu, c.buffer) = key;
    c.alg1 = pr.first->guarantee;
    c.alg2 = pr.second->guarantee;
    c.difference = c.alg1 - c.alg2;
    if (std::abs(c.difference) <= tie_tol)
      ++rep.ties;
    else if (c.difference > 0.0)
      ++rep.alg1_dominates;
    rep.points.push_back(c);
  }
  if (rep.points.empty()) throw Error("compare_variants: empty dataset");
  rep.dominance_fraction = static_cast<double>(rep.alg1_dominates) / static_cast<double>(rep.points.size());
  return rep;
}

inline void write_comparison_csv(std::ostream& os, const ComparisonReport& rep) {
  os << "lambda,mu,B,alg1_gamma,alg2_guarantee,difference\n";
  for (const auto& c : rep.points)
    os << format_number(c.lambda) << ',' << format_number(c.mu) << ',' << c.buffer << ',' << format_number(c.alg1)
       << ',' << format_number(c.alg2) << ',' << format_number(c.difference) << '\n';
}

inline void write_convergence_csv(std::ostream& os, const std::vector<std::pair<SweepRow, ConvergenceProfile>>& profiles) {
  os << "lambda,mu,variant,mu_rule,B,C,gap,B_ref,log_slope,r_squared\n";
  for (const auto& [key, prof] : profiles)
    for (const auto& p : prof.points)
      os << format_number(key.lambda) << ',' << format_number(key.mu) << ',' << to_string(key.variant) << ','
         << key.mu_rule << ',' << p.buffer << ',' << format_number(p.availability) << ',' << format_number(p.gap)
         << ',' << prof.reference_buffer << ',' << format_number(prof.log_slope) << ','
         << format_number(prof.r_squared) << '\n';
}

}  // namespace qswitch
