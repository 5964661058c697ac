#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "qswitch/experiments.hpp"

using namespace qswitch;

namespace {

SweepSpec small_spec() {
  SweepSpec s;
  s.lambda_grid = {0.2, 0.4};
  s.mu_rules = {MuRule::times_lambda(0.1)};
  s.b_grid = {5, 10};
  s.variants = {Variant::alg1, Variant::alg2};
  return s;
}

}  // namespace

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.3), "0.3");
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(0.1 * 0.05), "0.005000000000000001");
  EXPECT_EQ(std::stod(format_number(2.0 / 3.0)), 2.0 / 3.0);
}

TEST(Sweep, PaperGridRowCount) {
  const SweepSpec s = SweepSpec::paper_grid();
  EXPECT_EQ(run_sweep(s).size(), 2u * 5u * 2u * 21u);
}

TEST(Sweep, RowsCarryConsistentValues) {
  for (const auto& r : run_sweep(small_spec())) {
    EXPECT_DOUBLE_EQ(r.mu, 0.1 * r.lambda);
    EXPECT_DOUBLE_EQ(r.p_serve, service_attempt_probability(r.lambda, r.variant));
    EXPECT_DOUBLE_EQ(r.availability, availability({r.lambda, r.mu, r.p_serve, r.buffer}));
    EXPECT_DOUBLE_EQ(r.gamma, std::max(0.0, 2 * r.availability - 1));
    EXPECT_DOUBLE_EQ(r.guarantee, r.variant == Variant::alg1 ? r.gamma : 2.0 / 3.0 * r.gamma);
    EXPECT_EQ(r.mu_rule, "0.1*lambda");
  }
}

TEST(Sweep, ZeroLambdaGivesZeroGamma) {
  SweepSpec s = small_spec();
  s.lambda_grid = {0.0};
  for (const auto& r : run_sweep(s)) {
    EXPECT_EQ(r.availability, 0.0);
    EXPECT_EQ(r.gamma, 0.0);
  }
}

TEST(Sweep, GammaNonDecreasingInBuffer) {
  const auto rows = run_sweep(SweepSpec::paper_grid());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto &a = rows[i - 1], &b = rows[i];
    if (a.variant == b.variant && a.lambda == b.lambda && a.mu == b.mu) {
      EXPECT_LT(a.buffer, b.buffer);
      EXPECT_LE(a.gamma, b.gamma);
      EXPECT_LE(a.availability, b.availability);
    }
  }
}

TEST(Sweep, OutputIndependentOfWorkerCount) {
  const SweepSpec s = SweepSpec::paper_grid();
  std::ostringstream one, many;
  write_sweep_csv(one, run_sweep(s, 1));
  write_sweep_csv(many, run_sweep(s, 4));
  EXPECT_EQ(one.str(), many.str());
}

TEST(Sweep, ExplicitMuValues) {
  SweepSpec s = small_spec();
  s.mu_rules = {MuRule::list({0.01, 0.02})};
  const auto rows = run_sweep(s);
  EXPECT_EQ(rows.size(), 2u * 2u * 2u * 2u);
  EXPECT_EQ(rows.front().mu_rule, "explicit");
}

TEST(Sweep, InvalidSpecsRejected) {
  SweepSpec s = small_spec();
  s.b_grid = {0};
  EXPECT_THROW(run_sweep(s), Error);
  s = small_spec();
  s.lambda_grid = {};
  EXPECT_THROW(run_sweep(s), Error);
  s = small_spec();
  s.lambda_grid = {1.2};
  EXPECT_THROW(run_sweep(s), Error);
  s = small_spec();
  s.mu_rules = {MuRule::list({})};
  EXPECT_THROW(run_sweep(s), Error);
}

TEST(SweepCsv, HeaderAndShape) {
  std::ostringstream os;
  write_sweep_csv(os, run_sweep(small_spec()));
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "lambda,mu,B,variant,C,gamma,guarantee,gamma_product,mu_rule,p_serve");
  int rows = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 9);
    ++rows;
  }
  EXPECT_EQ(rows, 8);
}

TEST(Compare, PaperGridDominance) {
  const ComparisonReport rep = compare_variants(run_sweep(SweepSpec::paper_grid()));
  EXPECT_EQ(rep.points.size(), 5u * 2u * 21u);
  for (const auto& c : rep.points) EXPECT_DOUBLE_EQ(c.difference, c.alg1 - c.alg2);
  // Frozen from the sweep itself.
  EXPECT_EQ(rep.alg1_dominates, rep.points.size());
  EXPECT_EQ(rep.dominance_fraction, 1.0);
}

TEST(Compare, IdenticalInputsTie) {
  SweepRow a;
  a.lambda = 0.3;
  a.mu = 0.03;
  a.buffer = 5;
  a.guarantee = 0.4;
  SweepRow b = a;
  b.variant = Variant::alg2;
  const auto rep = compare_variants({a, b});
  EXPECT_EQ(rep.ties, 1u);
  EXPECT_EQ(rep.points[0].difference, 0.0);
  EXPECT_EQ(rep.dominance_fraction, 0.0);
}

TEST(Compare, ZeroLambdaTies) {
  SweepSpec s = small_spec();
  s.lambda_grid = {0.0};
  const auto rep = compare_variants(run_sweep(s));
  EXPECT_EQ(rep.ties, rep.points.size());
}

TEST(Compare, MissingVariantRejected) {
  SweepSpec s = small_spec();
  s.variants = {Variant::alg1};
  EXPECT_THROW(compare_variants(run_sweep(s)), Error);
}

TEST(Workers, EnvironmentOverride) {
  setenv("QSWITCH_WORKERS", "3", 1);
  EXPECT_EQ(worker_count(), 3u);
  setenv("QSWITCH_WORKERS", "junk", 1);
  EXPECT_GE(worker_count(), 1u);
  unsetenv("QSWITCH_WORKERS");
}
