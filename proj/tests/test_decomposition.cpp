#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qswitch/decomposition.hpp"

using namespace qswitch;

namespace {

SwitchInstance triangle() { return oracle::instance_from_pairs(3, {{0, 1}, {0, 2}, {1, 2}}); }

double mass_of(const MatchingMixture& mix, const Matching& m) {
  double s = 0.0;
  for (const auto& a : mix.atoms)
    if (a.matching == m) s += a.p;
  return s;
}

bool exhaustive_feasible(const SwitchInstance& g, const FractionalEdgeVector& x) {
  const auto ms = enumerate_matchings(g);
  LinearProgram lp(ms.size(), std::vector<double>(ms.size(), 0.0));
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    std::vector<double> row(ms.size(), 0.0);
    for (std::size_t j = 0; j < ms.size(); ++j) row[j] = ms[j].contains(e) ? 1.0 : 0.0;
    lp.add(row, Sense::eq, x[e]);
  }
  lp.add(std::vector<double>(ms.size(), 1.0), Sense::eq, 1.0);
  return simplex(lp).status == LpStatus::optimal;
}

void expect_valid(const SwitchInstance& g, const FractionalEdgeVector& x, const DecompositionResult& r) {
  EXPECT_LE(r.max_error, 1e-9);
  EXPECT_NEAR(r.mixture.total_probability(), 1.0, 1e-9);
  EXPECT_LE(r.mixture.atoms.size(), g.num_edges() + 1);
  EXPECT_LE(r.columns, std::max<std::size_t>(1, 10 * g.num_edges()));
  for (const auto& a : r.mixture.atoms) {
    EXPECT_GE(a.p, 1e-12);
    EXPECT_TRUE(is_matching(g, a.matching));
  }
  const FractionalEdgeVector rec = edge_marginals(g, r.mixture);
  for (EdgeId e = 0; e < g.num_edges(); ++e) EXPECT_NEAR(rec[e], x[e], 1e-9);
}

}  // namespace

TEST(Decompose, SingleEdgeHalf) {
  const SwitchInstance g = oracle::instance_from_pairs(2, {{0, 1}});
  const auto r = decompose(g, FractionalEdgeVector({0.5}));
  expect_valid(g, FractionalEdgeVector({0.5}), r);
  EXPECT_NEAR(mass_of(r.mixture, Matching({0})), 0.5, 1e-12);
  EXPECT_NEAR(mass_of(r.mixture, Matching()), 0.5, 1e-12);
}

TEST(Decompose, PathHalfHalf) {
  const SwitchInstance g = oracle::instance_from_pairs(3, {{0, 1}, {1, 2}});
  const FractionalEdgeVector x({0.5, 0.5});
  const auto r = decompose(g, x);
  expect_valid(g, x, r);
  EXPECT_NEAR(mass_of(r.mixture, Matching({0})), 0.5, 1e-12);
  EXPECT_NEAR(mass_of(r.mixture, Matching({1})), 0.5, 1e-12);
  EXPECT_NEAR(mass_of(r.mixture, Matching()), 0.0, 1e-12);
}

TEST(Decompose, TriangleThirds) {
  const SwitchInstance g = triangle();
  const FractionalEdgeVector x({1.0 / 3, 1.0 / 3, 1.0 / 3});
  const auto r = decompose(g, x);
  expect_valid(g, x, r);
  for (EdgeId e = 0; e < 3; ++e) EXPECT_NEAR(mass_of(r.mixture, Matching({e})), 1.0 / 3, 1e-12);
}

TEST(Decompose, TriangleHalfRejected) {
  try {
    decompose(triangle(), FractionalEdgeVector({0.5, 0.5, 0.5}));
    FAIL();
  } catch (const DecompositionError& e) {
    EXPECT_EQ(e.kind(), DecompositionError::Kind::infeasible_master);
    EXPECT_NE(std::string(e.what()).find("infeasible master at termination"), std::string::npos);
  }
}

TEST(Decompose, ZeroVectorIsPointMassOnEmpty) {
  const SwitchInstance g = triangle();
  const auto r = decompose(g, FractionalEdgeVector::zeros(3));
  ASSERT_EQ(r.mixture.atoms.size(), 1u);
  EXPECT_TRUE(r.mixture.atoms[0].matching.empty());
  EXPECT_EQ(r.mixture.atoms[0].p, 1.0);
}

TEST(Decompose, ColumnCapReported) {
  // 4-cycle needs the two perfect matchings; a cap of one column per edge
  // leaves no room to price them in.
  const SwitchInstance g = oracle::instance_from_pairs(4, {{0, 1}, {0, 3}, {1, 2}, {2, 3}});
  DecompositionOptions opt;
  opt.column_cap_factor = 1.25;
  try {
    decompose(g, FractionalEdgeVector({0.5, 0.5, 0.5, 0.5}), opt);
    FAIL();
  } catch (const DecompositionError& e) {
    EXPECT_EQ(e.kind(), DecompositionError::Kind::iteration_cap);
    EXPECT_EQ(std::string(e.what()), "iteration cap exceeded");
  }
}

TEST(Decompose, RandomMixturesReconstruct) {
  std::mt19937_64 rng(2024);
  std::exponential_distribution<double> ex(1.0);
  for (int trial = 0; trial < 150; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 6);
    const SwitchInstance g = oracle::instance_from_pairs(n, oracle::random_graph(rng, n, 0.6, 8));
    const auto ms = enumerate_matchings(g);
    const std::size_t k = 1 + rng() % ms.size();
    std::vector<double> x(g.num_edges(), 0.0);
    double tot = 0.0;
    std::vector<std::pair<double, std::size_t>> picks;
    for (std::size_t i = 0; i < k; ++i) {
      const double p = ex(rng);
      picks.push_back({p, rng() % ms.size()});
      tot += p;
    }
    for (auto [p, j] : picks)
      for (EdgeId e : ms[j].edges) x[e] += p / tot;
    const FractionalEdgeVector fx(x);
    const auto r = decompose(g, fx);
    expect_valid(g, fx, r);
    EXPECT_LE(r.columns, ms.size());
  }
}

TEST(Decompose, SucceedsIffExhaustiveLpFeasible) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 0.6);
  int feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 4);
    const SwitchInstance g = oracle::instance_from_pairs(n, oracle::random_graph(rng, n, 0.7, 8));
    if (g.num_edges() == 0) continue;
    std::vector<double> x(g.num_edges());
    for (auto& v : x) v = u(rng);
    const FractionalEdgeVector fx(x);
    const bool expected = exhaustive_feasible(g, fx);
    bool ok = true;
    try {
      expect_valid(g, fx, decompose(g, fx));
    } catch (const DecompositionError& e) {
      ok = false;
      EXPECT_EQ(e.kind(), DecompositionError::Kind::infeasible_master);
    }
    EXPECT_EQ(ok, expected);
    (expected ? feasible : infeasible)++;
  }
  EXPECT_GT(feasible, 10);
  EXPECT_GT(infeasible, 10);
}

TEST(Sampler, DegenerateMixture) {
  const auto mix = MatchingMixture::point_mass(Matching({2}));
  RandomStream rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_matching(mix, rng), Matching({2}));
}

TEST(Sampler, FairCoinWithinHoeffdingBand) {
  MatchingMixture mix{{{0.5, Matching({0})}, {0.5, Matching({1})}}};
  MixtureSampler s(mix);
  RandomStream rng = RandomStream::derive(5, StreamPurpose::test, 0);
  int a = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) a += s.sample(rng) == Matching({0});
  EXPECT_NEAR(static_cast<double>(a) / n, 0.5, 0.01);
}

TEST(Sampler, ConsumesOneDrawPerSample) {
  MatchingMixture mix{{{0.3, Matching({0})}, {0.7, Matching({1})}}};
  RandomStream a(77), b(77);
  sample_matching(mix, a);
  b.uniform();
  EXPECT_EQ(a.uniform(), b.uniform());
}

TEST(Sampler, EdgeMarginalsMatchX) {
  const SwitchInstance g = oracle::instance_from_pairs(4, {{0, 1}, {0, 2}, {1, 2}, {2, 3}});
  const FractionalEdgeVector x({0.2, 0.25, 0.15, 0.4});
  const auto r = decompose(g, x);
  MixtureSampler s(r.mixture);
  RandomStream rng = RandomStream::derive(9, StreamPurpose::test, 1);
  const int n = 200000;
  std::vector<int> hits(4, 0);
  for (int i = 0; i < n; ++i)
    for (EdgeId e : s.sample(rng).edges) ++hits[e];
  for (EdgeId e = 0; e < 4; ++e) {
    const double sigma = std::sqrt(x[e] * (1 - x[e]) / n);
    EXPECT_NEAR(static_cast<double>(hits[e]) / n, x[e], 3 * sigma) << e;
  }
}
