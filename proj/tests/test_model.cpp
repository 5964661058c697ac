#include <gtest/gtest.h>

#include <algorithm>
#include <string>

#include "oracles.hpp"
#include "qswitch/model.hpp"

using namespace qswitch;

namespace {

RawInstance triangle_raw() {
  RawInstance raw;
  raw.vertices = {"a", "b", "c"};
  raw.edges = {{"a", "b"}, {"b", "c"}, {"c", "a"}};
  for (const auto& v : raw.vertices) raw.node_params[v] = {0.3, 0.03, 10};
  for (const auto& [u, v] : raw.edges) raw.edge_demand.push_back({u, v, 0.05, std::nullopt, "bernoulli"});
  return raw;
}

bool mentions(const ValidationError& e, const std::string& needle) {
  return std::any_of(e.issues().begin(), e.issues().end(),
                     [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

std::vector<std::string> issues_of(const RawInstance& raw) {
  try {
    validate_instance(raw);
  } catch (const ValidationError& e) {
    return e.issues();
  }
  return {};
}

}  // namespace

TEST(ValidateInstance, TriangleIsValid) {
  const SwitchInstance g = validate_instance(triangle_raw());
  EXPECT_EQ(g.num_vertices(), 3u);
  EXPECT_EQ(g.num_edges(), 3u);
  for (const auto& n : g.nodes()) {
    EXPECT_DOUBLE_EQ(n.lambda, 0.3);
    EXPECT_DOUBLE_EQ(n.mu, 0.03);
    EXPECT_EQ(n.buffer, 10);
  }
  for (const auto& d : g.demands()) {
    EXPECT_DOUBLE_EQ(d.nu, 0.05);
    EXPECT_DOUBLE_EQ(d.sigma2, 0.05 * 0.95);
  }
}

TEST(ValidateInstance, EdgesAreCanonicallySorted) {
  const SwitchInstance g = validate_instance(triangle_raw());
  // (c,a) is stored as (a,c) and sorts before (b,c).
  EXPECT_EQ(g.edge_label(0), "a-b");
  EXPECT_EQ(g.edge_label(1), "a-c");
  EXPECT_EQ(g.edge_label(2), "b-c");
  EXPECT_EQ(g.find_edge("c", "a"), std::optional<EdgeId>(1));
}

TEST(ValidateInstance, SelfLoop) {
  RawInstance raw = triangle_raw();
  raw.edges.push_back({"a", "a"});
  try {
    validate_instance(raw);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_TRUE(mentions(e, "self-loop"));
  }
}

TEST(ValidateInstance, LambdaOutOfRange) {
  RawInstance raw = triangle_raw();
  raw.node_params["a"].lambda = 1.2;
  try {
    validate_instance(raw);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_TRUE(mentions(e, "lambda out of range"));
  }
}

TEST(ValidateInstance, ReportsEveryViolation) {
  RawInstance raw = triangle_raw();
  raw.node_params["a"].lambda = -0.1;
  raw.node_params["b"].mu = 2.0;
  raw.node_params["c"].buffer = 0;
  raw.edges.push_back({"a", "b"});
  raw.edges.push_back({"a", "z"});
  const auto issues = issues_of(raw);
  auto has = [&](const std::string& s) {
    return std::any_of(issues.begin(), issues.end(), [&](const std::string& i) { return i.find(s) != std::string::npos; });
  };
  EXPECT_TRUE(has("lambda out of range"));
  EXPECT_TRUE(has("mu out of range"));
  EXPECT_TRUE(has("buffer < 1"));
  EXPECT_TRUE(has("duplicate edge"));
  EXPECT_TRUE(has("dangling endpoint"));
  EXPECT_GE(issues.size(), 5u);
}

TEST(ValidateInstance, BernoulliMeanAboveOneRejected) {
  RawInstance raw = triangle_raw();
  raw.edge_demand[0].nu = 1.5;
  EXPECT_THROW(validate_instance(raw), ValidationError);
  raw.edge_demand[0].kind = "poisson";
  const SwitchInstance g = validate_instance(raw);
  EXPECT_DOUBLE_EQ(g.demand(*g.find_edge("a", "b")).sigma2, 1.5);
}

TEST(ValidateInstance, NegativeVarianceRejected) {
  RawInstance raw = triangle_raw();
  raw.edge_demand[0].sigma2 = -1.0;
  EXPECT_THROW(validate_instance(raw), ValidationError);
}

TEST(ValidateInstance, UnknownArrivalKindRejected) {
  RawInstance raw = triangle_raw();
  raw.edge_demand[0].kind = "geometric";
  EXPECT_THROW(validate_instance(raw), ValidationError);
}

TEST(ValidateInstance, MissingDemandDefaultsToZero) {
  RawInstance raw = triangle_raw();
  raw.edge_demand.clear();
  const SwitchInstance g = validate_instance(raw);
  for (const auto& d : g.demands()) EXPECT_EQ(d.nu, 0.0);
}

TEST(IsMatching, Examples) {
  const SwitchInstance g = validate_instance(triangle_raw());
  const EdgeId ab = *g.find_edge("a", "b"), bc = *g.find_edge("b", "c");
  EXPECT_TRUE(is_matching(g, std::vector<EdgeId>{ab}));
  EXPECT_FALSE(is_matching(g, std::vector<EdgeId>{ab, bc}));
  EXPECT_TRUE(is_matching(g, std::vector<EdgeId>{}));
}

TEST(IsMatching, UnknownEdgeThrows) {
  const SwitchInstance g = validate_instance(triangle_raw());
  EXPECT_THROW(is_matching(g, std::vector<EdgeId>{7}), Error);
}

TEST(IsMatching, AgreesWithPairwiseCheckOnAllSubsets) {
  // Path a-b-c-d plus chord a-c: five edges, 32 subsets.
  const SwitchInstance g = oracle::instance_from_pairs(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {2, 3}});
  const auto edges = oracle::edges_of(g);
  for (std::uint64_t mask = 0; mask < 32; ++mask) {
    std::vector<EdgeId> s;
    for (EdgeId e = 0; e < 5; ++e)
      if (mask >> e & 1) s.push_back(e);
    EXPECT_EQ(is_matching(g, s), oracle::disjoint(edges, mask)) << mask;
  }
}

TEST(Matching, ConstructorSortsAndDeduplicates) {
  Matching m({3, 1, 3});
  EXPECT_EQ(m.edges, (std::vector<EdgeId>{1, 3}));
  EXPECT_TRUE(m.contains(1));
  EXPECT_FALSE(m.contains(2));
}

TEST(EdgeVector, RejectsNegativeAndNonFinite) {
  const SwitchInstance g = validate_instance(triangle_raw());
  EXPECT_NO_THROW(check_edge_vector(g, FractionalEdgeVector({0.1, 0.2, 0.3})));
  EXPECT_THROW(check_edge_vector(g, FractionalEdgeVector({0.1, -0.2, 0.3})), Error);
  EXPECT_THROW(check_edge_vector(g, FractionalEdgeVector({0.1, NAN, 0.3})), Error);
  EXPECT_THROW(check_edge_vector(g, FractionalEdgeVector({0.1, 0.2})), Error);
}
