#include <gtest/gtest.h>

#include <set>

#include "dsm/error.hpp"
#include "dsm/graph.hpp"

namespace dsm {
namespace {

std::vector<int> degrees(const Topology& t) {
  std::vector<int> out;
  for (int i = 0; i < t.num_agents(); ++i) out.push_back(t.degree(i));
  return out;
}

TEST(Ring, EightAgentsHaveEightEdgesOfDegreeTwo) {
  const Topology t = build_ring(8);
  EXPECT_EQ(t.edges().size(), 8u);
  EXPECT_EQ(degrees(t), std::vector<int>(8, 2));
}

TEST(Ring, TwoAgentsShareOneEdge) {
  const Topology t = build_ring(2);
  EXPECT_EQ(t.edges(), (std::vector<Edge>{{0, 1}}));
  EXPECT_EQ(degrees(t), (std::vector<int>{1, 1}));
}

TEST(Ring, FiveCycleEnumeratedByHand) {
  const Topology t = build_ring(5);
  const std::set<Edge> got(t.edges().begin(), t.edges().end());
  const std::set<Edge> want{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}};
  EXPECT_EQ(got, want);
}

TEST(Complete, EdgeCountsAndDegrees) {
  EXPECT_EQ(build_complete(2).edges().size(), 1u);
  EXPECT_EQ(build_complete(4).edges().size(), 6u);
  EXPECT_EQ(degrees(build_complete(3)), (std::vector<int>{2, 2, 2}));
  EXPECT_EQ(build_complete(2), build_ring(2));
}

TEST(RandomConnected, ZeroProbabilityGivesSpanningTree) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Topology t = build_random_connected(4, 0.0, seed);
    EXPECT_EQ(t.edges().size(), 3u);
    EXPECT_TRUE(is_connected(t));
  }
}

TEST(RandomConnected, UnitProbabilityGivesCompleteGraph) {
  EXPECT_EQ(build_random_connected(4, 1.0, 3), build_complete(4));
}

TEST(RandomConnected, SameSeedSameEdges) {
  EXPECT_EQ(build_random_connected(12, 0.3, 99), build_random_connected(12, 0.3, 99));
}

TEST(RandomConnected, EveryDrawIsConnected) {
  for (int d = 2; d <= 32; ++d)
    for (std::uint64_t seed = 0; seed < 5; ++seed)
      EXPECT_TRUE(is_connected(build_random_connected(d, 0.1, seed))) << d << " " << seed;
}

TEST(RandomConnected, RejectsBadProbability) {
  EXPECT_THROW(build_random_connected(4, 1.5, 0), InvalidParameter);
  EXPECT_THROW(build_random_connected(4, -0.1, 0), InvalidParameter);
}

TEST(IsConnected, Examples) {
  EXPECT_TRUE(is_connected(build_ring(5)));
  EXPECT_TRUE(is_connected(build_complete(4)));
  EXPECT_FALSE(is_connected(Topology::from_edges(3, {{0, 1}})));
}

TEST(FromEdges, RejectsMalformedEdges) {
  EXPECT_THROW(Topology::from_edges(3, {{0, 3}}), InvalidTopology);
  EXPECT_THROW(Topology::from_edges(3, {{1, 1}}), InvalidTopology);
  EXPECT_THROW(Topology::from_edges(3, {{0, 1}, {1, 0}}), InvalidTopology);
}

TEST(FromEdges, EdgesAreSymmetric) {
  const Topology t = Topology::from_edges(4, {{2, 0}, {3, 1}});
  EXPECT_TRUE(t.has_edge(0, 2));
  EXPECT_TRUE(t.has_edge(2, 0));
  EXPECT_FALSE(t.has_edge(0, 1));
  for (int i = 0; i < 4; ++i)
    for (int j : t.neighbors(i)) EXPECT_TRUE(t.has_edge(j, i));
}

TEST(BuilderDegrees, DegreeSumIsTwiceEdgeCount) {
  for (int d = 2; d <= 16; ++d) {
    for (const Topology& t : {build_ring(d), build_complete(d), build_random_connected(d, 0.4, d)}) {
      int sum = 0;
      for (int deg : degrees(t)) sum += deg;
      EXPECT_EQ(sum, 2 * static_cast<int>(t.edges().size()));
    }
  }
}

TEST(TopologyJson, OneBasedEdgeListIsTranslated) {
  const Topology t = topology_from_json(
      {{"kind", "edges"}, {"d", 3}, {"index_base", 1}, {"edges", {{1, 2}, {2, 3}}}});
  EXPECT_EQ(t, Topology::from_edges(3, {{0, 1}, {1, 2}}));
}

TEST(TopologyJson, RoundTrips) {
  const Topology t = build_random_connected(9, 0.3, 4);
  EXPECT_EQ(topology_from_json(topology_to_json(t)), t);
  EXPECT_EQ(topology_from_json({{"kind", "ring"}, {"d", 6}}), build_ring(6));
  EXPECT_EQ(topology_from_json({{"kind", "random"}, {"d", 6}, {"edge_prob", 0.2}, {"seed", 5}}),
            build_random_connected(6, 0.2, 5));
}

}  // namespace
}  // namespace dsm
