#include <gtest/gtest.h>

#include "tmap/error.hpp"
#include "tmap/sparsity.hpp"

using namespace tmap;
using Set = std::vector<std::size_t>;

TEST(DistanceSparsity, LineRadiusOne) {
  const auto s = distance_sparsity(line_distance, 5, 1.0);
  EXPECT_EQ(s.active[2], (Set{1, 2}));  // A_3 = {2, 3} in one-based labels
  EXPECT_EQ(s.active[0], (Set{0}));
}

TEST(DistanceSparsity, LargeRadiusIsDense) {
  const auto s = distance_sparsity(line_distance, 6, 6.0);
  for (std::size_t k = 0; k < 6; ++k) {
    ASSERT_EQ(s.active[k].size(), k + 1);
    for (std::size_t i = 0; i <= k; ++i) EXPECT_EQ(s.active[k][i], i);
  }
}

TEST(DistanceSparsity, CycleWrapsAround) {
  const auto s = distance_sparsity(cycle_distance(40), 40, 2.0);
  EXPECT_EQ(s.active[39], (Set{0, 1, 37, 38, 39}));
}

TEST(DistanceSparsity, NegativeRadius) {
  EXPECT_THROW(distance_sparsity(line_distance, 3, -1.0), ArgumentError);
}

TEST(GraphSparsity, EmptyGraphIsDiagonal) {
  const auto s = graph_sparsity(UndirectedGraph(4));
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(s.active[k], (Set{k}));
}

TEST(GraphSparsity, CompleteGraphIsDense) {
  UndirectedGraph g(5);
  for (std::size_t a = 0; a < 5; ++a)
    for (std::size_t b = a + 1; b < 5; ++b) g.add_edge(a, b);
  const auto s = graph_sparsity(g);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(s.active[k].size(), k + 1);
}

TEST(GraphSparsity, FiveNodeMarginalGraphs) {
  // Edges 3-1, 3-2, 3-4, 3-5, 4-5 in one-based labels.
  const UndirectedGraph g(5, {{2, 0}, {2, 1}, {2, 3}, {2, 4}, {3, 4}});
  const auto s = graph_sparsity(g);
  EXPECT_EQ(s.active[4], (Set{2, 3, 4}));
  EXPECT_EQ(s.active[3], (Set{2, 3}));
  EXPECT_EQ(s.active[2], (Set{0, 1, 2}));
  EXPECT_EQ(s.active[1], (Set{0, 1}));
  EXPECT_EQ(s.active[0], (Set{0}));
}

TEST(GraphSparsity, ChainIsBidiagonal) {
  UndirectedGraph g(6);
  for (std::size_t i = 0; i + 1 < 6; ++i) g.add_edge(i, i + 1);
  const auto s = graph_sparsity(g);
  EXPECT_EQ(s.active[0], (Set{0}));
  for (std::size_t k = 1; k < 6; ++k) EXPECT_EQ(s.active[k], (Set{k - 1, k}));
}

TEST(Graph, RejectsSelfLoopsAndKeepsSymmetry) {
  UndirectedGraph g(3);
  EXPECT_THROW(g.add_edge(1, 1), ArgumentError);
  EXPECT_THROW(g.add_edge(0, 3), ArgumentError);
  g.add_edge(0, 2);
  EXPECT_TRUE(g.has_edge(2, 0));
  EXPECT_EQ(g.edge_count(), 1u);
}

TEST(Sparsity, DataSlots) {
  auto base = distance_sparsity(line_distance, 3, 1.0, 2);
  const auto first = with_data_slots(base, 1, false);
  EXPECT_EQ(first.active[0], (Set{0, 1}));
  EXPECT_EQ(first.active[1], (Set{1, 2}));
  EXPECT_NO_THROW(first.validate());
  const auto all = with_data_slots(base, 1, true);
  EXPECT_EQ(all.active[1], (Set{0, 1, 2}));
  EXPECT_EQ(all.active[2], (Set{2, 3}));  // beyond the cutoff: no data
  EXPECT_TRUE(all.is_identity(2));
}

TEST(Sparsity, ValidateCatchesMissingDiagonal) {
  SparsityPattern s;
  s.active = {{0}, {0}};
  EXPECT_THROW(s.validate(), ArgumentError);
}
