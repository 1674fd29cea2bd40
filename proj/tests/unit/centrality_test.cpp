#include <gtest/gtest.h>

#include "hibpool/centrality.hpp"
#include "test_support.hpp"

using namespace hibpool;
using namespace hibpool::testing;

namespace {

const Graph kTriangle = Graph::structure(3, {{0, 1}, {1, 2}, {0, 2}});
const Graph kStar = Graph::structure(4, {{0, 1}, {0, 2}, {0, 3}});

}  // namespace

TEST(Degree, Examples) {
  EXPECT_EQ(degree_centrality(kTriangle), (std::vector<double>{2, 2, 2}));
  EXPECT_EQ(degree_centrality(kStar), (std::vector<double>{3, 1, 1, 1}));
  EXPECT_EQ(degree_centrality(Graph::structure(1, {})), (std::vector<double>{0}));
}

TEST(Clustering, Examples) {
  EXPECT_DOUBLE_EQ(clustering_coefficient(kTriangle)[0], 1.0);
  EXPECT_DOUBLE_EQ(clustering_coefficient(path_graph(3))[1], 0.0);
  const Graph one_link = Graph::structure(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}});
  EXPECT_DOUBLE_EQ(clustering_coefficient(one_link)[0], 1.0 / 3.0);
}

TEST(Betweenness, Examples) {
  EXPECT_EQ(betweenness(path_graph(3)), (std::vector<double>{0, 1, 0}));
  EXPECT_DOUBLE_EQ(betweenness(kStar)[0], 3.0);
  for (double b : betweenness(cycle_graph(4))) EXPECT_DOUBLE_EQ(b, 0.5);
}

TEST(CentralityMatrix, ColumnOrder) {
  const Matrix t = centrality_matrix(kTriangle);
  for (std::size_t v = 0; v < 3; ++v) {
    EXPECT_DOUBLE_EQ(t(v, 0), 2.0);
    EXPECT_DOUBLE_EQ(t(v, 1), 1.0);
    EXPECT_DOUBLE_EQ(t(v, 2), 0.0);
  }
  const Matrix p = centrality_matrix(path_graph(3));
  EXPECT_DOUBLE_EQ(p(1, 0), 2.0);
  EXPECT_DOUBLE_EQ(p(1, 1), 0.0);
  EXPECT_DOUBLE_EQ(p(1, 2), 1.0);
  const Matrix iso = centrality_matrix(Graph::structure(2, {}));
  EXPECT_EQ(iso, Matrix(2, 3, 0.0));
}

TEST(Centrality, MatchesOraclesOnRandomGraphs) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 7;
    const Graph g = random_graph(n, 0.45, rng);
    const auto bc = betweenness(g);
    const auto want_bc = oracle_betweenness(g);
    const auto cc = clustering_coefficient(g);
    const auto want_cc = oracle_clustering(g);
    for (std::size_t v = 0; v < n; ++v) {
      ASSERT_NEAR(bc[v], want_bc[v], 1e-9) << "trial " << trial << " node " << v;
      ASSERT_NEAR(cc[v], want_cc[v], 1e-9) << "trial " << trial << " node " << v;
    }
  }
}

TEST(Betweenness, TreeTotalCountsInternalPassages) {
  // In a tree every pair has one path, so total betweenness is the sum of (path length - 1).
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + rng() % 6;
    std::vector<Edge> edges;
    for (std::size_t v = 1; v < n; ++v) edges.emplace_back(static_cast<NodeId>(rng() % v), static_cast<NodeId>(v));
    const Graph tree = Graph::structure(n, edges);
    double total = 0;
    for (double b : betweenness(tree)) total += b;
    // Path lengths from BFS per source.
    double interior = 0;
    for (std::size_t s = 0; s < n; ++s) {
      std::vector<int> dist(n, -1);
      std::vector<NodeId> queue = {static_cast<NodeId>(s)};
      dist[s] = 0;
      for (std::size_t head = 0; head < queue.size(); ++head) {
        for (NodeId w : tree.neighbors(queue[head])) {
          if (dist[w] < 0) {
            dist[w] = dist[queue[head]] + 1;
            queue.push_back(w);
          }
        }
      }
      for (std::size_t t = s + 1; t < n; ++t) interior += dist[t] - 1;
    }
    EXPECT_NEAR(total, interior, 1e-9);
  }
}

TEST(Clustering, InvariantUnderRelabeling) {
  std::mt19937_64 rng(9);
  const Graph g = random_graph(8, 0.5, rng);
  const auto perm = random_permutation(8, rng);
  const auto cc = clustering_coefficient(g);
  const auto pc = clustering_coefficient(g.permuted(perm));
  for (std::size_t v = 0; v < 8; ++v) EXPECT_DOUBLE_EQ(cc[v], pc[perm[v]]);
}
