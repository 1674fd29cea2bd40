#include <gtest/gtest.h>

#include <cmath>

#include "hibpool/centrality.hpp"
#include "hibpool/error.hpp"
#include "hibpool/model.hpp"
#include "hibpool/rng.hpp"
#include "hibpool/synthetic.hpp"
#include "test_support.hpp"

using namespace hibpool;
using namespace hibpool::testing;

namespace {

Partition part(std::vector<std::size_t> labels) { return Partition::from_assignment(labels); }
Var cst(Matrix m) { return Var::constant(std::move(m)); }

ReadoutMlp random_mlp(std::size_t in, std::size_t h, std::uint64_t seed) {
  NormalSampler normal(seed);
  auto draw = [&](std::size_t r, std::size_t c) {
    Matrix m(r, c);
    for (double& x : m.data()) x = 0.3 * normal();
    return Var::parameter(m);
  };
  return {draw(in, 2 * h), draw(1, 2 * h), draw(2 * h, 2 * h), draw(1, 2 * h)};
}

GraphStructure structure_for(const Graph& g, std::uint64_t seed, std::size_t layers = 2,
                             AssignmentKind kind = AssignmentKind::kLouvain) {
  StructureOptions options;
  options.layers = layers;
  options.assignment = kind;
  options.seed = seed;
  return build_structure(g, options);
}

}  // namespace

TEST(Mpn, EdgelessKeepsSelfTerm) {
  const Var x = cst(Matrix{{1, -1}, {2, 0.5}});
  const Var w1 = cst(Matrix{{1, 0}, {0, 1}});
  const Var w2 = cst(Matrix{{5, 5}, {5, 5}});
  EXPECT_EQ(mpn_forward(x, cst(Matrix(2, 2, 0.0)), w1, w2).value(), (Matrix{{1, 0}, {2, 0.5}}));
}

TEST(Mpn, IdentityPath) {
  const Matrix x{{1, 2}, {0, 3}};
  const Var z = mpn_forward(cst(x), cst(Matrix{{0, 1}, {1, 0}}), cst(Matrix::identity(2)), cst(Matrix(2, 2, 0.0)));
  EXPECT_EQ(z.value(), x);
}

TEST(Mpn, TriangleOfOnes) {
  const Matrix a = dense_adjacency(Graph::structure(3, {{0, 1}, {1, 2}, {0, 2}}));
  const Var z = mpn_forward(cst(Matrix::ones(3, 2)), cst(a), cst(Matrix::identity(2)), cst(Matrix::identity(2)));
  EXPECT_EQ(z.value(), Matrix(3, 2, 3.0));
}

TEST(NormalizeCentralities, WithinCommunitySoftmax) {
  const Matrix c{{1, 0, 7}, {1, std::log(3.0), 2}, {4, 4, 4}};
  const Matrix n = normalize_centralities(c, part({0, 0, 1}));
  EXPECT_DOUBLE_EQ(n(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(n(1, 0), 0.5);
  EXPECT_NEAR(n(0, 1), 0.25, 1e-15);
  EXPECT_NEAR(n(1, 1), 0.75, 1e-15);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(n(2, j), 1.0);
}

TEST(NormalizeCentralities, StableForLargeValues) {
  const Matrix n = normalize_centralities(Matrix{{800, 0, 0}, {801, 0, 0}}, part({0, 0}));
  EXPECT_NEAR(n(1, 0), 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
}

TEST(ScaleEmbeddings, BroadcastArithmetic) {
  const Var z = cst(Matrix{{1, 2}});
  EXPECT_EQ(scale_embeddings(z, Matrix{{0.5, 0.25, 1}}).value(), (Matrix{{1, 2, 0.5, 1, 0.25, 0.5, 1, 2}}));
  EXPECT_EQ(scale_embeddings(z, Matrix{{1, 1, 1}}).value(), (Matrix{{1, 2, 1, 2, 1, 2, 1, 2}}));
  EXPECT_EQ(scale_embeddings(z, Matrix{{1, 0, 1}}).value(), (Matrix{{1, 2, 1, 2, 0, 0, 1, 2}}));
  EXPECT_THROW(scale_embeddings(z, Matrix(2, 3, 1.0)), ShapeError);
}

TEST(CommunityStatistics, TwoRowCommunity) {
  const auto s = community_statistics(cst(Matrix{{1, 2}, {3, 4}}), part({0, 0}));
  EXPECT_EQ(s.sum.value(), (Matrix{{4, 6}}));
  EXPECT_EQ(s.mean.value(), (Matrix{{2, 3}}));
  EXPECT_EQ(s.max.value(), (Matrix{{3, 4}}));
  EXPECT_EQ(s.min.value(), (Matrix{{1, 2}}));
}

TEST(CommunityStatistics, SingletonAndWithinCommunityPermutation) {
  const auto single = community_statistics(cst(Matrix{{1, -2}}), part({0}));
  for (const auto* m : {&single.sum, &single.mean, &single.max, &single.min}) EXPECT_EQ(m->value(), (Matrix{{1, -2}}));

  const auto a = community_statistics(cst(Matrix{{1, 5}, {7, 2}, {3, 3}}), part({0, 1, 0}));
  const auto b = community_statistics(cst(Matrix{{3, 3}, {7, 2}, {1, 5}}), part({0, 1, 0}));
  EXPECT_EQ(a.sum.value(), b.sum.value());
  EXPECT_EQ(a.mean.value(), b.mean.value());
  EXPECT_EQ(a.max.value(), b.max.value());
  EXPECT_EQ(a.min.value(), b.min.value());
}

TEST(DipReadout, IdenticalCommunitiesGiveIdenticalRows) {
  const Matrix z{{1, 2}, {3, 0}, {1, 2}, {3, 0}};
  const Partition p = part({0, 0, 1, 1});
  const Matrix c = normalize_centralities(Matrix{{1, 0, 2}, {2, 1, 0}, {1, 0, 2}, {2, 1, 0}}, p);
  const Matrix h = dip_readout(cst(z), c, p, random_mlp(32, 2, 3)).value();
  for (std::size_t j = 0; j < h.cols(); ++j) EXPECT_DOUBLE_EQ(h(0, j), h(1, j));
}

TEST(DipReadout, SeparatesSubstructuresWithEqualDegreeSequences) {
  // K3 + K2 and P5 share the degree multiset {2,2,2,1,1} and the plain statistics of
  // Z under constant features, but their clustering profiles differ.
  const Graph g1 = Graph::structure(5, {{0, 1}, {1, 2}, {0, 2}, {3, 4}});
  const Graph g2 = path_graph(5);
  const Partition one = Partition::single_community(5);
  const Matrix z(5, 2, 1.0);
  const Matrix c1 = normalize_centralities(centrality_matrix(g1), one);
  const Matrix c2 = normalize_centralities(centrality_matrix(g2), one);
  const auto mlp = random_mlp(32, 2, 9);
  const double gap = max_abs_diff(dip_readout(cst(z), c1, one, mlp).value(), dip_readout(cst(z), c2, one, mlp).value());
  EXPECT_GT(gap, 1e-6);
  const auto mean_mlp = random_mlp(2, 2, 9);
  const double plain = max_abs_diff(mean_readout(cst(z), one, mean_mlp).value(), mean_readout(cst(z), one, mean_mlp).value());
  EXPECT_EQ(plain, 0.0);
}

TEST(DipReadout, MeanAblationEquivalence) {
  const std::size_t h = 2;
  const Matrix z{{1, 2}, {3, 0.5}, {2, 2}};
  const Partition p = part({0, 0, 1});
  const ReadoutMlp mean_mlp = random_mlp(h, h, 4);
  // DiP MLP whose first layer reads only the unscaled part of the Z_mean block.
  Matrix w1(4 * h * (kNumCentralities + 1), 2 * h, 0.0);
  const std::size_t offset = h * (kNumCentralities + 1);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < 2 * h; ++j) w1(offset + i, j) = mean_mlp.w1.value()(i, j);
  const ReadoutMlp dip_mlp{Var::parameter(w1), mean_mlp.b1, mean_mlp.w2, mean_mlp.b2};
  const Matrix ones(3, kNumCentralities, 1.0);
  EXPECT_LT(max_abs_diff(dip_readout(cst(z), ones, p, dip_mlp).value(), mean_readout(cst(z), p, mean_mlp).value()), 1e-12);
}

TEST(LayerSummary, MeanOfMuHalves) {
  EXPECT_EQ(layer_summary(cst(Matrix{{1, 2, 9, 9}}), 2).value(), (Matrix{{1, 2}}));
  EXPECT_EQ(layer_summary(cst(Matrix{{1, 2, 9, 9}, {3, 4, -9, 5}}), 2).value(), (Matrix{{2, 3}}));
  EXPECT_EQ(layer_summary(cst(Matrix{{1, 2, 0, 0}, {3, 4, 0, 0}}), 2).value(),
            layer_summary(cst(Matrix{{1, 2, 7, 1}, {3, 4, 2, 8}}), 2).value());
}

TEST(PoolGraph, PathExample) {
  const Matrix a = dense_adjacency(path_graph(3));
  EXPECT_EQ(pool_adjacency(a, part({0, 0, 1})), (Matrix{{4, 1}, {1, 1}}));
}

TEST(PoolGraph, SingleCommunitySumsAHat) {
  const Graph g = karate_club_graph();
  EXPECT_EQ(pool_adjacency(dense_adjacency(g), Partition::single_community(34)), Matrix(1, 1, 2.0 * 78 + 34));
}

TEST(PoolGraph, FeaturesAreMuHalf) {
  const Var h = cst(Matrix{{1, 2, 3, 4}, {5, 6, 7, 8}});
  const PooledGraph pooled = pool_graph(dense_adjacency(path_graph(3)), part({0, 0, 1}), h, 2);
  EXPECT_EQ(pooled.features.value(), (Matrix{{1, 2}, {5, 6}}));
}

TEST(PoolGraph, ConnectivityMatchesCrossEdgesExhaustively) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 6; ++trial) {
    const Graph g = random_graph(6, 0.35, rng);
    const Matrix a = dense_adjacency(g);
    for_each_set_partition(6, [&](const std::vector<std::size_t>& labels) {
      const Partition p = part(labels);
      const Matrix pooled = pool_adjacency(a, p);
      for (std::size_t i = 0; i < p.num_communities; ++i) {
        for (std::size_t j = 0; j < p.num_communities; ++j) {
          if (i == j) continue;
          bool linked = false;
          for (const auto& [u, v] : g.edges()) {
            linked |= (p.assignment[u] == i && p.assignment[v] == j) || (p.assignment[u] == j && p.assignment[v] == i);
          }
          ASSERT_EQ(pooled(i, j) > 0, linked);
        }
      }
    });
  }
}

TEST(Structure, RandomAndGlobalAssignments) {
  const Graph g = karate_club_graph();
  const GraphStructure global = structure_for(g, 1, 1, AssignmentKind::kGlobal);
  EXPECT_EQ(global.layers[0].partition.num_communities, 1u);
  const GraphStructure random = structure_for(g, 1, 2, AssignmentKind::kRandom);
  EXPECT_EQ(random.layers[0].partition.num_communities, 6u);  // ceil(sqrt(34))
  EXPECT_EQ(random.layers[1].partition.num_communities, 3u);  // ceil(sqrt(6))
  EXPECT_EQ(structure_for(g, 1, 2, AssignmentKind::kRandom).layers[0].partition, random.layers[0].partition);
}

TEST(Structure, PooledLayerUsesPooledAdjacency) {
  const Graph g = two_triangles_graph();
  const GraphStructure s = structure_for(g, 0);
  ASSERT_EQ(s.layers.size(), 2u);
  EXPECT_EQ(s.layers[1].adjacency, pool_adjacency(s.layers[0].adjacency, s.layers[0].partition));
  EXPECT_EQ(s.layers[1].adjacency.rows(), 2u);
}

class ForwardTest : public ::testing::Test {
 protected:
  ModelParams init(std::size_t in, std::size_t layers, ReadoutKind readout, std::uint64_t seed = 1) {
    ModelShape shape;
    shape.input_dim = in;
    shape.hidden = 4;
    shape.num_classes = 3;
    shape.layers = layers;
    shape.readout = readout;
    return ModelParams::init(shape, seed);
  }
};

TEST_F(ForwardTest, ShapesAndNames) {
  const ModelParams params = init(12, 2, ReadoutKind::kDiP);
  const auto names = params.named();
  EXPECT_EQ(names.front().first, "layer0.w_self");
  EXPECT_EQ(names.back().first, "w_out");
  EXPECT_EQ(params.layers[1].w_self.rows(), 4u);
  EXPECT_EQ(params.layers[0].mlp.w1.rows(), 4u * 4u * (kNumCentralities + 1));
  const Graph g = *builtin_dataset("toy")->graphs.begin();
  const ForwardResult f = forward(params, structure_for(g, 0), g.features());
  EXPECT_EQ(f.logits.cols(), 3u);
  EXPECT_EQ(f.layers[0].h.cols(), 8u);
  EXPECT_EQ(f.layers[0].h.rows(), 2u);
}

TEST_F(ForwardTest, SingleCommunityComposition) {
  const ModelParams params = init(12, 1, ReadoutKind::kDiP);
  const Graph g = builtin_dataset("toy")->graphs[0];
  const GraphStructure s = structure_for(g, 0, 1, AssignmentKind::kGlobal);
  const ForwardResult f = forward(params, s, g.features());
  const Matrix mu = f.layers[0].summary.value();
  const Matrix expected = matmul(matmul(mu, params.summary_weight(0).value()), params.w_out.value());
  EXPECT_LT(max_abs_diff(f.logits.value(), expected), 1e-12);
}

TEST_F(ForwardTest, PermutationInvariance) {
  const Dataset planted = *builtin_dataset("planted");
  const ModelParams params = init(planted.feature_dim, 2, ReadoutKind::kDiP);
  std::mt19937_64 rng(8);
  for (std::size_t gi = 0; gi < 5; ++gi) {
    const Graph& g = planted.graphs[gi];
    const Matrix base = forward(params, structure_for(g, 3), g.features()).logits.value();
    for (int t = 0; t < 3; ++t) {
      const Graph p = g.permuted(random_permutation(g.num_nodes(), rng));
      const Matrix logits = forward(params, structure_for(p, 3), p.features()).logits.value();
      EXPECT_LT(max_abs_diff(base, logits), 1e-9);
    }
  }
}

TEST_F(ForwardTest, RandomPoolChangesLogits) {
  const Graph g = builtin_dataset("toy")->graphs[0];
  const ModelParams params = init(12, 2, ReadoutKind::kDiP);
  const Matrix louvain = forward(params, structure_for(g, 0), g.features()).logits.value();
  const Matrix random = forward(params, structure_for(g, 0, 2, AssignmentKind::kRandom), g.features()).logits.value();
  EXPECT_GT(max_abs_diff(louvain, random), 1e-9);
}

TEST_F(ForwardTest, PerLayerSummaryWeights) {
  ModelShape shape;
  shape.input_dim = 12;
  shape.hidden = 4;
  shape.per_layer_readout_weight = true;
  const ModelParams params = ModelParams::init(shape, 2);
  EXPECT_EQ(params.summary_weights.size(), 2u);
  EXPECT_EQ(params.named()[params.named().size() - 2].first, "w_summary1");
}

TEST_F(ForwardTest, InitIsSeeded) {
  const ModelParams a = init(12, 2, ReadoutKind::kMean, 5);
  const ModelParams b = init(12, 2, ReadoutKind::kMean, 5);
  const ModelParams c = init(12, 2, ReadoutKind::kMean, 6);
  EXPECT_EQ(a.w_out.value(), b.w_out.value());
  EXPECT_NE(a.w_out.value(), c.w_out.value());
  const ModelParams copy = a.clone();
  copy.w_out.node()->value(0, 0) += 1.0;
  EXPECT_NE(copy.w_out.value(), a.w_out.value());
}

TEST_F(ForwardTest, PredictBreaksTiesLow) {
  ModelParams params = init(12, 1, ReadoutKind::kMean);
  params.w_out.mutable_value().fill(0.0);
  const Graph g = builtin_dataset("toy")->graphs[0];
  EXPECT_EQ(predict(params, structure_for(g, 0, 1), g.features()), 0u);
}
