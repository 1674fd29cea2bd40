#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hibpool/autodiff.hpp"
#include "hibpool/community.hpp"
#include "hibpool/config.hpp"
#include "hibpool/graph.hpp"

namespace hibpool {

using ad::Var;

struct ModelShape {
  std::size_t input_dim = 0;
  std::size_t hidden = 64;
  std::size_t num_classes = 2;
  std::size_t layers = 2;
  ReadoutKind readout = ReadoutKind::kDiP;
  bool per_layer_readout_weight = false;

  /// Width of the MLP input: 4 statistics x h(kappa + 1) for DiP, h for Mean.
  std::size_t readout_input_dim() const;
};

ModelShape shape_for(const ExperimentConfig& config, std::size_t input_dim, std::size_t num_classes);

/// Readout MLP: one hidden layer of width 2h with ReLU, then linear to 2h.
struct ReadoutMlp {
  Var w1, b1, w2, b2;
  Var operator()(const Var& input) const;
};

struct LayerParams {
  Var w_self;       // f_l x h, applied to X
  Var w_neighbor;   // f_l x h, applied to A X
  ReadoutMlp mlp;
};

struct ModelParams {
  ModelShape shape;
  std::vector<LayerParams> layers;
  std::vector<Var> summary_weights;  // W_f; one shared, or one per layer
  Var w_out;                         // h x c

  /// Glorot-uniform weights, zero biases.
  static ModelParams init(const ModelShape& shape, std::uint64_t seed);

  /// Stable names ("layer0.w_self", ..., "w_out") with their tensors.
  std::vector<std::pair<std::string, Var>> named() const;
  std::vector<Var> parameters() const;
  /// Deep copy with fresh leaves.
  ModelParams clone() const;
  const Var& summary_weight(std::size_t layer) const;
};

/// Per-layer structure of one input graph: adjacency, communities and normalized
/// centralities. It depends only on topology and the assignment settings, so it is
/// computed once per graph and run.
struct LayerStructure {
  Matrix adjacency;              // N_l x N_l, non-negative, symmetric
  Partition partition;
  Matrix centralities;           // raw N_l x 3
  Matrix normalized_centralities;  // within-community softmax of `centralities`
};

struct GraphStructure {
  std::vector<LayerStructure> layers;
};

struct StructureOptions {
  std::size_t layers = 2;
  AssignmentKind assignment = AssignmentKind::kLouvain;
  std::vector<double> alphas = {0.5, 0.5};
  std::uint64_t seed = 0;
  std::size_t louvain_restarts = 1;

  double alpha_for_layer(std::size_t layer) const;
};

StructureOptions structure_options(const ExperimentConfig& config, std::uint64_t graph_seed);

/// Communities for one layer under the configured assignment. Random assignment uses
/// ceil(sqrt(N)) communities regardless of topology.
Partition assign_communities(const Matrix& adjacency, AssignmentKind kind, double alpha,
                             std::uint64_t seed, std::size_t restarts = 1);

/// Walks the layers: detect communities, compute centralities, pool the adjacency.
/// Centralities of pooled layers use the binarized off-diagonal skeleton.
GraphStructure build_structure(const Graph& graph, const StructureOptions& options);

Matrix dense_adjacency(const Graph& graph);

// ---- Layer stages ----

/// Z = relu(X W_self + A X W_neighbor).
Var mpn_forward(const Var& x, const Var& adjacency, const Var& w_self, const Var& w_neighbor);

/// C_hat[v, j] = exp(C[v, j]) / sum_{u in community(v)} exp(C[u, j]).
Matrix normalize_centralities(const Matrix& centralities, const Partition& partition);

/// Z || (C_hat_1 . Z) || (C_hat_2 . Z) || ..., each block scaling rows of Z.
Var scale_embeddings(const Var& z, const Matrix& normalized_centralities);

struct CommunityStatistics {
  Var sum, mean, max, min;
};

CommunityStatistics community_statistics(const Var& scaled, const Partition& partition);

/// H = MLP(Z_sum || Z_mean || Z_max || Z_min), K x 2h.
Var dip_readout(const Var& z, const Matrix& normalized_centralities, const Partition& partition,
                const ReadoutMlp& mlp);

/// H = MLP(per-community mean of Z), K x 2h.
Var mean_readout(const Var& z, const Partition& partition, const ReadoutMlp& mlp);

/// Row mean of the first h columns of H.
Var layer_summary(const Var& h, std::size_t hidden);

struct PooledGraph {
  Matrix adjacency;  // M (A + I) M^T
  Var features;      // H[:, :h]
};

Matrix pool_adjacency(const Matrix& adjacency, const Partition& partition);
PooledGraph pool_graph(const Matrix& adjacency, const Partition& partition, const Var& h, std::size_t hidden);

struct LayerOutput {
  Var z;
  Var h;        // K x 2h
  Var summary;  // 1 x h
};

struct ForwardResult {
  Var logits;   // 1 x c
  Var summary;  // 1 x h, combined over layers
  std::vector<LayerOutput> layers;
};

ForwardResult forward(const ModelParams& params, const GraphStructure& structure, const Matrix& features);

/// Argmax of the logits; ties go to the lower class index.
std::size_t predict(const ModelParams& params, const GraphStructure& structure, const Matrix& features);

}  // namespace hibpool
