#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hibpool/matrix.hpp"

namespace hibpool {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

/// Immutable simple undirected graph with a node feature matrix and a class label.
///
/// Edges are stored once per unordered pair with `first < second`. Self-loops and
/// duplicate pairs given to the constructor are dropped.
class Graph {
 public:
  Graph() = default;
  Graph(std::size_t num_nodes, std::vector<Edge> edges, Matrix features, std::size_t label = 0);

  /// Structure-only graph with an empty (N x 0) feature matrix.
  static Graph structure(std::size_t num_nodes, std::vector<Edge> edges);

  std::size_t num_nodes() const noexcept { return num_nodes_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Matrix& features() const noexcept { return features_; }
  std::size_t label() const noexcept { return label_; }

  const std::vector<NodeId>& neighbors(NodeId v) const { return adjacency_[v]; }
  std::size_t degree(NodeId v) const { return adjacency_[v].size(); }
  bool has_edge(NodeId u, NodeId v) const;

  Graph with_features(Matrix features) const;
  Graph with_label(std::size_t label) const;

  /// Relabels nodes so that old node v becomes `perm[v]`.
  Graph permuted(const std::vector<NodeId>& perm) const;

 private:
  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adjacency_;
  Matrix features_;
  std::size_t label_ = 0;
};

struct Dataset {
  std::string name;
  std::vector<Graph> graphs;
  std::size_t num_classes = 0;
  std::size_t feature_dim = 0;

  std::size_t size() const noexcept { return graphs.size(); }
  /// Throws FormatError when graphs disagree on feature width or a label is out of range.
  void validate() const;
};

/// Optional per-node inputs, indexed over all nodes of all graphs in order.
struct FeatureSources {
  std::optional<std::vector<long>> node_labels;
  std::optional<Matrix> node_attributes;
};

inline constexpr std::size_t kDegreeOneHotCap = 10;

/// Node features per graph: one-hot(node label) ++ attributes, whichever exist.
/// Without either, one-hot(min(degree, 10)) followed by the raw degree.
std::vector<Matrix> build_features(const std::vector<Graph>& structures, const FeatureSources& sources);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

struct FoldPlan {
  std::vector<Fold> folds;
  bool stratified = true;
};

inline constexpr std::size_t kNumFolds = 10;

/// Ten folds; fold i tests on decile i, validates on decile i+1 (mod 10), trains on the rest.
/// Deciles are stratified by label unless some class has fewer than ten members.
FoldPlan stratified_kfold(const Dataset& dataset, std::uint64_t seed);
FoldPlan stratified_kfold(const std::vector<std::size_t>& labels, std::uint64_t seed);

/// Mean over nodes of each node's largest feature value.
double mean_max_feature(const Matrix& x);

/// X + gamma * r * eps with eps ~ N(0,1) per entry and r = mean_max_feature(X).
Matrix perturb_features(const Matrix& x, double gamma, std::uint64_t seed);

}  // namespace hibpool
