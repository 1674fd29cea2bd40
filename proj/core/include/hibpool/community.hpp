#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hibpool/graph.hpp"
#include "hibpool/matrix.hpp"

namespace hibpool {

/// Symmetric non-negative weighted graph. Off-diagonal weights live in the adjacency
/// lists; diagonal entries A_uu are kept separately.
///
/// Modularity on this type uses the matrix convention: 2m = sum of all entries of A,
/// k_u = row sum of A. For a simple graph this reduces to edge count and degree.
class WeightedGraph {
 public:
  struct Arc {
    NodeId to;
    double weight;
  };

  WeightedGraph() = default;
  explicit WeightedGraph(std::size_t num_nodes);

  static WeightedGraph from_graph(const Graph& graph);
  /// Throws ArgumentError for a non-square, asymmetric or negative matrix.
  static WeightedGraph from_dense(const Matrix& adjacency);

  /// Adds `w` to A_uv and A_vu (or to A_uu once when u == v).
  void add_weight(NodeId u, NodeId v, double w);

  std::size_t num_nodes() const noexcept { return arcs_.size(); }
  const std::vector<Arc>& arcs(NodeId u) const { return arcs_[u]; }
  double self_weight(NodeId u) const { return self_[u]; }
  double strength(NodeId u) const;
  /// Sum of all matrix entries (2m).
  double total_weight() const;

  /// Binarized off-diagonal skeleton.
  Graph skeleton() const;
  Matrix to_dense() const;

 private:
  std::vector<std::vector<Arc>> arcs_;
  std::vector<double> self_;
};

/// Node -> community assignment with contiguous community indices.
struct Partition {
  std::vector<std::size_t> assignment;
  std::size_t num_communities = 0;
  double modularity = 0.0;
  double alpha = 0.5;

  std::size_t num_nodes() const noexcept { return assignment.size(); }
  std::size_t community_of(std::size_t v) const { return assignment[v]; }

  /// Relabels to contiguous indices in order of first appearance.
  static Partition from_assignment(const std::vector<std::size_t>& labels);
  static Partition singletons(std::size_t n);
  static Partition single_community(std::size_t n);

  bool operator==(const Partition& other) const { return assignment == other.assignment; }
};

/// True when both partitions group the nodes identically, ignoring community labels.
bool same_grouping(const Partition& a, const Partition& b);

/// Binary K x N membership, stored as community -> sorted member list.
class MappingMatrix {
 public:
  explicit MappingMatrix(const Partition& partition);

  std::size_t num_communities() const noexcept { return members_.size(); }
  std::size_t num_nodes() const noexcept { return num_nodes_; }
  const std::vector<NodeId>& members(std::size_t community) const { return members_[community]; }
  Matrix to_dense() const;

 private:
  std::size_t num_nodes_ = 0;
  std::vector<std::vector<NodeId>> members_;
};

inline MappingMatrix mapping_matrix(const Partition& partition) { return MappingMatrix(partition); }

/// Pair-sum modularity (1/2m) sum_{u,v} [A_uv - k_u k_v / 2m] delta_uv.
/// Throws UndefinedModularityError for a graph without edges.
double modularity(const Graph& graph, const Partition& partition);
double modularity(const WeightedGraph& graph, const Partition& partition);

/// Community-sum form sum_c [e_c/m - (d_c/2m)^2], e_c counting each intra edge once.
double community_modularity(const Graph& graph, const Partition& partition);
double community_modularity(const WeightedGraph& graph, const Partition& partition);

/// sum_c [alpha e_c/m - (1-alpha)(d_c/2m)^2]. Throws ArgumentError unless 0 < alpha < 1.
double multiscale_modularity(const Graph& graph, const Partition& partition, double alpha);
double multiscale_modularity(const WeightedGraph& graph, const Partition& partition, double alpha);

struct LouvainOptions {
  double alpha = 0.5;
  std::uint64_t seed = 0;
  /// Best-of-N seeded runs; one run unless configured otherwise.
  std::size_t restarts = 1;
};

/// Two-phase Louvain (local moves, then aggregation) maximizing multiscale modularity.
/// An edgeless graph yields singleton communities with modularity 0.
Partition louvain(const WeightedGraph& graph, const LouvainOptions& options);
Partition louvain(const Graph& graph, double alpha, std::uint64_t seed);

/// Seeded uniform assignment of n nodes into k non-empty communities.
Partition random_partition(std::size_t n, std::size_t k, std::uint64_t seed);

double adjusted_rand_index(const Partition& a, const Partition& b);
double adjusted_mutual_info(const Partition& a, const Partition& b);

}  // namespace hibpool
