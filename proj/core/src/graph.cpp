#include "hibpool/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "hibpool/error.hpp"
#include "hibpool/rng.hpp"

namespace hibpool {

Graph::Graph(std::size_t num_nodes, std::vector<Edge> edges, Matrix features, std::size_t label)
    : num_nodes_(num_nodes), features_(std::move(features)), label_(label) {
  if (features_.rows() != num_nodes_) {
    throw FormatError("Graph: feature matrix has " + std::to_string(features_.rows()) +
                      " rows for " + std::to_string(num_nodes_) + " nodes");
  }
  edges_.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u >= num_nodes_ || v >= num_nodes_) {
      throw FormatError("Graph: edge (" + std::to_string(u) + ", " + std::to_string(v) +
                        ") out of range for " + std::to_string(num_nodes_) + " nodes");
    }
    if (u == v) continue;
    edges_.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  adjacency_.assign(num_nodes_, {});
  for (auto [u, v] : edges_) {
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

Graph Graph::structure(std::size_t num_nodes, std::vector<Edge> edges) {
  return Graph(num_nodes, std::move(edges), Matrix(num_nodes, 0));
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  const auto& nbrs = adjacency_[u];
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

Graph Graph::with_features(Matrix features) const {
  Graph g = *this;
  if (features.rows() != num_nodes_) {
    throw FormatError("Graph::with_features: row count mismatch");
  }
  g.features_ = std::move(features);
  return g;
}

Graph Graph::with_label(std::size_t label) const {
  Graph g = *this;
  g.label_ = label;
  return g;
}

Graph Graph::permuted(const std::vector<NodeId>& perm) const {
  if (perm.size() != num_nodes_) throw ArgumentError("Graph::permuted: permutation size mismatch");
  std::vector<Edge> edges;
  edges.reserve(edges_.size());
  for (auto [u, v] : edges_) edges.emplace_back(perm[u], perm[v]);
  Matrix x(num_nodes_, features_.cols());
  for (std::size_t v = 0; v < num_nodes_; ++v) {
    std::copy(features_.row(v).begin(), features_.row(v).end(), x.row(perm[v]).begin());
  }
  return Graph(num_nodes_, std::move(edges), std::move(x), label_);
}

void Dataset::validate() const {
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const auto& g = graphs[i];
    if (g.features().cols() != feature_dim) {
      throw FormatError("Dataset " + name + ": graph " + std::to_string(i) + " has feature width " +
                        std::to_string(g.features().cols()) + ", expected " +
                        std::to_string(feature_dim));
    }
    if (g.label() >= num_classes) {
      throw FormatError("Dataset " + name + ": graph " + std::to_string(i) + " label " +
                        std::to_string(g.label()) + " >= num_classes " +
                        std::to_string(num_classes));
    }
  }
}

std::vector<Matrix> build_features(const std::vector<Graph>& structures, const FeatureSources& sources) {
  const std::size_t total_nodes = std::accumulate(
      structures.begin(), structures.end(), std::size_t{0},
      [](std::size_t acc, const Graph& g) { return acc + g.num_nodes(); });

  std::map<long, std::size_t> label_index;
  if (sources.node_labels) {
    if (sources.node_labels->size() != total_nodes) {
      throw FormatError("build_features: " + std::to_string(sources.node_labels->size()) +
                        " node labels for " + std::to_string(total_nodes) + " nodes");
    }
    for (long l : *sources.node_labels) label_index.emplace(l, 0);
    std::size_t next = 0;
    for (auto& [l, idx] : label_index) idx = next++;
  }
  std::size_t attr_dim = 0;
  if (sources.node_attributes) {
    if (sources.node_attributes->rows() != total_nodes) {
      throw FormatError("build_features: " + std::to_string(sources.node_attributes->rows()) +
                        " attribute rows for " + std::to_string(total_nodes) + " nodes");
    }
    attr_dim = sources.node_attributes->cols();
  }

  const bool fallback = !sources.node_labels && !sources.node_attributes;
  const std::size_t label_dim = label_index.size();
  const std::size_t dim = fallback ? kDegreeOneHotCap + 2 : label_dim + attr_dim;

  std::vector<Matrix> out;
  out.reserve(structures.size());
  std::size_t offset = 0;
  for (const auto& g : structures) {
    Matrix x(g.num_nodes(), dim);
    for (std::size_t v = 0; v < g.num_nodes(); ++v) {
      if (fallback) {
        const std::size_t d = g.degree(static_cast<NodeId>(v));
        x(v, std::min(d, kDegreeOneHotCap)) = 1.0;
        x(v, kDegreeOneHotCap + 1) = static_cast<double>(d);
        continue;
      }
      if (sources.node_labels) x(v, label_index.at((*sources.node_labels)[offset + v])) = 1.0;
      if (sources.node_attributes) {
        const auto src = sources.node_attributes->row(offset + v);
        std::copy(src.begin(), src.end(), x.row(v).begin() + static_cast<long>(label_dim));
      }
    }
    offset += g.num_nodes();
    out.push_back(std::move(x));
  }
  return out;
}

FoldPlan stratified_kfold(const Dataset& dataset, std::uint64_t seed) {
  std::vector<std::size_t> labels;
  labels.reserve(dataset.size());
  for (const auto& g : dataset.graphs) labels.push_back(g.label());
  return stratified_kfold(labels, seed);
}

FoldPlan stratified_kfold(const std::vector<std::size_t>& labels, std::uint64_t seed) {
  if (labels.empty()) throw ArgumentError("stratified_kfold: empty dataset");

  std::map<std::size_t, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  FoldPlan plan;
  plan.stratified = std::all_of(by_class.begin(), by_class.end(),
                                [](const auto& kv) { return kv.second.size() >= kNumFolds; });

  Rng rng(derive_seed(seed, {tag(SeedStream::kFolds)}));
  std::vector<std::size_t> order;
  order.reserve(labels.size());
  if (plan.stratified) {
    for (auto& [label, members] : by_class) {
      shuffle_in_place(std::span(members), rng);
      order.insert(order.end(), members.begin(), members.end());
    }
  } else {
    order.resize(labels.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_in_place(std::span(order), rng);
  }

  // Extra members land on even deciles first, so no fold draws both test and val
  // from oversized deciles unless more than half are oversized.
  constexpr std::array<std::size_t, kNumFolds> kDecileOrder = {0, 2, 4, 6, 8, 1, 3, 5, 7, 9};
  std::array<std::vector<std::size_t>, kNumFolds> deciles;
  for (std::size_t j = 0; j < order.size(); ++j) deciles[kDecileOrder[j % kNumFolds]].push_back(order[j]);
  for (auto& d : deciles) std::sort(d.begin(), d.end());

  plan.folds.resize(kNumFolds);
  for (std::size_t i = 0; i < kNumFolds; ++i) {
    auto& fold = plan.folds[i];
    fold.test = deciles[i];
    fold.val = deciles[(i + 1) % kNumFolds];
    for (std::size_t k = 0; k < kNumFolds; ++k) {
      if (k == i || k == (i + 1) % kNumFolds) continue;
      fold.train.insert(fold.train.end(), deciles[k].begin(), deciles[k].end());
    }
    std::sort(fold.train.begin(), fold.train.end());
  }
  return plan;
}

double mean_max_feature(const Matrix& x) {
  if (x.rows() == 0 || x.cols() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t v = 0; v < x.rows(); ++v) {
    const auto r = x.row(v);
    total += *std::max_element(r.begin(), r.end());
  }
  return total / static_cast<double>(x.rows());
}

Matrix perturb_features(const Matrix& x, double gamma, std::uint64_t seed) {
  if (!(gamma >= 0.0)) throw ArgumentError("perturb_features: gamma must be >= 0");
  if (gamma == 0.0) return x;
  const double scale = gamma * mean_max_feature(x);
  NormalSampler normal(derive_seed(seed, {tag(SeedStream::kPerturb)}));
  Matrix out = x;
  for (double& v : out.data()) v += scale * normal();
  return out;
}

}  // namespace hibpool
