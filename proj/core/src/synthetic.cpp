#include "hibpool/synthetic.hpp"

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <set>

#include "hibpool/error.hpp"
#include "hibpool/rng.hpp"
#include "hibpool/tudataset.hpp"

namespace hibpool {
namespace {

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Dataset single_graph_dataset(std::string name, const Graph& structure) {
  auto features = build_features({structure}, {});
  Dataset d;
  d.name = std::move(name);
  d.graphs.push_back(structure.with_features(std::move(features.front())));
  d.num_classes = 1;
  d.feature_dim = d.graphs.front().features().cols();
  return d;
}

}  // namespace

Graph two_triangles_graph() {
  return Graph::structure(6, {{0, 1}, {0, 2}, {1, 2}, {3, 4}, {3, 5}, {4, 5}, {2, 3}});
}

Graph karate_club_graph() {
  static const std::vector<std::vector<NodeId>> kAdj = {
      {1, 2, 3, 4, 5, 6, 7, 8, 10, 11, 12, 13, 17, 19, 21, 31},
      {2, 3, 7, 13, 17, 19, 21, 30},
      {3, 7, 8, 9, 13, 27, 28, 32},
      {7, 12, 13},
      {6, 10},
      {6, 10, 16},
      {16},
      {},
      {30, 32, 33},
      {33},
      {},
      {},
      {},
      {33},
      {32, 33},
      {32, 33},
      {},
      {},
      {32, 33},
      {33},
      {32, 33},
      {},
      {32, 33},
      {25, 27, 29, 32, 33},
      {25, 27, 31},
      {31},
      {29, 33},
      {33},
      {31, 33},
      {32, 33},
      {32, 33},
      {32, 33},
      {33},
  };
  std::vector<Edge> edges;
  for (NodeId u = 0; u < kAdj.size(); ++u)
    for (NodeId v : kAdj[u]) edges.emplace_back(u, v);
  return Graph::structure(34, std::move(edges));
}

Dataset planted_partition_dataset(const PlantedOptions& options, std::uint64_t seed) {
  if (options.num_nodes < 6) throw ArgumentError("planted_partition_dataset: need at least 6 nodes");
  Rng rng(seed);
  std::vector<Graph> structures;
  std::vector<std::size_t> labels;
  for (std::size_t g = 0; g < options.num_graphs; ++g) {
    const std::size_t label = g % 2;
    const std::size_t k = label == 0 ? 2 : 3;
    const std::size_t n = options.num_nodes;

    std::vector<std::size_t> community(n);
    for (std::size_t v = 0; v < n; ++v) community[v] = v * k / n;
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t c : community) ++sizes[c];

    std::set<Edge> edges;
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = u + 1; v < n; ++v) {
        if (community[u] != community[v]) continue;
        const double p = std::min(1.0, options.intra_degree / static_cast<double>(sizes[community[u]] - 1));
        if (uniform01(rng) < p) edges.emplace(static_cast<NodeId>(u), static_cast<NodeId>(v));
      }
    }
    std::size_t added = 0;
    while (added < options.inter_edges) {
      const auto u = static_cast<NodeId>(uniform_index(rng, n));
      const auto v = static_cast<NodeId>(uniform_index(rng, n));
      if (community[u] == community[v]) continue;
      if (edges.emplace(std::min(u, v), std::max(u, v)).second) ++added;
    }

    std::vector<NodeId> perm(n);
    std::iota(perm.begin(), perm.end(), NodeId{0});
    shuffle_in_place(std::span(perm), rng);
    std::vector<Edge> permuted;
    for (auto [u, v] : edges) permuted.emplace_back(perm[u], perm[v]);
    structures.push_back(Graph::structure(n, std::move(permuted)));
    labels.push_back(label);
  }

  auto features = build_features(structures, {});
  Dataset d;
  d.name = "planted";
  d.num_classes = 2;
  d.feature_dim = features.empty() ? 0 : features.front().cols();
  for (std::size_t g = 0; g < structures.size(); ++g) {
    d.graphs.push_back(structures[g].with_features(std::move(features[g])).with_label(labels[g]));
  }
  return d;
}

std::optional<Dataset> builtin_dataset(const std::string& name) {
  if (name == "toy") return single_graph_dataset("toy", two_triangles_graph());
  if (name == "karate") return single_graph_dataset("karate", karate_club_graph());
  if (name == "planted") return planted_partition_dataset({}, 2024);
  return std::nullopt;
}

Dataset resolve_dataset(const std::string& source) {
  if (std::filesystem::is_directory(source)) return load_tudataset(source);
  if (auto d = builtin_dataset(source)) return std::move(*d);
  throw LoadError("dataset '" + source + "' is neither a directory nor a built-in dataset (toy, karate, planted)");
}

}  // namespace hibpool
