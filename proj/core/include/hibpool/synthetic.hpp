#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "hibpool/graph.hpp"

namespace hibpool {

/// Two triangles {0,1,2} and {3,4,5} joined by the edge 2-3.
Graph two_triangles_graph();

/// Zachary's karate club: 34 nodes, 78 edges.
Graph karate_club_graph();

struct PlantedOptions {
  std::size_t num_graphs = 200;
  std::size_t num_nodes = 24;
  /// Expected intra-community degree, identical for both classes.
  double intra_degree = 6.0;
  /// Random edges between distinct communities, per graph.
  std::size_t inter_edges = 3;
};

/// Binary dataset where class 0 graphs hold two planted communities and class 1 graphs
/// three, with intra-community density chosen so the expected degree does not depend on
/// the class. Node ids are shuffled; features use the degree fallback encoding.
Dataset planted_partition_dataset(const PlantedOptions& options, std::uint64_t seed);

/// Built-in datasets: "toy" (two joined triangles), "karate", "planted".
std::optional<Dataset> builtin_dataset(const std::string& name);

/// A TU directory when `source` names one, else a built-in dataset. Throws LoadError.
Dataset resolve_dataset(const std::string& source);

}  // namespace hibpool
