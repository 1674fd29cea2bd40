#pragma once

#include <vector>

#include "hibpool/graph.hpp"
#include "hibpool/matrix.hpp"

namespace hibpool {

inline constexpr std::size_t kNumCentralities = 3;

/// Column order of a centrality matrix.
enum class Centrality : std::size_t { kDegree = 0, kClustering = 1, kBetweenness = 2 };

std::vector<double> degree_centrality(const Graph& graph);

/// Local clustering coefficient; 0 for nodes of degree < 2.
std::vector<double> clustering_coefficient(const Graph& graph);

/// Unnormalized shortest-path betweenness (Brandes), each unordered pair counted once.
std::vector<double> betweenness(const Graph& graph);

/// N x 3 matrix with columns (degree, clustering, betweenness).
Matrix centrality_matrix(const Graph& graph);

}  // namespace hibpool
