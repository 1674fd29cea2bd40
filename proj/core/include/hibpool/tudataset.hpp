#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "hibpool/graph.hpp"

namespace hibpool {

/// Reads the TU benchmark layout: DS_A.txt, DS_graph_indicator.txt, DS_graph_labels.txt and,
/// when present, DS_node_labels.txt / DS_node_attributes.txt. DS is the directory name.
Dataset load_tudataset(const std::filesystem::path& dir);

/// Writes `dataset` into `dir` using the same layout; features go to DS_node_attributes.txt.
void save_tudataset(const Dataset& dataset, const std::filesystem::path& dir);

/// {name, num_graphs, num_classes, feature_dim, avg_nodes, avg_edges}
nlohmann::json dataset_summary(const Dataset& dataset);

}  // namespace hibpool
