#include "hibpool/tudataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "hibpool/error.hpp"

namespace hibpool {
namespace {

namespace fs = std::filesystem;

struct NumberLine {
  std::size_t line_no = 0;
  std::vector<double> values;
};

std::string where(const fs::path& file, std::size_t line_no) {
  return file.filename().string() + " line " + std::to_string(line_no);
}

// Splits on commas and whitespace; blank lines are skipped.
std::vector<NumberLine> read_number_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  std::vector<NumberLine> lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    NumberLine nl{line_no, {}};
    std::string tok;
    while (ss >> tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0') {
        throw FormatError(where(path, line_no) +
                          ": not a number '" + tok + "'");
      }
      nl.values.push_back(v);
    }
    if (!nl.values.empty()) lines.push_back(std::move(nl));
  }
  return lines;
}

long as_index(double v, const fs::path& file, std::size_t line_no) {
  if (v != std::floor(v)) {
    throw FormatError(where(file, line_no) +
                      ": expected an integer");
  }
  return static_cast<long>(v);
}

fs::path require(const fs::path& dir, const std::string& name) {
  fs::path p = dir / name;
  if (!fs::exists(p)) throw LoadError("missing mandatory file " + name + " in " + dir.string());
  return p;
}

std::string dataset_name(const fs::path& dir) {
  fs::path d = dir;
  if (d.filename().empty()) d = d.parent_path();
  return d.filename().string();
}

}  // namespace

Dataset load_tudataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw LoadError("dataset directory not found: " + dir.string());
  const std::string ds = dataset_name(dir);

  const fs::path a_path = require(dir, ds + "_A.txt");
  const fs::path ind_path = require(dir, ds + "_graph_indicator.txt");
  const fs::path gl_path = require(dir, ds + "_graph_labels.txt");

  // Node -> graph.
  const auto ind_lines = read_number_lines(ind_path);
  const std::size_t total_nodes = ind_lines.size();
  std::vector<std::size_t> node_graph(total_nodes);
  std::vector<std::size_t> node_local(total_nodes);
  std::vector<std::size_t> graph_sizes;
  for (std::size_t i = 0; i < total_nodes; ++i) {
    const long g = as_index(ind_lines[i].values.at(0), ind_path, ind_lines[i].line_no);
    if (g < 1) throw FormatError(where(ind_path, ind_lines[i].line_no) + ": graph id < 1");
    const auto gi = static_cast<std::size_t>(g - 1);
    if (gi >= graph_sizes.size()) graph_sizes.resize(gi + 1, 0);
    node_graph[i] = gi;
    node_local[i] = graph_sizes[gi]++;
  }

  const auto label_lines = read_number_lines(gl_path);
  if (label_lines.size() != graph_sizes.size()) {
    throw FormatError(gl_path.filename().string() + ": " + std::to_string(label_lines.size()) +
                      " labels for " + std::to_string(graph_sizes.size()) + " graphs");
  }
  std::map<long, std::size_t> label_map;
  std::vector<long> raw_labels;
  for (const auto& l : label_lines) {
    raw_labels.push_back(as_index(l.values.at(0), gl_path, l.line_no));
    label_map.emplace(raw_labels.back(), 0);
  }
  std::size_t next = 0;
  for (auto& [raw, idx] : label_map) idx = next++;

  std::vector<std::vector<Edge>> graph_edges(graph_sizes.size());
  for (const auto& l : read_number_lines(a_path)) {
    if (l.values.size() < 2) {
      throw FormatError(where(a_path, l.line_no) +
                        ": expected two node ids");
    }
    const long u = as_index(l.values[0], a_path, l.line_no) - 1;
    const long v = as_index(l.values[1], a_path, l.line_no) - 1;
    if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= total_nodes ||
        static_cast<std::size_t>(v) >= total_nodes) {
      throw FormatError(where(a_path, l.line_no) +
                        ": node id out of range");
    }
    if (node_graph[u] != node_graph[v]) {
      throw FormatError(where(a_path, l.line_no) +
                        ": edge joins nodes of graphs " + std::to_string(node_graph[u] + 1) +
                        " and " + std::to_string(node_graph[v] + 1));
    }
    graph_edges[node_graph[u]].emplace_back(static_cast<NodeId>(node_local[u]),
                                            static_cast<NodeId>(node_local[v]));
  }

  std::vector<Graph> structures;
  structures.reserve(graph_sizes.size());
  for (std::size_t g = 0; g < graph_sizes.size(); ++g) {
    structures.push_back(Graph::structure(graph_sizes[g], std::move(graph_edges[g])));
  }

  FeatureSources sources;
  if (const fs::path p = dir / (ds + "_node_labels.txt"); fs::exists(p)) {
    std::vector<long> labels;
    for (const auto& l : read_number_lines(p)) labels.push_back(as_index(l.values.at(0), p, l.line_no));
    sources.node_labels = std::move(labels);
  }
  if (const fs::path p = dir / (ds + "_node_attributes.txt"); fs::exists(p)) {
    const auto lines = read_number_lines(p);
    const std::size_t width = lines.empty() ? 0 : lines.front().values.size();
    Matrix attrs(lines.size(), width);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (lines[i].values.size() != width) {
        throw FormatError(where(p, lines[i].line_no) +
                          ": expected " + std::to_string(width) + " attributes");
      }
      std::copy(lines[i].values.begin(), lines[i].values.end(), attrs.row(i).begin());
    }
    sources.node_attributes = std::move(attrs);
  }

  auto features = build_features(structures, sources);

  Dataset dataset;
  dataset.name = ds;
  dataset.num_classes = label_map.size();
  dataset.feature_dim = features.empty() ? 0 : features.front().cols();
  dataset.graphs.reserve(structures.size());
  for (std::size_t g = 0; g < structures.size(); ++g) {
    dataset.graphs.push_back(
        structures[g].with_features(std::move(features[g])).with_label(label_map.at(raw_labels[g])));
  }
  dataset.validate();
  return dataset;
}

void save_tudataset(const Dataset& dataset, const fs::path& dir) {
  fs::create_directories(dir);
  const std::string ds = dataset_name(dir);
  auto open = [&](const std::string& suffix) {
    std::ofstream out(dir / (ds + suffix));
    if (!out) throw LoadError("cannot write " + (dir / (ds + suffix)).string());
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    return out;
  };
  auto a = open("_A.txt");
  auto ind = open("_graph_indicator.txt");
  auto labels = open("_graph_labels.txt");
  auto attrs = open("_node_attributes.txt");

  std::size_t offset = 1;
  for (std::size_t g = 0; g < dataset.size(); ++g) {
    const Graph& graph = dataset.graphs[g];
    for (auto [u, v] : graph.edges()) {
      a << offset + u << ", " << offset + v << '\n';
      a << offset + v << ", " << offset + u << '\n';
    }
    for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
      ind << g + 1 << '\n';
      const auto row = graph.features().row(v);
      for (std::size_t c = 0; c < row.size(); ++c) attrs << (c ? ", " : "") << row[c];
      attrs << '\n';
    }
    labels << graph.label() << '\n';
    offset += graph.num_nodes();
  }
}

nlohmann::json dataset_summary(const Dataset& dataset) {
  double nodes = 0.0;
  double edges = 0.0;
  for (const auto& g : dataset.graphs) {
    nodes += static_cast<double>(g.num_nodes());
    edges += static_cast<double>(g.num_edges());
  }
  const double n = dataset.size() == 0 ? 1.0 : static_cast<double>(dataset.size());
  return {
      {"name", dataset.name},
      {"num_graphs", dataset.size()},
      {"num_classes", dataset.num_classes},
      {"feature_dim", dataset.feature_dim},
      {"avg_nodes", nodes / n},
      {"avg_edges", edges / n},
  };
}

}  // namespace hibpool
