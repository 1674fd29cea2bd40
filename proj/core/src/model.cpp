#include "hibpool/model.hpp"

#include <algorithm>
#include <cmath>

#include "hibpool/centrality.hpp"
#include "hibpool/error.hpp"
#include "hibpool/rng.hpp"

namespace hibpool {
namespace {

Var glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix w(rows, cols);
  for (double& v : w.data()) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v = (2.0 * u - 1.0) * limit;
  }
  return Var::parameter(std::move(w));
}

Var zeros_param(std::size_t rows, std::size_t cols) { return Var::parameter(Matrix(rows, cols)); }

Var copy_param(const Var& v) { return Var::parameter(v.value()); }

}  // namespace

std::size_t ModelShape::readout_input_dim() const {
  return readout == ReadoutKind::kDiP ? 4 * hidden * (kNumCentralities + 1) : hidden;
}

ModelShape shape_for(const ExperimentConfig& config, std::size_t input_dim, std::size_t num_classes) {
  ModelShape s;
  s.input_dim = input_dim;
  s.hidden = config.hidden;
  s.num_classes = num_classes;
  s.layers = config.layers;
  s.readout = config.readout;
  s.per_layer_readout_weight = config.per_layer_readout_weight;
  return s;
}

Var ReadoutMlp::operator()(const Var& input) const {
  return ad::matmul(ad::relu(ad::matmul(input, w1) + b1), w2) + b2;
}

ModelParams ModelParams::init(const ModelShape& shape, std::uint64_t seed) {
  if (shape.layers < 1 || shape.hidden < 1 || shape.num_classes < 1) {
    throw ArgumentError("ModelParams::init: layers, hidden and num_classes must be positive");
  }
  Rng rng(derive_seed(seed, {tag(SeedStream::kInit)}));
  ModelParams p;
  p.shape = shape;
  const std::size_t h = shape.hidden;
  const std::size_t in = shape.readout_input_dim();
  for (std::size_t l = 0; l < shape.layers; ++l) {
    const std::size_t f = l == 0 ? shape.input_dim : h;
    LayerParams layer;
    layer.w_self = glorot(f, h, rng);
    layer.w_neighbor = glorot(f, h, rng);
    layer.mlp.w1 = glorot(in, 2 * h, rng);
    layer.mlp.b1 = zeros_param(1, 2 * h);
    layer.mlp.w2 = glorot(2 * h, 2 * h, rng);
    layer.mlp.b2 = zeros_param(1, 2 * h);
    p.layers.push_back(std::move(layer));
  }
  const std::size_t n_summary = shape.per_layer_readout_weight ? shape.layers : 1;
  for (std::size_t l = 0; l < n_summary; ++l) p.summary_weights.push_back(glorot(h, h, rng));
  p.w_out = glorot(h, shape.num_classes, rng);
  return p;
}

std::vector<std::pair<std::string, Var>> ModelParams::named() const {
  std::vector<std::pair<std::string, Var>> out;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    const auto& layer = layers[l];
    out.emplace_back(prefix + "w_self", layer.w_self);
    out.emplace_back(prefix + "w_neighbor", layer.w_neighbor);
    out.emplace_back(prefix + "mlp.w1", layer.mlp.w1);
    out.emplace_back(prefix + "mlp.b1", layer.mlp.b1);
    out.emplace_back(prefix + "mlp.w2", layer.mlp.w2);
    out.emplace_back(prefix + "mlp.b2", layer.mlp.b2);
  }
  for (std::size_t l = 0; l < summary_weights.size(); ++l) {
    out.emplace_back(summary_weights.size() == 1 ? "w_summary" : "w_summary" + std::to_string(l),
                     summary_weights[l]);
  }
  out.emplace_back("w_out", w_out);
  return out;
}

std::vector<Var> ModelParams::parameters() const {
  std::vector<Var> out;
  for (auto& [name, v] : named()) out.push_back(v);
  return out;
}

ModelParams ModelParams::clone() const {
  ModelParams p;
  p.shape = shape;
  for (const auto& l : layers) {
    p.layers.push_back({copy_param(l.w_self), copy_param(l.w_neighbor),
                        {copy_param(l.mlp.w1), copy_param(l.mlp.b1), copy_param(l.mlp.w2), copy_param(l.mlp.b2)}});
  }
  for (const auto& w : summary_weights) p.summary_weights.push_back(copy_param(w));
  p.w_out = copy_param(w_out);
  return p;
}

const Var& ModelParams::summary_weight(std::size_t layer) const {
  return summary_weights.size() == 1 ? summary_weights.front() : summary_weights.at(layer);
}

double StructureOptions::alpha_for_layer(std::size_t layer) const {
  if (alphas.empty()) return 0.5;
  return alphas[std::min(layer, alphas.size() - 1)];
}

StructureOptions structure_options(const ExperimentConfig& config, std::uint64_t graph_seed) {
  StructureOptions o;
  o.layers = config.layers;
  o.assignment = config.assignment;
  o.alphas = config.alphas;
  o.seed = graph_seed;
  o.louvain_restarts = config.louvain_restarts;
  return o;
}

Matrix dense_adjacency(const Graph& graph) {
  Matrix a(graph.num_nodes(), graph.num_nodes());
  for (auto [u, v] : graph.edges()) {
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  return a;
}

Partition assign_communities(const Matrix& adjacency, AssignmentKind kind, double alpha,
                             std::uint64_t seed, std::size_t restarts) {
  const std::size_t n = adjacency.rows();
  switch (kind) {
    case AssignmentKind::kGlobal: return Partition::single_community(n);
    case AssignmentKind::kRandom: {
      const auto k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
      return random_partition(n, k, seed);
    }
    case AssignmentKind::kLouvain:
      break;
  }
  return louvain(WeightedGraph::from_dense(adjacency), LouvainOptions{alpha, seed, restarts});
}

GraphStructure build_structure(const Graph& graph, const StructureOptions& options) {
  GraphStructure s;
  Matrix adjacency = dense_adjacency(graph);
  for (std::size_t l = 0; l < options.layers; ++l) {
    LayerStructure layer;
    layer.partition = assign_communities(adjacency, options.assignment, options.alpha_for_layer(l),
                                         derive_seed(options.seed, {l}), options.louvain_restarts);
    const Graph skeleton = l == 0 ? graph : WeightedGraph::from_dense(adjacency).skeleton();
    layer.centralities = centrality_matrix(skeleton);
    layer.normalized_centralities = normalize_centralities(layer.centralities, layer.partition);
    Matrix next = pool_adjacency(adjacency, layer.partition);
    layer.adjacency = std::move(adjacency);
    adjacency = std::move(next);
    s.layers.push_back(std::move(layer));
  }
  return s;
}

Var mpn_forward(const Var& x, const Var& adjacency, const Var& w_self, const Var& w_neighbor) {
  if (adjacency.rows() != x.rows() || adjacency.cols() != x.rows()) {
    throw ShapeError("mpn_forward: adjacency " + adjacency.value().shape_string() + " for " +
                     std::to_string(x.rows()) + " nodes");
  }
  return ad::relu(ad::matmul(x, w_self) + ad::matmul(ad::matmul(adjacency, x), w_neighbor));
}

Matrix normalize_centralities(const Matrix& c, const Partition& partition) {
  if (partition.num_nodes() != c.rows()) {
    throw ShapeError("normalize_centralities: partition covers " + std::to_string(partition.num_nodes()) +
                     " nodes, centralities have " + std::to_string(c.rows()) + " rows");
  }
  const std::size_t k = partition.num_communities;
  Matrix peak(k, c.cols(), -std::numeric_limits<double>::infinity());
  for (std::size_t v = 0; v < c.rows(); ++v)
    for (std::size_t j = 0; j < c.cols(); ++j)
      peak(partition.assignment[v], j) = std::max(peak(partition.assignment[v], j), c(v, j));
  Matrix z(k, c.cols());
  Matrix out(c.rows(), c.cols());
  for (std::size_t v = 0; v < c.rows(); ++v) {
    for (std::size_t j = 0; j < c.cols(); ++j) {
      out(v, j) = std::exp(c(v, j) - peak(partition.assignment[v], j));
      z(partition.assignment[v], j) += out(v, j);
    }
  }
  for (std::size_t v = 0; v < c.rows(); ++v)
    for (std::size_t j = 0; j < c.cols(); ++j) out(v, j) /= z(partition.assignment[v], j);
  return out;
}

Var scale_embeddings(const Var& z, const Matrix& c_hat) {
  if (c_hat.rows() != z.rows()) {
    throw ShapeError("scale_embeddings: " + std::to_string(c_hat.rows()) + " centrality rows for " +
                     std::to_string(z.rows()) + " embeddings");
  }
  std::vector<Var> blocks{z};
  for (std::size_t j = 0; j < c_hat.cols(); ++j) {
    Matrix col(c_hat.rows(), 1);
    for (std::size_t v = 0; v < c_hat.rows(); ++v) col(v, 0) = c_hat(v, j);
    blocks.push_back(ad::mul_rows(z, Var::constant(std::move(col))));
  }
  return ad::concat_cols(blocks);
}

CommunityStatistics community_statistics(const Var& scaled, const Partition& partition) {
  const auto& m = partition.assignment;
  const std::size_t k = partition.num_communities;
  return {ad::segment_sum(scaled, m, k), ad::segment_mean(scaled, m, k), ad::segment_max(scaled, m, k),
          ad::segment_min(scaled, m, k)};
}

Var dip_readout(const Var& z, const Matrix& c_hat, const Partition& partition, const ReadoutMlp& mlp) {
  const auto stats = community_statistics(scale_embeddings(z, c_hat), partition);
  return mlp(ad::concat_cols({stats.sum, stats.mean, stats.max, stats.min}));
}

Var mean_readout(const Var& z, const Partition& partition, const ReadoutMlp& mlp) {
  return mlp(ad::segment_mean(z, partition.assignment, partition.num_communities));
}

Var layer_summary(const Var& h, std::size_t hidden) {
  return ad::mean_rows(ad::slice_cols(h, 0, hidden));
}

Matrix pool_adjacency(const Matrix& a, const Partition& partition) {
  if (a.rows() != partition.num_nodes() || a.cols() != partition.num_nodes()) {
    throw ShapeError("pool_adjacency: adjacency " + a.shape_string() + " for partition of " +
                     std::to_string(partition.num_nodes()) + " nodes");
  }
  const std::size_t k = partition.num_communities;
  Matrix out(k, k);
  for (std::size_t u = 0; u < a.rows(); ++u) {
    const std::size_t cu = partition.assignment[u];
    out(cu, cu) += 1.0;  // identity term
    for (std::size_t v = 0; v < a.cols(); ++v) {
      if (a(u, v) != 0.0) out(cu, partition.assignment[v]) += a(u, v);
    }
  }
  return out;
}

PooledGraph pool_graph(const Matrix& adjacency, const Partition& partition, const Var& h, std::size_t hidden) {
  if (h.rows() != partition.num_communities) {
    throw ShapeError("pool_graph: H has " + std::to_string(h.rows()) + " rows for " +
                     std::to_string(partition.num_communities) + " communities");
  }
  return {pool_adjacency(adjacency, partition), ad::slice_cols(h, 0, hidden)};
}

ForwardResult forward(const ModelParams& params, const GraphStructure& structure, const Matrix& features) {
  const std::size_t h = params.shape.hidden;
  if (structure.layers.size() != params.layers.size()) {
    throw ShapeError("forward: structure has " + std::to_string(structure.layers.size()) +
                     " layers, parameters have " + std::to_string(params.layers.size()));
  }
  ForwardResult result;
  Var x = Var::constant(features);
  Var combined;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const LayerStructure& s = structure.layers[l];
    const LayerParams& p = params.layers[l];
    LayerOutput out;
    out.z = mpn_forward(x, Var::constant(s.adjacency), p.w_self, p.w_neighbor);
    out.h = params.shape.readout == ReadoutKind::kDiP
                ? dip_readout(out.z, s.normalized_centralities, s.partition, p.mlp)
                : mean_readout(out.z, s.partition, p.mlp);
    out.summary = layer_summary(out.h, h);

    if (params.summary_weights.size() == 1) {
      combined = l == 0 ? out.summary : combined + out.summary;
    } else {
      Var weighted = ad::matmul(out.summary, params.summary_weight(l));
      combined = l == 0 ? weighted : combined + weighted;
    }
    x = ad::slice_cols(out.h, 0, h);
    result.layers.push_back(std::move(out));
  }
  result.summary = params.summary_weights.size() == 1 ? ad::matmul(combined, params.summary_weights.front())
                                                      : combined;
  result.logits = ad::matmul(result.summary, params.w_out);
  return result;
}

std::size_t predict(const ModelParams& params, const GraphStructure& structure, const Matrix& features) {
  ad::NoGradGuard no_grad;
  const Matrix logits = forward(params, structure, features).logits.value();
  std::size_t best = 0;
  for (std::size_t c = 1; c < logits.cols(); ++c) {
    if (logits(0, c) > logits(0, best)) best = c;
  }
  return best;
}

}  // namespace hibpool
