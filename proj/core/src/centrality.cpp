#include "hibpool/centrality.hpp"

#include <queue>

namespace hibpool {

std::vector<double> degree_centrality(const Graph& graph) {
  std::vector<double> d(graph.num_nodes());
  for (NodeId v = 0; v < graph.num_nodes(); ++v) d[v] = static_cast<double>(graph.degree(v));
  return d;
}

std::vector<double> clustering_coefficient(const Graph& graph) {
  std::vector<double> cc(graph.num_nodes(), 0.0);
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    const auto& nbrs = graph.neighbors(v);
    const std::size_t d = nbrs.size();
    if (d < 2) continue;
    std::size_t links = 0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j)
        if (graph.has_edge(nbrs[i], nbrs[j])) ++links;
    cc[v] = 2.0 * static_cast<double>(links) / static_cast<double>(d * (d - 1));
  }
  return cc;
}

std::vector<double> betweenness(const Graph& graph) {
  const std::size_t n = graph.num_nodes();
  std::vector<double> bc(n, 0.0);
  std::vector<NodeId> stack;
  std::vector<std::vector<NodeId>> preds(n);
  std::vector<double> sigma(n);
  std::vector<long> dist(n);
  std::vector<double> delta(n);

  for (NodeId s = 0; s < n; ++s) {
    stack.clear();
    for (NodeId v = 0; v < n; ++v) {
      preds[v].clear();
      sigma[v] = 0.0;
      dist[v] = -1;
      delta[v] = 0.0;
    }
    sigma[s] = 1.0;
    dist[s] = 0;
    std::queue<NodeId> queue;
    queue.push(s);
    while (!queue.empty()) {
      const NodeId v = queue.front();
      queue.pop();
      stack.push_back(v);
      for (NodeId w : graph.neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
    while (!stack.empty()) {
      const NodeId w = stack.back();
      stack.pop_back();
      for (NodeId v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) bc[w] += delta[w];
    }
  }
  // Each unordered pair was accumulated from both endpoints.
  for (double& b : bc) b /= 2.0;
  return bc;
}

Matrix centrality_matrix(const Graph& graph) {
  Matrix c(graph.num_nodes(), kNumCentralities);
  const auto deg = degree_centrality(graph);
  const auto clu = clustering_coefficient(graph);
  const auto btw = betweenness(graph);
  for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
    c(v, 0) = deg[v];
    c(v, 1) = clu[v];
    c(v, 2) = btw[v];
  }
  return c;
}

}  // namespace hibpool
