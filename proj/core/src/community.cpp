#include "hibpool/community.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "hibpool/error.hpp"
#include "hibpool/rng.hpp"

namespace hibpool {
namespace {

void check_cover(std::size_t nodes, const Partition& p, const char* op) {
  if (p.num_nodes() != nodes) {
    throw ArgumentError(std::string(op) + ": partition covers " + std::to_string(p.num_nodes()) +
                        " nodes, graph has " + std::to_string(nodes));
  }
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ArgumentError("multiscale modularity: alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
}

struct CommunityTotals {
  std::vector<double> internal;  // sum_{u,v in c} A_uv (both orientations + diagonal)
  std::vector<double> strength;  // sum of member strengths
  double two_m = 0.0;
};

CommunityTotals community_totals(const WeightedGraph& g, const Partition& p) {
  CommunityTotals t;
  t.internal.assign(p.num_communities, 0.0);
  t.strength.assign(p.num_communities, 0.0);
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    const std::size_t cu = p.assignment[u];
    t.internal[cu] += g.self_weight(u);
    t.strength[cu] += g.strength(u);
    for (const auto& arc : g.arcs(u)) {
      if (p.assignment[arc.to] == cu) t.internal[cu] += arc.weight;
    }
  }
  t.two_m = g.total_weight();
  if (t.two_m <= 0.0) throw UndefinedModularityError("modularity is undefined for a graph without edges");
  return t;
}

// One Louvain level: local moves starting from `comm` (labels < num_nodes), updated in place.
// `moved` reports whether any node changed community.
void local_moves(const WeightedGraph& g, double alpha, Rng& rng, std::vector<std::size_t>& comm, bool& moved) {
  const std::size_t n = g.num_nodes();
  const double two_m = g.total_weight();
  const double m = two_m / 2.0;
  std::vector<double> strength(n);
  for (NodeId u = 0; u < n; ++u) strength[u] = g.strength(u);
  std::vector<double> tot(n, 0.0);
  for (NodeId u = 0; u < n; ++u) tot[comm[u]] += strength[u];

  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});

  std::vector<double> link(n, 0.0);
  std::vector<std::size_t> touched;
  moved = false;

  // Gain of inserting an isolated node with strength k into community c, up to a common
  // positive factor and the terms shared by every candidate.
  auto gain = [&](double k_to_c, double tot_c, double k) {
    return alpha * k_to_c / m - (1.0 - alpha) * tot_c * k / (2.0 * m * m);
  };

  // Equal-gain candidates resolve to the lowest community index; staying wins ties.
  const double tolerance = 1e-12 / m;
  bool improved = true;
  while (improved) {
    improved = false;
    shuffle_in_place(std::span(order), rng);
    for (NodeId u : order) {
      const double k = strength[u];
      if (k == 0.0) continue;
      const std::size_t own = comm[u];

      touched.clear();
      for (const auto& arc : g.arcs(u)) {
        const std::size_t c = comm[arc.to];
        if (link[c] == 0.0) touched.push_back(c);
        link[c] += arc.weight;
      }

      tot[own] -= k;
      const double stay = gain(link[own], tot[own], k);
      std::sort(touched.begin(), touched.end());
      std::size_t best = own;
      double best_gain = stay;
      for (std::size_t c : touched) {
        if (c == own) continue;
        const double gc = gain(link[c], tot[c], k);
        if (gc > best_gain + tolerance) {
          best = c;
          best_gain = gc;
        }
      }
      tot[best] += k;
      if (best != own) {
        comm[u] = best;
        improved = true;
        moved = true;
      }
      for (std::size_t c : touched) link[c] = 0.0;
    }
  }
}

std::vector<std::size_t> relabel_first_appearance(const std::vector<std::size_t>& labels, std::size_t& count) {
  std::unordered_map<std::size_t, std::size_t> map;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = map.emplace(labels[i], map.size());
    out[i] = it->second;
  }
  count = map.size();
  return out;
}

WeightedGraph aggregate(const WeightedGraph& g, const std::vector<std::size_t>& comm, std::size_t k) {
  WeightedGraph out(k);
  std::vector<std::map<std::size_t, double>> links(k);
  std::vector<double> self(k, 0.0);
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    const std::size_t cu = comm[u];
    self[cu] += g.self_weight(u);
    for (const auto& arc : g.arcs(u)) {
      const std::size_t cv = comm[arc.to];
      if (cv == cu) {
        self[cu] += arc.weight;
      } else if (cu < cv) {
        links[cu][cv] += arc.weight;
      }
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (self[c] != 0.0) out.add_weight(static_cast<NodeId>(c), static_cast<NodeId>(c), self[c]);
    for (auto [d, w] : links[c]) out.add_weight(static_cast<NodeId>(c), static_cast<NodeId>(d), w);
  }
  return out;
}

Partition louvain_once(const WeightedGraph& graph, double alpha, std::uint64_t seed) {
  const std::size_t n = graph.num_nodes();
  Rng rng(derive_seed(seed, {tag(SeedStream::kLouvain)}));

  std::vector<std::size_t> node_comm(n);
  std::iota(node_comm.begin(), node_comm.end(), std::size_t{0});
  WeightedGraph level = graph;
  for (;;) {
    bool moved = false;
    std::vector<std::size_t> comm(level.num_nodes());
    std::iota(comm.begin(), comm.end(), std::size_t{0});
    local_moves(level, alpha, rng, comm, moved);
    std::size_t k = 0;
    comm = relabel_first_appearance(comm, k);
    for (auto& c : node_comm) c = comm[c];
    if (!moved || k == level.num_nodes()) break;
    level = aggregate(level, comm, k);
  }
  Partition p = Partition::from_assignment(node_comm);
  p.alpha = alpha;
  p.modularity = multiscale_modularity(graph, p, alpha);
  return p;
}

double comb2(double x) { return x * (x - 1.0) / 2.0; }

struct Contingency {
  std::vector<std::vector<double>> table;
  std::vector<double> a;
  std::vector<double> b;
  double n = 0.0;
};

Contingency contingency(const Partition& p1, const Partition& p2, const char* op) {
  if (p1.num_nodes() != p2.num_nodes()) {
    throw ArgumentError(std::string(op) + ": partitions cover " + std::to_string(p1.num_nodes()) +
                        " and " + std::to_string(p2.num_nodes()) + " nodes");
  }
  Contingency c;
  c.table.assign(p1.num_communities, std::vector<double>(p2.num_communities, 0.0));
  c.a.assign(p1.num_communities, 0.0);
  c.b.assign(p2.num_communities, 0.0);
  for (std::size_t v = 0; v < p1.num_nodes(); ++v) {
    c.table[p1.assignment[v]][p2.assignment[v]] += 1.0;
    c.a[p1.assignment[v]] += 1.0;
    c.b[p2.assignment[v]] += 1.0;
  }
  c.n = static_cast<double>(p1.num_nodes());
  return c;
}

double entropy(const std::vector<double>& counts, double n) {
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) h -= (c / n) * std::log(c / n);
  }
  return h;
}

}  // namespace

WeightedGraph::WeightedGraph(std::size_t num_nodes) : arcs_(num_nodes), self_(num_nodes, 0.0) {}

WeightedGraph WeightedGraph::from_graph(const Graph& graph) {
  WeightedGraph g(graph.num_nodes());
  for (auto [u, v] : graph.edges()) g.add_weight(u, v, 1.0);
  return g;
}

WeightedGraph WeightedGraph::from_dense(const Matrix& a) {
  if (a.rows() != a.cols()) throw ArgumentError("WeightedGraph::from_dense: matrix is not square");
  WeightedGraph g(a.rows());
  for (std::size_t u = 0; u < a.rows(); ++u) {
    for (std::size_t v = u; v < a.cols(); ++v) {
      if (a(u, v) != a(v, u)) throw ArgumentError("WeightedGraph::from_dense: matrix is not symmetric");
      if (a(u, v) < 0.0) throw ArgumentError("WeightedGraph::from_dense: negative weight");
      if (a(u, v) != 0.0) g.add_weight(static_cast<NodeId>(u), static_cast<NodeId>(v), a(u, v));
    }
  }
  return g;
}

void WeightedGraph::add_weight(NodeId u, NodeId v, double w) {
  if (u == v) {
    self_[u] += w;
    return;
  }
  auto bump = [w](std::vector<Arc>& arcs, NodeId to) {
    for (auto& arc : arcs) {
      if (arc.to == to) {
        arc.weight += w;
        return;
      }
    }
    arcs.push_back({to, w});
  };
  bump(arcs_[u], v);
  bump(arcs_[v], u);
}

double WeightedGraph::strength(NodeId u) const {
  double s = self_[u];
  for (const auto& arc : arcs_[u]) s += arc.weight;
  return s;
}

double WeightedGraph::total_weight() const {
  double s = 0.0;
  for (NodeId u = 0; u < num_nodes(); ++u) s += strength(u);
  return s;
}

Graph WeightedGraph::skeleton() const {
  std::vector<Edge> edges;
  for (NodeId u = 0; u < num_nodes(); ++u) {
    for (const auto& arc : arcs_[u]) {
      if (u < arc.to && arc.weight > 0.0) edges.emplace_back(u, arc.to);
    }
  }
  return Graph::structure(num_nodes(), std::move(edges));
}

Matrix WeightedGraph::to_dense() const {
  Matrix a(num_nodes(), num_nodes());
  for (NodeId u = 0; u < num_nodes(); ++u) {
    a(u, u) = self_[u];
    for (const auto& arc : arcs_[u]) a(u, arc.to) = arc.weight;
  }
  return a;
}

Partition Partition::from_assignment(const std::vector<std::size_t>& labels) {
  Partition p;
  p.assignment = relabel_first_appearance(labels, p.num_communities);
  return p;
}

Partition Partition::singletons(std::size_t n) {
  std::vector<std::size_t> labels(n);
  std::iota(labels.begin(), labels.end(), std::size_t{0});
  return from_assignment(labels);
}

Partition Partition::single_community(std::size_t n) {
  Partition p;
  p.assignment.assign(n, 0);
  p.num_communities = n == 0 ? 0 : 1;
  return p;
}

bool same_grouping(const Partition& a, const Partition& b) {
  if (a.num_nodes() != b.num_nodes()) return false;
  return Partition::from_assignment(a.assignment).assignment ==
         Partition::from_assignment(b.assignment).assignment;
}

MappingMatrix::MappingMatrix(const Partition& partition)
    : num_nodes_(partition.num_nodes()), members_(partition.num_communities) {
  for (std::size_t v = 0; v < partition.num_nodes(); ++v) {
    members_.at(partition.assignment[v]).push_back(static_cast<NodeId>(v));
  }
}

Matrix MappingMatrix::to_dense() const {
  Matrix m(members_.size(), num_nodes_);
  for (std::size_t c = 0; c < members_.size(); ++c)
    for (NodeId v : members_[c]) m(c, v) = 1.0;
  return m;
}

double modularity(const Graph& graph, const Partition& partition) {
  return modularity(WeightedGraph::from_graph(graph), partition);
}

double modularity(const WeightedGraph& graph, const Partition& partition) {
  check_cover(graph.num_nodes(), partition, "modularity");
  const double two_m = graph.total_weight();
  if (two_m <= 0.0) throw UndefinedModularityError("modularity is undefined for a graph without edges");
  const std::size_t n = graph.num_nodes();
  std::vector<double> k(n);
  for (NodeId u = 0; u < n; ++u) k[u] = graph.strength(u);
  const Matrix a = graph.to_dense();
  double q = 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (partition.assignment[u] != partition.assignment[v]) continue;
      q += a(u, v) - k[u] * k[v] / two_m;
    }
  }
  return q / two_m;
}

double community_modularity(const Graph& graph, const Partition& partition) {
  return community_modularity(WeightedGraph::from_graph(graph), partition);
}

double community_modularity(const WeightedGraph& graph, const Partition& partition) {
  check_cover(graph.num_nodes(), partition, "community_modularity");
  const auto t = community_totals(graph, partition);
  const double m = t.two_m / 2.0;
  double q = 0.0;
  for (std::size_t c = 0; c < partition.num_communities; ++c) {
    const double e_c = t.internal[c] / 2.0;
    const double share = t.strength[c] / t.two_m;
    q += e_c / m - share * share;
  }
  return q;
}

double multiscale_modularity(const Graph& graph, const Partition& partition, double alpha) {
  return multiscale_modularity(WeightedGraph::from_graph(graph), partition, alpha);
}

double multiscale_modularity(const WeightedGraph& graph, const Partition& partition, double alpha) {
  check_alpha(alpha);
  check_cover(graph.num_nodes(), partition, "multiscale_modularity");
  const auto t = community_totals(graph, partition);
  const double m = t.two_m / 2.0;
  double q = 0.0;
  for (std::size_t c = 0; c < partition.num_communities; ++c) {
    const double e_c = t.internal[c] / 2.0;
    const double share = t.strength[c] / t.two_m;
    q += alpha * e_c / m - (1.0 - alpha) * share * share;
  }
  return q;
}

Partition louvain(const WeightedGraph& graph, const LouvainOptions& options) {
  check_alpha(options.alpha);
  if (graph.total_weight() <= 0.0) {
    Partition p = Partition::singletons(graph.num_nodes());
    p.alpha = options.alpha;
    p.modularity = 0.0;
    return p;
  }
  Partition best;
  const std::size_t runs = std::max<std::size_t>(1, options.restarts);
  for (std::size_t r = 0; r < runs; ++r) {
    const std::uint64_t seed = r == 0 ? options.seed : derive_seed(options.seed, {r});
    Partition p = louvain_once(graph, options.alpha, seed);
    if (r == 0 || p.modularity > best.modularity) best = std::move(p);
  }
  return best;
}

Partition louvain(const Graph& graph, double alpha, std::uint64_t seed) {
  return louvain(WeightedGraph::from_graph(graph), LouvainOptions{alpha, seed, 1});
}

Partition random_partition(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (n == 0) return Partition::single_community(0);
  k = std::clamp<std::size_t>(k, 1, n);
  Rng rng(derive_seed(seed, {tag(SeedStream::kRandomPool)}));
  std::vector<std::size_t> nodes(n);
  std::iota(nodes.begin(), nodes.end(), std::size_t{0});
  shuffle_in_place(std::span(nodes), rng);
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[nodes[i]] = i < k ? i : uniform_index(rng, k);
  return Partition::from_assignment(labels);
}

double adjusted_rand_index(const Partition& p1, const Partition& p2) {
  const auto c = contingency(p1, p2, "adjusted_rand_index");
  if (same_grouping(p1, p2)) return 1.0;
  double index = 0.0;
  for (const auto& row : c.table)
    for (double nij : row) index += comb2(nij);
  double sum_a = 0.0;
  double sum_b = 0.0;
  for (double x : c.a) sum_a += comb2(x);
  for (double x : c.b) sum_b += comb2(x);
  const double total = comb2(c.n);
  const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 0.0;
  return (index - expected) / (max_index - expected);
}

double adjusted_mutual_info(const Partition& p1, const Partition& p2) {
  const auto c = contingency(p1, p2, "adjusted_mutual_info");
  if (same_grouping(p1, p2)) return 1.0;
  const double n = c.n;

  double mi = 0.0;
  for (std::size_t i = 0; i < c.a.size(); ++i) {
    for (std::size_t j = 0; j < c.b.size(); ++j) {
      const double nij = c.table[i][j];
      if (nij > 0.0) mi += (nij / n) * std::log(n * nij / (c.a[i] * c.b[j]));
    }
  }

  // Expected mutual information under the hypergeometric permutation model.
  const double lg_n = std::lgamma(n + 1.0);
  double emi = 0.0;
  for (double ai : c.a) {
    for (double bj : c.b) {
      const double lo = std::max(1.0, ai + bj - n);
      const double hi = std::min(ai, bj);
      for (double nij = lo; nij <= hi; nij += 1.0) {
        const double log_p = std::lgamma(ai + 1.0) + std::lgamma(bj + 1.0) +
                             std::lgamma(n - ai + 1.0) + std::lgamma(n - bj + 1.0) - lg_n -
                             std::lgamma(nij + 1.0) - std::lgamma(ai - nij + 1.0) -
                             std::lgamma(bj - nij + 1.0) - std::lgamma(n - ai - bj + nij + 1.0);
        emi += (nij / n) * std::log(n * nij / (ai * bj)) * std::exp(log_p);
      }
    }
  }

  const double h1 = entropy(c.a, n);
  const double h2 = entropy(c.b, n);
  double denom = 0.5 * (h1 + h2) - emi;
  constexpr double kEps = 2.220446049250313e-16;
  denom = denom < 0.0 ? std::min(denom, -kEps) : std::max(denom, kEps);
  return (mi - emi) / denom;
}

}  // namespace hibpool
