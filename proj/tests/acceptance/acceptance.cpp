// Acceptance suite. Each criterion prints one PASS/FAIL line; the exit code is non-zero
// when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli.hpp"
#include "hibpool/centrality.hpp"
#include "hibpool/community.hpp"
#include "hibpool/ib.hpp"
#include "hibpool/model.hpp"
#include "hibpool/rng.hpp"
#include "hibpool/synthetic.hpp"
#include "hibpool/training.hpp"
#include "hibpool/tudataset.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace hibpool;
using namespace hibpool::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome modularity_forms() {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> size(2, 8);
  std::size_t graphs = 0, partitions = 0;
  double worst = 0.0;
  auto check = [&](const Graph& g, const std::vector<std::size_t>& labels) {
    const Partition p = Partition::from_assignment(labels);
    const double pair = oracle_modularity(g, labels);
    worst = std::max(worst, std::abs(community_modularity(g, p) - pair));
    worst = std::max(worst, std::abs(modularity(g, p) - pair));
    ++partitions;
  };
  while (graphs < 120) {
    const std::size_t n = size(rng);
    const Graph g = random_graph(n, 0.45, rng);
    if (g.num_edges() == 0) continue;
    ++graphs;
    if (n <= 6) {
      for_each_set_partition(n, [&](const std::vector<std::size_t>& labels) { check(g, labels); });
    } else {
      std::uniform_int_distribution<std::size_t> label(0, n - 1);
      for (int t = 0; t < 500; ++t) {
        std::vector<std::size_t> labels(n);
        for (auto& l : labels) l = label(rng);
        check(g, labels);
      }
    }
  }
  return {worst <= 1e-9, std::to_string(graphs) + " graphs, " + std::to_string(partitions) +
                             " partitions, max |pair - community| = " + fmt(worst)};
}

Outcome louvain_optimality() {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<std::size_t> size(3, 7);
  std::size_t misses = 0;
  double worst_gap = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    const std::size_t n = size(rng);
    const Graph g = random_connected_graph(n, 0.4, rng);
    double best = -1.0;
    for_each_set_partition(n, [&](const std::vector<std::size_t>& labels) {
      best = std::max(best, oracle_modularity(g, labels));
    });
    const Partition p = louvain(g, 0.5, derive_seed(0, {tag(SeedStream::kLouvain), i}));
    const double gap = best - modularity(g, p);
    worst_gap = std::max(worst_gap, gap);
    if (gap > 0.02) ++misses;
  }
  const Graph karate = karate_club_graph();
  const double q = modularity(karate, louvain(karate, 0.5, derive_seed(0, {tag(SeedStream::kLouvain), 0})));
  std::size_t above = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) above += modularity(karate, louvain(karate, 0.5, seed)) >= 0.40;
  return {misses == 0 && q >= 0.40, std::to_string(50 - misses) + "/50 within 0.02 (worst gap " + fmt(worst_gap) +
                                        "), karate Q = " + fmt(q) + " (" + std::to_string(above) +
                                        "/200 other seeds reach 0.40)"};
}

Outcome centrality_oracles() {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<std::size_t> size(1, 8);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Graph g = random_graph(size(rng), 0.45, rng);
    const auto bc = betweenness(g), want_bc = oracle_betweenness(g);
    const auto cc = clustering_coefficient(g), want_cc = oracle_clustering(g);
    for (std::size_t v = 0; v < g.num_nodes(); ++v) {
      worst = std::max({worst, std::abs(bc[v] - want_bc[v]), std::abs(cc[v] - want_cc[v])});
    }
  }
  return {worst <= 1e-9, "100 graphs, max deviation " + fmt(worst)};
}

Outcome gradient_check() {
  PlantedOptions options;
  options.num_graphs = 4;
  options.num_nodes = 8;
  options.intra_degree = 3;
  options.inter_edges = 1;
  const Dataset data = planted_partition_dataset(options, 21);

  ExperimentConfig config;
  config.hidden = 4;
  config.layers = 2;
  config.beta = 0.01;
  const ModelShape shape = shape_for(config, data.feature_dim, data.num_classes);
  ModelParams params = ModelParams::init(shape, 5);
  std::vector<GraphStructure> structures;
  for (std::size_t i = 0; i < data.graphs.size(); ++i) {
    structures.push_back(build_structure(data.graphs[i], structure_options(config, derive_seed(1, {i}))));
  }

  auto total_loss = [&](const ModelParams& p) {
    Var total;
    for (std::size_t i = 0; i < data.graphs.size(); ++i) {
      const ForwardResult f = forward(p, structures[i], data.graphs[i].features());
      const Var l = ib_loss(f, p, structures[i], data.graphs[i].label(), config.beta, derive_seed(2, {i})).total;
      total = i == 0 ? l : ad::add(total, l);
    }
    return total;
  };

  ad::backward(total_loss(params));
  constexpr double step = 1e-4;
  double worst = 0.0;
  std::string worst_name;
  auto named = params.named();
  for (auto& [name, tensor] : named) {
    const Matrix analytic = tensor.grad();
    double diff = 0.0;
    for (std::size_t i = 0; i < tensor.value().size(); ++i) {
      ad::NoGradGuard no_grad;
      const double original = tensor.value().data()[i];
      tensor.mutable_value().data()[i] = original + step;
      const double up = total_loss(params).item();
      tensor.mutable_value().data()[i] = original - step;
      const double down = total_loss(params).item();
      tensor.mutable_value().data()[i] = original;
      const double numeric = (up - down) / (2 * step);
      diff += (numeric - analytic.data()[i]) * (numeric - analytic.data()[i]);
    }
    double rel = 0.0;
    if (diff > 0.0) {
      double norm_a = 0.0;
      for (double g : analytic.data()) norm_a += g * g;
      rel = std::sqrt(diff) / std::max(std::sqrt(norm_a), 1e-12);
    }
    if (rel > worst) {
      worst = rel;
      worst_name = name;
    }
  }
  return {worst <= 1e-3, std::to_string(named.size()) + " tensors, worst relative error " + fmt(worst) +
                             (worst_name.empty() ? "" : " (" + worst_name + ")")};
}

Outcome readout_separation() {
  const Graph c6 = cycle_graph(6);
  const Graph triangles = disjoint_triangles();
  const Partition halves = Partition::from_assignment({0, 0, 0, 1, 1, 1});
  const std::size_t h = 4;
  const Matrix x(6, 1, 1.0);
  const Var w_self = Var::constant(Matrix{{0.7, -0.2, 1.1, 0.4}});
  const Var w_neighbor = Var::constant(Matrix{{0.3, 0.5, -0.6, 0.9}});
  auto embed = [&](const Graph& g) {
    return mpn_forward(Var::constant(x), Var::constant(dense_adjacency(g)), w_self, w_neighbor);
  };
  const Var z1 = embed(c6), z2 = embed(triangles);

  const CommunityStatistics s1 = community_statistics(z1, halves), s2 = community_statistics(z2, halves);
  const bool plain_equal = s1.sum.value() == s2.sum.value() && s1.mean.value() == s2.mean.value() &&
                           s1.max.value() == s2.max.value() && s1.min.value() == s2.min.value();

  auto degree_only = [&](const Graph& g) {
    const Matrix c = centrality_matrix(g);
    Matrix d(c.rows(), 1);
    for (std::size_t v = 0; v < c.rows(); ++v) d(v, 0) = c(v, 0);
    return normalize_centralities(d, halves);
  };
  const bool degree_equal = scale_embeddings(z1, degree_only(c6)).value() ==
                            scale_embeddings(z2, degree_only(triangles)).value();

  const Matrix c1 = normalize_centralities(centrality_matrix(c6), halves);
  const Matrix c2 = normalize_centralities(centrality_matrix(triangles), halves);
  std::size_t differ = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    NormalSampler normal(seed);
    auto draw = [&](std::size_t r, std::size_t c) {
      Matrix m(r, c);
      for (double& v : m.data()) v = normal();
      return Var::constant(m);
    };
    const ReadoutMlp mlp{draw(4 * h * (kNumCentralities + 1), 2 * h), draw(1, 2 * h), draw(2 * h, 2 * h),
                         draw(1, 2 * h)};
    const double gap = max_abs_diff(dip_readout(z1, c1, halves, mlp).value(), dip_readout(z2, c2, halves, mlp).value());
    if (gap > 1e-12) ++differ;
  }
  return {plain_equal && degree_equal && differ == 10,
          std::string("plain statistics ") + (plain_equal ? "equal" : "differ") + ", degree scaling " +
              (degree_equal ? "equal" : "differs") + ", DiP outputs differ for " + std::to_string(differ) + "/10 seeds"};
}

Outcome permutation_invariance() {
  const Dataset data = *builtin_dataset("planted");
  ExperimentConfig config;
  const ModelParams params = ModelParams::init(shape_for(config, data.feature_dim, data.num_classes), 3);
  std::mt19937_64 rng(16);
  double worst = 0.0;
  for (std::size_t gi = 0; gi < 20; ++gi) {
    const Graph& g = data.graphs[gi];
    const StructureOptions options = structure_options(config, derive_seed(config.seed, {tag(SeedStream::kLouvain), gi}));
    const Matrix base = forward(params, build_structure(g, options), g.features()).logits.value();
    for (int t = 0; t < 20; ++t) {
      const Graph p = g.permuted(random_permutation(g.num_nodes(), rng));
      worst = std::max(worst, max_abs_diff(base, forward(params, build_structure(p, options), p.features()).logits.value()));
    }
  }
  return {worst <= 1e-9, "400 permuted graphs, max logit deviation " + fmt(worst)};
}

Outcome ib_closed_forms() {
  double worst_log_n = 0.0;
  NormalSampler normal(17);
  for (std::size_t n : {1u, 2u, 3u, 8u, 40u}) {
    Matrix mu(1, 3), var(1, 3), prev_mu(n, 3), prev_var(n, 3);
    for (std::size_t c = 0; c < 3; ++c) {
      mu(0, c) = normal();
      var(0, c) = 0.1 + std::abs(normal());
      for (std::size_t r = 0; r < n; ++r) {
        prev_mu(r, c) = mu(0, c);
        prev_var(r, c) = var(0, c);
      }
    }
    const Var x = Var::constant(Matrix{{normal(), normal(), normal()}});
    const double term = mi_upper_bound_at(x, {Var::constant(mu), Var::constant(var), 0},
                                          {Var::constant(prev_mu), Var::constant(prev_var), 0},
                                          Partition::single_community(n))
                            .item();
    worst_log_n = std::max(worst_log_n, std::abs(term + std::log(static_cast<double>(n))));
  }

  const GaussianBundle current{Var::constant(Matrix{{0.0}}), Var::constant(Matrix{{0.01}}), 0};
  const Var sample = reparameterized_sample(current.mu, current.var, Matrix{{0.0}});
  const double ratio = mi_upper_bound_at(sample, current, standard_normal_prior(1, 1), Partition::single_community(1)).item();
  const double ratio_error = std::abs(ratio - 0.5 * std::log(1.0 / 0.01));

  const Dataset data = *builtin_dataset("planted");
  ExperimentConfig config;
  const ModelParams params = ModelParams::init(shape_for(config, data.feature_dim, data.num_classes), 7);
  bool bit_exact = true;
  for (std::size_t gi = 0; gi < 5; ++gi) {
    const Graph& g = data.graphs[gi];
    const GraphStructure s = build_structure(g, structure_options(config, gi));
    const ForwardResult f = forward(params, s, g.features());
    const double total = ib_loss(f, params, s, g.label(), 0.0, 3).total.item();
    const double ce = cross_entropy_loss(f.summary, params.w_out, g.label()).item();
    bit_exact = bit_exact && total == ce;
  }
  return {worst_log_n <= 1e-9 && ratio_error <= 1e-9 && bit_exact,
          "-log n error " + fmt(worst_log_n) + ", density-ratio error " + fmt(ratio_error) + ", beta=0 total " +
              (bit_exact ? "==" : "!=") + " cross-entropy"};
}

Outcome desk_scale_learning() {
  const Dataset data = *builtin_dataset("planted");
  ExperimentConfig base;
  base.dataset = "planted";
  base.jobs = 1;
  const auto variants = ablation_variants(base);
  auto find = [&](const std::string& name) {
    return std::find_if(variants.begin(), variants.end(), [&](const Variant& v) { return v.name == name; })->config;
  };
  const auto start = std::chrono::steady_clock::now();
  const CVResult hib = run_cv(find("HIBPool"), data);
  const double hib_seconds = seconds_since(start);
  const CVResult random = run_cv(find("RandomPool w/ IB"), data);
  const bool pass = hib.mean >= 0.95 && hib_seconds <= 600.0 && random.mean <= hib.mean - 0.10;
  return {pass, "HIBPool " + fmt(hib.mean) + " +- " + fmt(hib.std) + " in " + fmt(hib_seconds, 3) + " s, RandomPool " +
                    fmt(random.mean) + " +- " + fmt(random.std)};
}

Outcome robustness_ordering() {
  const Dataset data = *builtin_dataset("planted");
  double hib_loss = 0.0, plain_loss = 0.0;
  std::string per_seed;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    ExperimentConfig base;
    base.dataset = "planted";
    base.seed = seed;
    base.gammas = {2.0};
    const auto variants = ablation_variants(base);
    auto relative_loss = [&](const std::string& name) {
      const ExperimentConfig c =
          std::find_if(variants.begin(), variants.end(), [&](const Variant& v) { return v.name == name; })->config;
      const CVResult cv = run_cv(c, data);
      const auto rows = robustness_sweep(c, data, cv);
      return rows[0].mean > 0.0 ? (rows[0].mean - rows[1].mean) / rows[0].mean : 0.0;
    };
    const double h = relative_loss("HIBPool");
    const double p = relative_loss("HPool (DiP-Readout) w/o IB");
    hib_loss += h / 3.0;
    plain_loss += p / 3.0;
    per_seed += " [seed " + std::to_string(seed) + ": " + fmt(h) + " vs " + fmt(p) + "]";
  }
  std::string proteins = "PROTEINS run skipped: set HIBPOOL_PROTEINS_DIR to a TU directory";
  bool proteins_ok = true;
  if (const char* dir = std::getenv("HIBPOOL_PROTEINS_DIR")) {
    ExperimentConfig c;
    c.dataset = dir;
    const CVResult cv = run_cv(c, load_tudataset(dir));
    proteins = "PROTEINS " + fmt(cv.mean) + " +- " + fmt(cv.std);
    proteins_ok = cv.fold_accuracies.size() == kNumFolds;
  }
  return {hib_loss < plain_loss && proteins_ok, "relative loss at gamma 2: beta=0.01 " + fmt(hib_loss) + ", beta=0 " +
                                                    fmt(plain_loss) + per_seed + "; " + proteins};
}

Outcome ablate_determinism() {
  PlantedOptions options;
  options.num_graphs = 40;
  options.num_nodes = 12;
  options.intra_degree = 4;
  options.inter_edges = 2;
  const fs::path root = temp_dir("acceptance_ablate");
  const fs::path data = root / "PLANTED40";
  save_tudataset(planted_partition_dataset(options, 3), data);
  auto run = [&](const std::string& tag) {
    const fs::path out = root / tag;
    std::ostringstream sink, err;
    const int code = cli::main_entry({"ablate", "--dataset", data.string(), "--seed", "5", "--epochs", "6", "--hidden",
                                      "8", "--out", out.string()},
                                     sink, err);
    if (code != 0) throw std::runtime_error("ablate failed: " + err.str());
    std::ifstream in(out / "ablation.csv", std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const std::string a = run("a"), b = run("b");
  const auto rows = std::count(a.begin(), a.end(), '\n');
  return {!a.empty() && a == b, std::to_string(rows) + " lines, " + (a == b ? "byte-identical" : "differ")};
}

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "modularity pair-sum vs community-sum", modularity_forms},
      {2, "Louvain optimality", louvain_optimality},
      {3, "centrality oracles", centrality_oracles},
      {4, "gradient check", gradient_check},
      {5, "readout separation", readout_separation},
      {6, "permutation invariance", permutation_invariance},
      {7, "IB closed forms", ib_closed_forms},
      {8, "desk-scale learning", desk_scale_learning},
      {9, "robustness ordering", robustness_ordering},
      {10, "ablate determinism", ablate_determinism},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hibpool acceptance suite"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "Criteria to run (default: all)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  int failures = 0;
  for (const auto& c : criteria()) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail << " ["
              << fmt(seconds_since(start), 3) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
