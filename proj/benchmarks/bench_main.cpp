#include <benchmark/benchmark.h>

#include "hibpool/centrality.hpp"
#include "hibpool/community.hpp"
#include "hibpool/ib.hpp"
#include "hibpool/model.hpp"
#include "hibpool/synthetic.hpp"

using namespace hibpool;

namespace {

Dataset planted(std::size_t nodes) {
  PlantedOptions options;
  options.num_graphs = 2;
  options.num_nodes = nodes;
  return planted_partition_dataset(options, 1);
}

void BM_LouvainKarate(benchmark::State& state) {
  const Graph g = karate_club_graph();
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(louvain(g, 0.5, seed++));
}
BENCHMARK(BM_LouvainKarate);

void BM_LouvainPlanted(benchmark::State& state) {
  const Graph g = planted(static_cast<std::size_t>(state.range(0))).graphs[1];
  for (auto _ : state) benchmark::DoNotOptimize(louvain(g, 0.5, 0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LouvainPlanted)->RangeMultiplier(2)->Range(24, 384)->Complexity();

void BM_Betweenness(benchmark::State& state) {
  const Graph g = planted(static_cast<std::size_t>(state.range(0))).graphs[1];
  for (auto _ : state) benchmark::DoNotOptimize(betweenness(g));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Betweenness)->RangeMultiplier(2)->Range(24, 384)->Complexity();

void BM_ForwardBackward(benchmark::State& state) {
  const Graph g = planted(24).graphs[1];
  ExperimentConfig config;
  config.hidden = static_cast<std::size_t>(state.range(0));
  const ModelParams params = ModelParams::init(shape_for(config, g.features().cols(), 2), 1);
  const GraphStructure structure = build_structure(g, structure_options(config, 0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const ForwardResult f = forward(params, structure, g.features());
    const IbLoss loss = ib_loss(f, params, structure, g.label(), config.beta, seed++);
    ad::backward(loss.total);
    for (auto p : params.parameters()) p.zero_grad();
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(16)->Arg(64);

}  // namespace
BENCHMARK_MAIN();
