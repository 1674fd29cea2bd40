#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "hibpool/config.hpp"
#include "hibpool/graph.hpp"
#include "hibpool/ib.hpp"
#include "hibpool/model.hpp"

namespace hibpool {

/// Per-graph layer structures for one run, computed on first use. Safe for concurrent use.
class StructureCache {
 public:
  StructureCache(const Dataset& dataset, const ExperimentConfig& config);

  std::shared_ptr<const GraphStructure> get(std::size_t graph_index);
  const Dataset& dataset() const noexcept { return dataset_; }
  const ExperimentConfig& config() const noexcept { return config_; }

 private:
  const Dataset& dataset_;
  ExperimentConfig config_;
  std::mutex mutex_;
  std::unordered_map<std::size_t, std::shared_ptr<const GraphStructure>> entries_;
};

struct EpochRecord {
  std::size_t fold = 0;
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double ce = 0.0;
  double ib = 0.0;
  double val_acc = 0.0;
};

nlohmann::json to_json(const EpochRecord& record);

struct TrainHooks {
  /// Called with the dataset index of every graph a training run reads.
  std::function<void(std::size_t)> on_graph_access;
  std::function<void(const EpochRecord&)> on_epoch;
  /// Called after every optimizer step with the fold's current parameters.
  std::function<void(std::size_t step, const ModelParams&)> on_step;
};

struct FoldResult {
  std::size_t fold = 0;
  ModelParams params;  // best-validation checkpoint
  double best_val_accuracy = 0.0;
  std::size_t best_epoch = 0;
  double test_accuracy = 0.0;
  std::vector<EpochRecord> curve;
};

/// One optimizer step per graph, graphs shuffled every epoch. Keeps the parameters of the
/// epoch with the highest validation accuracy (earliest on ties) and stops after `patience`
/// epochs without improvement. Throws DivergenceError on a non-finite loss.
FoldResult train_fold(const ExperimentConfig& config, StructureCache& cache, const Fold& fold,
                      std::size_t fold_index, const TrainHooks& hooks = {});

/// Optional feature noise applied at evaluation time.
struct Perturbation {
  double gamma = 0.0;
  std::uint64_t seed = 0;
};

/// Fraction of graphs whose argmax prediction equals the label. Empty input gives 0.
double evaluate(const ModelParams& params, StructureCache& cache, std::span<const std::size_t> indices,
                std::optional<Perturbation> perturbation = std::nullopt);

struct CVResult {
  std::vector<double> fold_accuracies;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  std::string config_hash;
  double wall_seconds = 0.0;
  std::vector<FoldResult> folds;
  FoldPlan plan;
};

/// Mean and population standard deviation.
std::pair<double, double> mean_std(std::span<const double> values);

/// Ten-fold cross-validation; folds run on up to `config.jobs` threads.
CVResult run_cv(const ExperimentConfig& config, const Dataset& dataset, const TrainHooks& hooks = {});

struct RobustnessRow {
  double gamma = 0.0;
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> fold_accuracies;
};

/// Re-evaluates every fold's checkpoint on its test split with perturbed features,
/// one row per gamma in {0} followed by `config.gammas`.
std::vector<RobustnessRow> robustness_sweep(const ExperimentConfig& config, const Dataset& dataset,
                                            const CVResult& cv);

struct Variant {
  std::string name;
  ExperimentConfig config;
};

/// HPool (Mean) w/o IB, HPool (DiP-Readout) w/o IB, GlobalPool w/ IB, RandomPool w/ IB,
/// HIBPool (Mean), HIBPool, MHIBPool.
std::vector<Variant> ablation_variants(const ExperimentConfig& base);

/// Per-layer resolutions used for MHIBPool when none are given explicitly.
std::vector<double> default_multiscale_alphas(std::size_t layers);

struct VariantResult {
  std::string name;
  ExperimentConfig config;
  CVResult cv;
};

std::vector<VariantResult> ablation_grid(const ExperimentConfig& base, const Dataset& dataset);

struct ResultRow {
  std::string variant;
  std::string dataset;
  double gamma = 0.0;
  double mean_acc = 0.0;
  double std_acc = 0.0;
  std::uint64_t seed = 0;
  std::string config_hash;
};

/// Header `variant,dataset,gamma,mean_acc,std_acc,seed,config_hash`, then one line per row.
void write_results_csv(std::ostream& out, std::span<const ResultRow> rows);

}  // namespace hibpool
