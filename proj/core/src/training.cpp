#include "hibpool/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <sstream>
#include <thread>

#include "hibpool/error.hpp"
#include "hibpool/rng.hpp"

namespace hibpool {

StructureCache::StructureCache(const Dataset& dataset, const ExperimentConfig& config)
    : dataset_(dataset), config_(config) {}

std::shared_ptr<const GraphStructure> StructureCache::get(std::size_t graph_index) {
  if (graph_index >= dataset_.size()) {
    throw ArgumentError("graph index " + std::to_string(graph_index) + " out of range");
  }
  {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(graph_index); it != entries_.end()) return it->second;
  }
  const std::uint64_t graph_seed = derive_seed(config_.seed, {tag(SeedStream::kLouvain), graph_index});
  auto built = std::make_shared<const GraphStructure>(
      build_structure(dataset_.graphs[graph_index], structure_options(config_, graph_seed)));
  std::lock_guard lock(mutex_);
  return entries_.try_emplace(graph_index, std::move(built)).first->second;
}

nlohmann::json to_json(const EpochRecord& record) {
  return {{"fold", record.fold},         {"epoch", record.epoch}, {"train_loss", record.train_loss},
          {"ce", record.ce},             {"ib", record.ib},       {"val_acc", record.val_acc}};
}

FoldResult train_fold(const ExperimentConfig& config, StructureCache& cache, const Fold& fold,
                      std::size_t fold_index, const TrainHooks& hooks) {
  config.validate();
  const Dataset& dataset = cache.dataset();
  if (fold.train.empty()) throw ArgumentError("fold " + std::to_string(fold_index) + " has no training graphs");

  const ModelShape shape = shape_for(config, dataset.feature_dim, dataset.num_classes);
  ModelParams params = ModelParams::init(shape, derive_seed(config.seed, {tag(SeedStream::kInit), fold_index}));
  ad::Adam optimizer(params.parameters(), {.lr = config.lr});

  const std::span<const std::size_t> val_set = fold.val.empty() ? fold.train : fold.val;
  const double beta = config.effective_beta();

  FoldResult result;
  result.fold = fold_index;
  result.params = params.clone();
  double best_val = -1.0;
  std::size_t since_best = 0;
  std::size_t step = 0;

  std::vector<std::size_t> order = fold.train;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng(derive_seed(config.seed, {tag(SeedStream::kShuffle), fold_index, epoch}));
    shuffle_in_place(std::span(order), rng);

    EpochRecord record{.fold = fold_index, .epoch = epoch};
    for (std::size_t position = 0; position < order.size(); ++position) {
      const std::size_t index = order[position];
      if (hooks.on_graph_access) hooks.on_graph_access(index);
      const Graph& graph = dataset.graphs[index];
      const auto structure = cache.get(index);

      const ForwardResult fwd = forward(params, *structure, graph.features());
      const std::uint64_t sample_seed =
          derive_seed(config.seed, {tag(SeedStream::kSample), fold_index, epoch, position});
      const IbLoss loss = ib_loss(fwd, params, *structure, graph.label(), beta, sample_seed, config.mi_samples);
      if (!std::isfinite(loss.report.total)) {
        throw DivergenceError("loss diverged at fold " + std::to_string(fold_index) + ", epoch " +
                              std::to_string(epoch) + ", graph " + std::to_string(index));
      }
      optimizer.zero_grad();
      ad::backward(loss.total);
      optimizer.step();
      if (hooks.on_step) hooks.on_step(step, params);
      ++step;

      record.train_loss += loss.report.total;
      record.ce += loss.report.cross_entropy;
      record.ib += loss.report.ib_term;
    }
    const auto n = static_cast<double>(order.size());
    record.train_loss /= n;
    record.ce /= n;
    record.ib /= n;
    record.val_acc = evaluate(params, cache, val_set);
    result.curve.push_back(record);
    if (hooks.on_epoch) hooks.on_epoch(record);

    if (record.val_acc > best_val) {
      best_val = record.val_acc;
      result.best_epoch = epoch;
      result.params = params.clone();
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  result.best_val_accuracy = best_val;
  result.test_accuracy = evaluate(result.params, cache, fold.test);
  return result;
}

double evaluate(const ModelParams& params, StructureCache& cache, std::span<const std::size_t> indices,
                std::optional<Perturbation> perturbation) {
  if (indices.empty()) return 0.0;
  const Dataset& dataset = cache.dataset();
  std::size_t correct = 0;
  for (const std::size_t index : indices) {
    const Graph& graph = dataset.graphs[index];
    const auto structure = cache.get(index);
    std::size_t predicted = 0;
    if (perturbation && perturbation->gamma > 0.0) {
      const Matrix noisy = perturb_features(
          graph.features(), perturbation->gamma, derive_seed(perturbation->seed, {index}));
      predicted = predict(params, *structure, noisy);
    } else {
      predicted = predict(params, *structure, graph.features());
    }
    if (predicted == graph.label()) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(indices.size());
}

std::pair<double, double> mean_std(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (const double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  return {mean, std::sqrt(var)};
}

namespace {

// Runs task(i) for i in [0, count) on up to `jobs` threads; rethrows the first failure.
template <typename Task>
void parallel_for(std::size_t count, std::size_t jobs, Task&& task) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& worker : workers) worker.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

CVResult run_cv(const ExperimentConfig& config, const Dataset& dataset, const TrainHooks& hooks) {
  config.validate();
  dataset.validate();
  const auto start = std::chrono::steady_clock::now();

  CVResult cv;
  cv.config_hash = config_hash(config);
  cv.plan = stratified_kfold(dataset, derive_seed(config.seed, {tag(SeedStream::kFolds)}));
  StructureCache cache(dataset, config);

  cv.folds.resize(cv.plan.folds.size());
  std::mutex hook_mutex;
  TrainHooks guarded;
  if (hooks.on_graph_access) {
    guarded.on_graph_access = [&](std::size_t i) {
      std::lock_guard lock(hook_mutex);
      hooks.on_graph_access(i);
    };
  }
  if (hooks.on_epoch) {
    guarded.on_epoch = [&](const EpochRecord& r) {
      std::lock_guard lock(hook_mutex);
      hooks.on_epoch(r);
    };
  }
  if (hooks.on_step) {
    guarded.on_step = [&](std::size_t s, const ModelParams& p) {
      std::lock_guard lock(hook_mutex);
      hooks.on_step(s, p);
    };
  }
  parallel_for(cv.plan.folds.size(), config.jobs, [&](std::size_t i) {
    cv.folds[i] = train_fold(config, cache, cv.plan.folds[i], i, guarded);
  });

  for (const auto& fold : cv.folds) cv.fold_accuracies.push_back(fold.test_accuracy);
  std::tie(cv.mean, cv.std) = mean_std(cv.fold_accuracies);
  cv.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return cv;
}

std::vector<RobustnessRow> robustness_sweep(const ExperimentConfig& config, const Dataset& dataset,
                                            const CVResult& cv) {
  if (cv.folds.size() != cv.plan.folds.size()) throw ArgumentError("CV result has no trained folds");
  StructureCache cache(dataset, config);
  std::vector<double> gammas = {0.0};
  for (const double g : config.gammas) {
    if (g < 0.0) throw ArgumentError("gamma must be non-negative");
    if (g != 0.0) gammas.push_back(g);
  }

  std::vector<RobustnessRow> rows;
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    RobustnessRow row;
    row.gamma = gammas[gi];
    for (std::size_t f = 0; f < cv.folds.size(); ++f) {
      if (gammas[gi] == 0.0) {
        row.fold_accuracies.push_back(cv.folds[f].test_accuracy);
        continue;
      }
      const Perturbation noise{gammas[gi], derive_seed(config.seed, {tag(SeedStream::kPerturb), f, gi})};
      row.fold_accuracies.push_back(evaluate(cv.folds[f].params, cache, cv.plan.folds[f].test, noise));
    }
    std::tie(row.mean, row.std) = mean_std(row.fold_accuracies);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> default_multiscale_alphas(std::size_t layers) {
  if (layers <= 1) return {0.5};
  std::vector<double> alphas(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    const double t = static_cast<double>(l) / static_cast<double>(layers - 1);
    alphas[l] = 0.4 * (1.0 - t) + 0.6 * t;
  }
  return alphas;
}

std::vector<Variant> ablation_variants(const ExperimentConfig& base) {
  auto make = [&](ReadoutKind readout, bool ib, AssignmentKind assignment) {
    ExperimentConfig c = base;
    c.readout = readout;
    c.ib_enabled = ib;
    c.assignment = assignment;
    c.alphas = std::vector<double>(c.layers, 0.5);
    return c;
  };
  std::vector<Variant> variants;
  variants.push_back({"HPool (Mean) w/o IB", make(ReadoutKind::kMean, false, AssignmentKind::kLouvain)});
  variants.push_back({"HPool (DiP-Readout) w/o IB", make(ReadoutKind::kDiP, false, AssignmentKind::kLouvain)});
  ExperimentConfig global = make(ReadoutKind::kMean, true, AssignmentKind::kGlobal);
  global.layers = 1;
  global.alphas = {0.5};
  variants.push_back({"GlobalPool w/ IB", global});
  variants.push_back({"RandomPool w/ IB", make(ReadoutKind::kDiP, true, AssignmentKind::kRandom)});
  variants.push_back({"HIBPool (Mean)", make(ReadoutKind::kMean, true, AssignmentKind::kLouvain)});
  variants.push_back({"HIBPool", make(ReadoutKind::kDiP, true, AssignmentKind::kLouvain)});

  ExperimentConfig multi = make(ReadoutKind::kDiP, true, AssignmentKind::kLouvain);
  const bool distinct = std::adjacent_find(base.alphas.begin(), base.alphas.end(),
                                           std::not_equal_to<>()) != base.alphas.end();
  multi.alphas = distinct ? base.alphas : default_multiscale_alphas(multi.layers);
  variants.push_back({"MHIBPool", multi});
  return variants;
}

std::vector<VariantResult> ablation_grid(const ExperimentConfig& base, const Dataset& dataset) {
  std::vector<VariantResult> results;
  for (auto& variant : ablation_variants(base)) {
    CVResult cv = run_cv(variant.config, dataset);
    results.push_back({variant.name, variant.config, std::move(cv)});
  }
  return results;
}

namespace {

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (const char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

}  // namespace

void write_results_csv(std::ostream& out, std::span<const ResultRow> rows) {
  out << "variant,dataset,gamma,mean_acc,std_acc,seed,config_hash\n";
  std::ostringstream line;
  line << std::setprecision(10);
  for (const auto& row : rows) {
    line.str("");
    line << csv_field(row.variant) << ',' << csv_field(row.dataset) << ',' << row.gamma << ',' << row.mean_acc
         << ',' << row.std_acc << ',' << row.seed << ',' << row.config_hash << '\n';
    out << line.str();
  }
}

}  // namespace hibpool
