#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hibpool/checkpoint.hpp"
#include "hibpool/community.hpp"
#include "hibpool/model.hpp"
#include "hibpool/rng.hpp"
#include "hibpool/synthetic.hpp"
#include "hibpool/training.hpp"
#include "hibpool/tudataset.hpp"

namespace hibpool::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommandInfo {
  const char* name;
  const char* description;
};

constexpr CommandInfo kCommands[] = {
    {"train", "10-fold cross-validation; writes results.csv, cv.json, train_log.jsonl, checkpoints"},
    {"eval", "Evaluate a checkpoint on a dataset, optionally under feature perturbation"},
    {"ablate", "Run every ablation variant; writes ablation.csv"},
    {"perturb", "Train, then re-evaluate test folds under feature noise; writes perturb.csv"},
    {"communities", "Louvain partition of every graph as JSON"},
    {"inspect-dataset", "Dataset summary as JSON"},
};

struct Flags {
  std::string dataset;
  std::string out;
  std::string config_file;
  std::string checkpoint;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> layers, hidden, epochs, patience, jobs;
  std::optional<double> beta, lr;
  std::optional<std::string> readout, ib, assignment;
  std::vector<double> alphas, gammas;
};

void add_flags(CLI::App& sub, Flags& f, const std::string& name) {
  sub.add_option("--dataset", f.dataset, "TU dataset directory or builtin name (toy, karate, planted)");
  sub.add_option("--out", f.out, "Output directory for artifacts");
  sub.add_option("--config", f.config_file, "JSON config; explicit flags take precedence");
  sub.add_option("--seed", f.seed, "Base seed");
  sub.add_option("--layers", f.layers, "Pooling layers");
  sub.add_option("--hidden", f.hidden, "Hidden width");
  sub.add_option("--beta", f.beta, "IB weight");
  sub.add_option("--lr", f.lr, "Adam learning rate");
  sub.add_option("--epochs", f.epochs, "Maximum epochs");
  sub.add_option("--patience", f.patience, "Early-stopping patience");
  sub.add_option("--readout", f.readout, "Readout")->check(CLI::IsMember({"dip", "mean"}));
  sub.add_option("--ib", f.ib, "IB term")->check(CLI::IsMember({"on", "off"}));
  sub.add_option("--assignment", f.assignment, "Community assignment")
      ->check(CLI::IsMember({"louvain", "random", "global"}));
  sub.add_option("--alpha", f.alphas, "Resolution per layer (repeatable)")->allow_extra_args(false);
  sub.add_option("--gamma", f.gammas, "Perturbation ratio (repeatable)")->allow_extra_args(false);
  sub.add_option("--jobs", f.jobs, "Concurrent fold workers");
  if (name == "eval") sub.add_option("--checkpoint", f.checkpoint, "Checkpoint file")->required();
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  try {
    return config_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw UsageError("config file '" + path + "': " + e.what());
  } catch (const ArgumentError& e) {
    throw UsageError("config file '" + path + "': " + e.what());
  }
}

ExperimentConfig merge(const Flags& f) {
  ExperimentConfig c = f.config_file.empty() ? ExperimentConfig{} : load_config_file(f.config_file);
  if (!f.dataset.empty()) c.dataset = f.dataset;
  if (f.seed) c.seed = *f.seed;
  if (f.layers) c.layers = *f.layers;
  if (f.hidden) c.hidden = *f.hidden;
  if (f.beta) c.beta = *f.beta;
  if (f.lr) c.lr = *f.lr;
  if (f.epochs) c.epochs = *f.epochs;
  if (f.patience) c.patience = *f.patience;
  if (f.jobs) c.jobs = *f.jobs;
  if (f.readout) c.readout = parse_readout(*f.readout);
  if (f.ib) c.ib_enabled = *f.ib == "on";
  if (f.assignment) c.assignment = parse_assignment(*f.assignment);
  if (!f.alphas.empty()) c.alphas = f.alphas;
  if (!f.gammas.empty()) c.gammas = f.gammas;
  try {
    c.validate();
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  return c;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write '" + path.string() + "'");
  file << content;
  if (!file) throw Error("failed writing '" + path.string() + "'");
}

std::string fixed(double value, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << value;
  return s.str();
}

/// Ablation variant name when the config matches one, else "custom".
std::string variant_label(const ExperimentConfig& config) {
  const std::string hash = config_hash(config);
  for (const auto& v : ablation_variants(config)) {
    if (config_hash(v.config) == hash) return v.name;
  }
  return "custom";
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream s;
  write_results_csv(s, rows);
  return s.str();
}

json cv_json(const ExperimentConfig& config, const CVResult& cv) {
  json folds = json::array();
  for (const auto& f : cv.folds) {
    folds.push_back({{"fold", f.fold},
                     {"test_accuracy", f.test_accuracy},
                     {"best_val_accuracy", f.best_val_accuracy},
                     {"best_epoch", f.best_epoch},
                     {"epochs_run", f.curve.size()}});
  }
  return {{"config_hash", cv.config_hash}, {"config", to_json(config)},  {"fold_accuracies", cv.fold_accuracies},
          {"mean", cv.mean},               {"std", cv.std},              {"stratified", cv.plan.stratified},
          {"wall_seconds", cv.wall_seconds}, {"folds", folds}};
}

TrainHooks log_hooks(std::ofstream& log, const std::string& hash) {
  TrainHooks hooks;
  hooks.on_epoch = [&log, hash](const EpochRecord& r) {
    json line = to_json(r);
    line["config_hash"] = hash;
    log << line.dump() << '\n';
  };
  return hooks;
}

fs::path out_dir(const Command& c) { return c.out.empty() ? fs::path("hibpool-out") : c.out; }

int run_train(const Command& c, std::ostream& out) {
  const Dataset dataset = resolve_dataset(c.config.dataset);
  const fs::path dir = out_dir(c);
  fs::create_directories(dir / "checkpoints");
  const std::string hash = config_hash(c.config);

  std::ofstream log(dir / "train_log.jsonl");
  const CVResult cv = run_cv(c.config, dataset, log_hooks(log, hash));

  const std::vector<ResultRow> rows = {
      {variant_label(c.config), dataset.name, 0.0, cv.mean, cv.std, c.config.seed, hash}};
  write_file(dir / "results.csv", results_csv(rows));
  write_file(dir / "cv.json", cv_json(c.config, cv).dump(2) + "\n");
  for (const auto& fold : cv.folds) {
    save_checkpoint(dir / "checkpoints" / ("fold" + std::to_string(fold.fold) + ".json"), fold.params, c.config);
  }
  out << "dataset=" << dataset.name << " folds=" << cv.folds.size() << " mean_acc=" << fixed(cv.mean)
      << " std_acc=" << fixed(cv.std) << " config_hash=" << hash << " out=" << dir.string() << '\n';
  return kOk;
}

int run_eval(const Command& c, std::ostream& out) {
  const Checkpoint checkpoint = load_checkpoint(*c.checkpoint);
  ExperimentConfig config = checkpoint.config;
  if (!c.config.dataset.empty()) config.dataset = c.config.dataset;
  const Dataset dataset = resolve_dataset(config.dataset);
  if (dataset.feature_dim != checkpoint.params.shape.input_dim) {
    throw FormatError("dataset feature width " + std::to_string(dataset.feature_dim) +
                      " does not match checkpoint input width " +
                      std::to_string(checkpoint.params.shape.input_dim));
  }
  if (dataset.num_classes > checkpoint.params.shape.num_classes) {
    throw FormatError("dataset has more classes than the checkpoint");
  }

  StructureCache cache(dataset, config);
  std::vector<std::size_t> all(dataset.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  std::vector<double> gammas = {0.0};
  if (c.gammas_set) {
    for (double g : c.config.gammas) {
      if (g > 0.0) gammas.push_back(g);
    }
  }
  json rows = json::array();
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    const Perturbation noise{gammas[gi], derive_seed(config.seed, {tag(SeedStream::kPerturb), gi})};
    rows.push_back({{"gamma", gammas[gi]}, {"accuracy", evaluate(checkpoint.params, cache, all, noise)}});
  }
  const json report = {{"config_hash", config_hash(config)},
                       {"dataset", dataset.name},
                       {"num_graphs", dataset.size()},
                       {"results", rows}};
  if (!c.out.empty()) write_file(c.out / "eval.json", report.dump(2) + "\n");
  out << report.dump(2) << '\n';
  return kOk;
}

int run_ablate(const Command& c, std::ostream& out) {
  const Dataset dataset = resolve_dataset(c.config.dataset);
  std::vector<ResultRow> rows;
  for (const auto& variant : ablation_variants(c.config)) {
    const CVResult cv = run_cv(variant.config, dataset);
    rows.push_back({variant.name, dataset.name, 0.0, cv.mean, cv.std, c.config.seed, cv.config_hash});
    out << std::left << std::setw(28) << variant.name << fixed(cv.mean) << " +- " << fixed(cv.std) << '\n';
  }
  const fs::path dir = out_dir(c);
  write_file(dir / "ablation.csv", results_csv(rows));
  out << "wrote " << (dir / "ablation.csv").string() << '\n';
  return kOk;
}

int run_perturb(const Command& c, std::ostream& out) {
  const Dataset dataset = resolve_dataset(c.config.dataset);
  const CVResult cv = run_cv(c.config, dataset);
  const auto sweep = robustness_sweep(c.config, dataset, cv);
  const std::string label = variant_label(c.config);
  std::vector<ResultRow> rows;
  for (const auto& row : sweep) {
    rows.push_back({label, dataset.name, row.gamma, row.mean, row.std, c.config.seed, cv.config_hash});
    out << "gamma=" << row.gamma << " mean_acc=" << fixed(row.mean) << " std_acc=" << fixed(row.std) << '\n';
  }
  const fs::path dir = out_dir(c);
  write_file(dir / "perturb.csv", results_csv(rows));
  out << "wrote " << (dir / "perturb.csv").string() << '\n';
  return kOk;
}

int run_communities(const Command& c, std::ostream& out) {
  const Dataset dataset = resolve_dataset(c.config.dataset);
  ExperimentConfig config = c.config;
  config.layers = 1;
  config.assignment = AssignmentKind::kLouvain;
  const double alpha = config.alpha_for_layer(0);

  json graphs = json::array();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Graph& graph = dataset.graphs[i];
    const std::uint64_t graph_seed = derive_seed(config.seed, {tag(SeedStream::kLouvain), i});
    const Partition partition = build_structure(graph, structure_options(config, graph_seed)).layers[0].partition;
    json entry = {{"graph_id", i},
                  {"alpha", alpha},
                  {"num_communities", partition.num_communities},
                  {"assignment", partition.assignment}};
    try {
      entry["modularity"] = modularity(graph, partition);
      entry["multiscale_modularity"] = multiscale_modularity(graph, partition, alpha);
    } catch (const UndefinedModularityError&) {
      entry["modularity"] = nullptr;
      entry["multiscale_modularity"] = nullptr;
    }
    graphs.push_back(std::move(entry));
  }
  const json report = {{"config_hash", config_hash(config)}, {"dataset", dataset.name}, {"graphs", graphs}};
  if (!c.out.empty()) write_file(c.out / "communities.json", report.dump(2) + "\n");
  out << report.dump(2) << '\n';
  return kOk;
}

int run_inspect(const Command& c, std::ostream& out) {
  json summary = dataset_summary(resolve_dataset(c.config.dataset));
  summary["config_hash"] = config_hash(c.config);
  if (!c.out.empty()) write_file(c.out / "dataset.json", summary.dump(2) + "\n");
  out << summary.dump(2) << '\n';
  return kOk;
}

}  // namespace

Command parse_args(const std::vector<std::string>& args) {
  CLI::App app{"Hierarchical graph pooling with an information-bottleneck objective", "hibpool"};
  app.require_subcommand(1, 1);
  Flags flags;
  for (const auto& info : kCommands) add_flags(*app.add_subcommand(info.name, info.description), flags, info.name);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  Command command;
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    command.help = true;
    const auto subs = app.get_subcommands();
    command.help_text = subs.empty() ? app.help() : subs.front()->help();
    return command;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  command.name = app.get_subcommands().front()->get_name();
  const bool needs_seed = command.name == "train" || command.name == "ablate" || command.name == "perturb";
  if (needs_seed && !flags.seed) throw UsageError("--seed is required for " + command.name);
  if (command.name != "eval" && flags.dataset.empty() && flags.config_file.empty()) {
    throw UsageError("--dataset is required for " + command.name);
  }
  command.config = merge(flags);
  if (command.name != "eval" && command.config.dataset.empty()) {
    throw UsageError("--dataset is required for " + command.name);
  }
  command.out = flags.out;
  if (!flags.checkpoint.empty()) command.checkpoint = flags.checkpoint;
  command.gammas_set = !flags.gammas.empty();
  return command;
}

int run(const Command& command, std::ostream& out) {
  if (command.help) {
    out << command.help_text;
    return kOk;
  }
  if (command.name == "train") return run_train(command, out);
  if (command.name == "eval") return run_eval(command, out);
  if (command.name == "ablate") return run_ablate(command, out);
  if (command.name == "perturb") return run_perturb(command, out);
  if (command.name == "communities") return run_communities(command, out);
  if (command.name == "inspect-dataset") return run_inspect(command, out);
  throw UsageError("unknown command '" + command.name + "'");
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return run(parse_args(args), out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\nrun 'hibpool --help' for usage\n";
    return kUsage;
  } catch (const ArgumentError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const LoadError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const FormatError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const DivergenceError& e) {
    err << "diverged: " << e.what() << '\n';
    return kDivergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace hibpool::cli
