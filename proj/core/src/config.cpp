#include "hibpool/config.hpp"

#include <cstdio>

#include "hibpool/error.hpp"

namespace hibpool {

std::string to_string(ReadoutKind kind) { return kind == ReadoutKind::kDiP ? "dip" : "mean"; }

std::string to_string(AssignmentKind kind) {
  switch (kind) {
    case AssignmentKind::kLouvain: return "louvain";
    case AssignmentKind::kRandom: return "random";
    case AssignmentKind::kGlobal: return "global";
  }
  return "louvain";
}

ReadoutKind parse_readout(const std::string& text) {
  if (text == "dip") return ReadoutKind::kDiP;
  if (text == "mean") return ReadoutKind::kMean;
  throw ArgumentError("unknown readout '" + text + "' (expected dip|mean)");
}

AssignmentKind parse_assignment(const std::string& text) {
  if (text == "louvain") return AssignmentKind::kLouvain;
  if (text == "random") return AssignmentKind::kRandom;
  if (text == "global") return AssignmentKind::kGlobal;
  throw ArgumentError("unknown assignment '" + text + "' (expected louvain|random|global)");
}

double ExperimentConfig::alpha_for_layer(std::size_t layer) const {
  if (alphas.empty()) return 0.5;
  return alphas[std::min(layer, alphas.size() - 1)];
}

void ExperimentConfig::validate() const {
  if (layers < 1) throw ArgumentError("layers must be >= 1");
  if (hidden < 1) throw ArgumentError("hidden must be >= 1");
  if (!(beta >= 0.0)) throw ArgumentError("beta must be >= 0");
  if (!(lr > 0.0)) throw ArgumentError("lr must be > 0");
  if (epochs < 1) throw ArgumentError("epochs must be >= 1");
  if (mi_samples < 1) throw ArgumentError("mi_samples must be >= 1");
  if (louvain_restarts < 1) throw ArgumentError("louvain_restarts must be >= 1");
  if (jobs < 1) throw ArgumentError("jobs must be >= 1");
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) throw ArgumentError("every alpha must lie in (0, 1)");
  }
  for (double g : gammas) {
    if (!(g >= 0.0)) throw ArgumentError("every gamma must be >= 0");
  }
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {
      {"dataset", c.dataset},
      {"layers", c.layers},
      {"hidden", c.hidden},
      {"beta", c.beta},
      {"lr", c.lr},
      {"epochs", c.epochs},
      {"patience", c.patience},
      {"seed", c.seed},
      {"readout", to_string(c.readout)},
      {"ib", c.ib_enabled},
      {"assignment", to_string(c.assignment)},
      {"alphas", c.alphas},
      {"gammas", c.gammas},
      {"per_layer_readout_weight", c.per_layer_readout_weight},
      {"louvain_restarts", c.louvain_restarts},
      {"mi_samples", c.mi_samples},
      {"jobs", c.jobs},
  };
}

ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig c) {
  if (!j.is_object()) throw ArgumentError("config: expected a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "dataset") c.dataset = value.get<std::string>();
      else if (key == "layers") c.layers = value.get<std::size_t>();
      else if (key == "hidden") c.hidden = value.get<std::size_t>();
      else if (key == "beta") c.beta = value.get<double>();
      else if (key == "lr") c.lr = value.get<double>();
      else if (key == "epochs") c.epochs = value.get<std::size_t>();
      else if (key == "patience") c.patience = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "readout") c.readout = parse_readout(value.get<std::string>());
      else if (key == "ib") c.ib_enabled = value.is_boolean() ? value.get<bool>() : value.get<std::string>() == "on";
      else if (key == "assignment") c.assignment = parse_assignment(value.get<std::string>());
      else if (key == "alphas") c.alphas = value.get<std::vector<double>>();
      else if (key == "gammas") c.gammas = value.get<std::vector<double>>();
      else if (key == "per_layer_readout_weight") c.per_layer_readout_weight = value.get<bool>();
      else if (key == "louvain_restarts") c.louvain_restarts = value.get<std::size_t>();
      else if (key == "mi_samples") c.mi_samples = value.get<std::size_t>();
      else if (key == "jobs") c.jobs = value.get<std::size_t>();
      else throw ArgumentError("config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("config: ") + e.what());
  }
  return c;
}

std::string config_hash(const ExperimentConfig& config) {
  auto j = to_json(config);
  j.erase("jobs");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace hibpool
