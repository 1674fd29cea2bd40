#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace hibpool {

enum class ReadoutKind { kDiP, kMean };
enum class AssignmentKind { kLouvain, kRandom, kGlobal };

std::string to_string(ReadoutKind kind);
std::string to_string(AssignmentKind kind);
ReadoutKind parse_readout(const std::string& text);
AssignmentKind parse_assignment(const std::string& text);

/// Every knob of a reproducible run.
struct ExperimentConfig {
  std::string dataset;
  std::size_t layers = 2;
  std::size_t hidden = 64;
  double beta = 0.01;
  double lr = 0.01;
  std::size_t epochs = 100;
  std::size_t patience = 25;
  std::uint64_t seed = 0;
  ReadoutKind readout = ReadoutKind::kDiP;
  bool ib_enabled = true;
  AssignmentKind assignment = AssignmentKind::kLouvain;
  std::vector<double> alphas = {0.5, 0.5};
  std::vector<double> gammas = {0.5, 1.0, 1.5, 2.0};
  /// One readout weight per layer instead of a single shared one.
  bool per_layer_readout_weight = false;
  std::size_t louvain_restarts = 1;
  std::size_t mi_samples = 1;
  /// Concurrent fold workers; never affects results.
  std::size_t jobs = 1;

  /// Resolution for layer `layer` (0-based); the last alpha repeats for deeper layers.
  double alpha_for_layer(std::size_t layer) const;
  double effective_beta() const { return ib_enabled ? beta : 0.0; }

  /// Throws ArgumentError on out-of-range values.
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Fields absent from `j` keep the values already in `base`. Unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});

/// FNV-1a over the canonical JSON of every result-affecting field, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace hibpool
