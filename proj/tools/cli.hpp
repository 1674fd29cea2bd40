#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hibpool/config.hpp"
#include "hibpool/error.hpp"

namespace hibpool::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kDataError = 3,
  kDivergence = 4,
};

class UsageError : public Error {
 public:
  using Error::Error;
};

struct Command {
  std::string name;  // train, eval, ablate, perturb, communities, inspect-dataset
  ExperimentConfig config;
  std::filesystem::path out;
  std::optional<std::filesystem::path> checkpoint;
  /// True when --gamma was given explicitly.
  bool gammas_set = false;
  bool help = false;
  std::string help_text;
};

/// Parses `args` (without the program name). Throws UsageError on bad input.
Command parse_args(const std::vector<std::string>& args);

/// Executes a parsed command, writing human-readable output to `out`.
int run(const Command& command, std::ostream& out);

/// parse_args + run with the exit-code mapping; messages go to `err`.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hibpool::cli
