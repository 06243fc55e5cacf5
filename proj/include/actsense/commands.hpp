#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "actsense/model.hpp"

namespace actsense {

inline constexpr const char* kToolVersion = "1.0.0";

/// Every resolved argument of one run. Serialized into the manifest, so a
/// re-run sees exactly the same values.
struct RunArgs {
  std::string command;  // solve-cmdp | pipeline | qlearn-compare | sweep | simulate
  std::string config;   // path as given; empty means the built-in default model
  std::uint64_t seed = 42;
  int workers = 0;  // 0: OpenMP default
  double tol = 1e-4;  // multiplier search stopping tolerance
  std::optional<double> budget;  // overrides data_budget

  bool lp_dump = false;  // solve-cmdp: also write the LP in CPLEX LP format

  double delta_lambda = 0.01;
  std::optional<double> lambda;  // fixed multiplier instead of bisection
  double lambda_scale = 1.0;

  std::vector<std::uint64_t> seeds;  // qlearn-compare; empty means {seed}
  std::uint64_t iters = 100000;
  double kappa = 0.01;
  bool per_pair_step = false;
  bool project_checkpoints = false;
  bool project_all_states = false;

  std::vector<double> budgets;
  std::vector<int> capacities;
  std::vector<double> charge_probs;
  bool lp_only = false;  // sweep: skip the multiplier search and the mixture per cell

  std::uint64_t epochs = 1000000;
  std::uint64_t warmup = 10000;
};

std::string args_to_json(const RunArgs& args);
/// Throws ModelError naming the offending key.
RunArgs args_from_json(const std::string& text);

/// The model a run uses: the config file (or the default), with --budget applied.
SensingModel resolve_model(const RunArgs& args);

struct RunResult {
  std::vector<std::string> files;  // written CSVs, relative to the output directory
};

/// Runs the command and writes its CSVs plus manifest.json into `out`.
RunResult execute(const RunArgs& args, const SensingModel& model, const std::filesystem::path& out);

struct RerunReport {
  std::vector<std::string> files;
  std::vector<std::string> mismatched;  // hash differs from the manifest, or file missing
  bool identical() const { return mismatched.empty(); }
};

/// Re-executes the run recorded in `manifest` into `out` and compares every
/// recorded output byte for byte (via its FNV-1a hash).
RerunReport rerun_manifest(const std::filesystem::path& manifest, const std::filesystem::path& out);

/// 2 for configuration errors, 1 for everything else.
int exit_code_for(const std::exception& e);
/// One-line JSON error record: {"error": kind, "stage": ..., "key": ..., "message": ...}.
std::string error_record(const std::exception& e);

}  // namespace actsense
