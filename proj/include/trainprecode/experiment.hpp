// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "trainprecode/joint.hpp"

namespace trainprecode {

enum class RunMode { boost, fixed_budgets, full_fledged, precoder_only, none };

RunMode run_mode_from_name(const std::string& name);
const char* run_mode_name(RunMode mode);

struct ExperimentConfig {
  SystemConfig system;
  UtilitySpec utility;
  RunMode mode = RunMode::boost;
  double mu_p = 0.0;  // fixed_budgets only
  double mu_q = 0.0;
  double eps = 1e-6;
  int max_iters = 500;
  std::uint64_t seed = 0;
  std::vector<double> sweep_db;
  int mc_eval_samples = 0;  // 0: evaluate finals at utility.mc_samples
  std::string out_dir = ".";

  void validate() const;
  static ExperimentConfig from_json_file(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text);
};

/// Fixed 12-significant-digit decimal formatting shared by all CSV output.
std::string csv_number(double v);

/// The uniform (non-optimized) allocation and the precoder-only marginal
/// design at the pooled-energy budget split.
JointResult uniform_baseline(const SystemConfig& cfg, const UtilitySpec& spec);
JointResult precoder_only_baseline(const SystemConfig& cfg, const UtilitySpec& spec);

/// Subcommand bodies. Outputs are only written after a successful run; a
/// config or run error leaves no partial files. Returns the process exit
/// code: 0 converged, 2 cycle detected, 1 error.
int cmd_optimize(const ExperimentConfig& cfg);
int cmd_sweep(const ExperimentConfig& cfg);
int cmd_pareto(const ExperimentConfig& cfg, int n_dirs);

}  // namespace trainprecode
