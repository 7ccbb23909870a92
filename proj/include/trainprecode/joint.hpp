// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "trainprecode/pareto.hpp"
#include "trainprecode/utility.hpp"

namespace trainprecode {

struct IterationRow {
  Eigen::VectorXd p, q, s;
  double utility = 0.0;
  double std_error = 0.0;
};

struct IterationTrace {
  std::vector<IterationRow> rows;  // row 0 is the initialization
  bool converged = false;
  bool cycle_detected = false;
};

struct JointResult {
  Eigen::VectorXd p_star, q_star, s_star;
  int t_tau_star = 0;
  double utility = 0.0;        // frozen-sample evaluation
  double std_error = 0.0;
  double utility_fresh = 0.0;  // re-evaluated on an independent sample set
  double fresh_std_error = 0.0;
  IterationTrace trace;
  int rank_star = 0;
};

struct JointOptions {
  double eps = 1e-6;
  int max_iters = 500;
  /// Multiplies the utility everywhere in this run (the training-overhead
  /// weight (T - T_tau)/T of the full-fledged search).
  double utility_scale = 1.0;
};

/// Alternating marginal optimization with Pareto re-projection under the
/// pooled-energy constraint.
JointResult run_boost(const SystemConfig& cfg, const UtilitySpec& spec,
                      const JointOptions& opt = {});

/// Same iteration under separate pilot/data budgets; the re-projection uses
/// the closed-form ray solution.
JointResult run_fixed_budgets(const SystemConfig& cfg, const UtilitySpec& spec, double mu_p,
                              double mu_q, const JointOptions& opt = {});

struct FullFledgedResult {
  JointResult best;
  std::vector<JointResult> per_duration;  // indexed by T_tau - 1
};

/// Exhaustive search over T_tau in {1, ..., min(T-1, n_tx)} with the
/// time-penalty weight folded into the utility.
FullFledgedResult run_full_fledged(const SystemConfig& cfg_without_t_tau, const UtilitySpec& spec,
                                   const JointOptions& opt = {});

}  // namespace trainprecode
