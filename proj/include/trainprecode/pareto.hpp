// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "trainprecode/channel.hpp"

namespace trainprecode {

/// Direction on the 1-norm unit simplex of the profile orthant.
struct Direction {
  Eigen::VectorXd e;

  explicit Direction(Eigen::VectorXd v);
};

/// Ray-maximal allocation for one direction: s = nu * e.
struct RayResult {
  Eigen::VectorXd e;
  Eigen::VectorXd p;
  Eigen::VectorXd q;
  Eigen::VectorXd s;
  double nu = 0.0;
  double eta = 0.0;
};

/// eta and the induced q for a pilot allocation p under the pooled-energy
/// constraint; coordinates with e_i = 0 are excluded and get q_i = 0.
/// Requires p_i > 0 wherever e_i > 0 and sum(p) <= T*mu.
std::pair<double, Eigen::VectorXd> eta_and_q(const Eigen::VectorXd& p, const Direction& e,
                                             const SystemConfig& cfg);

/// nu(p, e) = eta / (1 + r^T q - eta); equals ||s(p, q(p,e))||_1.
double nu(const Eigen::VectorXd& p, const Direction& e, const SystemConfig& cfg);

/// Convex reciprocal of nu (up to +1), minimized by the pooled-energy ray
/// solver; exposed for the convexity property tests.
double nu_reciprocal(const Eigen::VectorXd& p, const Direction& e, const SystemConfig& cfg);

/// Ray maximization with energy boost: minimizes the convex reciprocal over
/// the interior of the pilot-energy simplex.
RayResult maximize_nu_boost(const Direction& e, const SystemConfig& cfg,
                            const Eigen::VectorXd* warm_p = nullptr);

/// Ray maximization under fixed budgets; closed form.
RayResult maximize_nu_fixed_budgets(const Direction& e, double mu_p, double mu_q,
                                    const SystemConfig& cfg);

enum class BorderMode { boost, fixed_budgets };

/// Deterministic direction set: the coordinate vertices followed by a
/// low-discrepancy sequence mapped uniformly onto the simplex.
std::vector<Direction> border_directions(int n_dirs, int dim);

/// One ray result per direction; with budgets = {mu_p, mu_q} in fixed mode.
std::vector<RayResult> sample_border(int n_dirs, BorderMode mode, const SystemConfig& cfg,
                                     double mu_p = 0.0, double mu_q = 0.0);

}  // namespace trainprecode
