// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trainprecode/channel.hpp"
#include "trainprecode/precoder.hpp"
#include "trainprecode/utility.hpp"

namespace trainprecode {

/// Feasible estimate-covariance set for a pilot energy budget:
/// 0 <= R_hat < R and trace((R - R_hat)^{-1}) - trace(R^{-1}) <= mu_p.
struct EstimateCovDomain {
  ChannelCovariance r;
  double mu_p = 0.0;

  /// Pilot energy trace((R - R_hat)^{-1}) - trace(R^{-1}) needed to realize
  /// R_hat; +inf when R_hat is not strictly dominated by R.
  double pilot_energy(const Eigen::MatrixXcd& r_hat) const;
  bool contains(const Eigen::MatrixXcd& r_hat, double tol = 1e-9) const;
};

/// S' = Q^{1/2} R_hat Q^{1/2} / (tau - trace(Q R_hat)), tau = 1 + trace(Q R);
/// unitarily equivalent to S(P,Q) for the pilots inducing R_hat.
EffectiveSnr s_prime(const Eigen::MatrixXcd& r_hat, const GramMatrix& q,
                     const ChannelCovariance& r);

/// P = (R - R_hat)^{-1} - R^{-1}. Requires R_hat strictly below R.
GramMatrix pilot_from_estimate_cov(const Eigen::MatrixXcd& r_hat, const ChannelCovariance& r);

struct PilotResult {
  GramMatrix p_star;
  Eigen::VectorXd s_star;
  double utility = 0.0;
  double std_error = 0.0;
  bool aligned_path = false;  // eigenvalue-domain fast path was applicable
};

/// Marginal pilot design for a prescribed precoder: projected gradient over
/// the estimate covariance, in eigenvalue coordinates when Q and R commute
/// and in the matrix domain otherwise.
PilotResult optimize_pilot(const GramMatrix& q, const ChannelCovariance& r, double mu_p,
                           const UtilitySpec& spec);

/// Aligned vector-domain version used inside the joint iterations. Returns
/// the pilot eigenvalues; profiles stay in coordinate order.
VecStepResult optimize_pilot_vec(const Eigen::VectorXd& q, const Eigen::VectorXd& r, double mu_p,
                                 const UtilitySpec& spec, const Eigen::VectorXd* warm_p = nullptr);

}  // namespace trainprecode
