// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "trainprecode/channel.hpp"
#include "trainprecode/utility.hpp"

namespace trainprecode {

/// X -> A X A^H / (1 + trace(B X)) on Hermitian X.
struct LinearFractionalMap {
  Eigen::MatrixXcd a;
  Eigen::MatrixXcd b;  // Hermitian
};

enum class LfMode { full_column_rank, full_row_rank };

Eigen::MatrixXcd lf_apply(const LinearFractionalMap& map, const Eigen::MatrixXcd& x);

/// Inverse map (A#, -A#^H B A#) resp. (Ab, -Ab^H B Ab) for the left/right
/// pseudoinverse of A. Throws when the image lies outside the invertible
/// region (1 - trace(B A# Y A#^H) <= 1e-12).
Eigen::MatrixXcd lf_invert(const LinearFractionalMap& map, const Eigen::MatrixXcd& y, LfMode mode);

/// The segment parameter: phi(a X1 + (1-a) X2) = b phi(X1) + (1-b) phi(X2).
double segment_beta(const LinearFractionalMap& map, const Eigen::MatrixXcd& x1,
                    const Eigen::MatrixXcd& x2, double alpha);

/// Feasible-profile simplex for prescribed pilots: generalized eigenvalues of
/// R_hat v = w (mu_q^{-1} I + R_tilde) v and the vertices they induce.
/// `basis` holds the generalized eigenvectors for the r_p largest w,
/// normalized so V^H (mu_q^{-1} I + R_tilde) V = I.
struct SimplexRegion {
  Eigen::VectorXd omegas;                // length n_tx, non-increasing, zero beyond r_p
  std::vector<Eigen::VectorXd> vertices; // sigma^(0) = 0 through sigma^(r_p)
  Eigen::MatrixXcd basis;                // n_tx x r_p
  int r_p = 0;
  double mu_q = 0.0;
  Eigen::VectorXd basis_sqnorm;          // ||v_i||^2, used by the Q recovery
};

SimplexRegion simplex_region(const GramMatrix& p, const ChannelCovariance& r, double mu_q);

/// Barycentric view of a profile against the region: nu >= 0 componentwise and
/// sum nu <= 1 certify membership; `tail` is the largest entry beyond r_p.
struct SimplexCoords {
  Eigen::VectorXd nu;
  double nu_sum = 0.0;
  double tail = 0.0;
};

SimplexCoords simplex_coords(const SimplexRegion& region, const Eigen::VectorXd& profile);

/// Transmit covariance reproducing a target profile inside the region (sorted,
/// support within r_p, sum s_i/w_i <= 1): Q = sum c_i v_i v_i^H with
/// c_i = s_i D / w_i. Exact for every vertex; trace(Q) <= mu_q.
Eigen::MatrixXcd q_from_profile(const SimplexRegion& region, const Eigen::VectorXd& s_target);

struct PrecoderResult {
  GramMatrix q_star;
  Eigen::VectorXd s_star;
  double utility = 0.0;
  double std_error = 0.0;
  bool vertex_optimal_only = false;  // eigenbasis alignment precondition failed
  bool multistart = false;           // non-concave utility: multi-start fallback used
};

/// Marginal precoder design for prescribed pilots: maximizes the utility over
/// the profile simplex in barycentric coordinates, then recovers Q.
PrecoderResult optimize_precoder(const GramMatrix& p, const ChannelCovariance& r, double mu_q,
                                 const UtilitySpec& spec);

/// Aligned vector-domain version used inside the joint iterations. Profiles
/// stay in coordinate (channel-eigenvalue) order throughout.
struct VecStepResult {
  Eigen::VectorXd x;  // the optimized allocation (q here, p for the pilot step)
  Eigen::VectorXd s;  // profile in coordinate order
  double utility = 0.0;
  double std_error = 0.0;
};

VecStepResult optimize_precoder_vec(const Eigen::VectorXd& p, const Eigen::VectorXd& r,
                                    double mu_q, const UtilitySpec& spec,
                                    const Eigen::VectorXd* warm_q = nullptr);

}  // namespace trainprecode
