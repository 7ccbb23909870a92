// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "trainprecode/hermitian.hpp"

namespace trainprecode {

/// Block-fading system parameters. channel_eigs are the transmit-correlation
/// eigenvalues, positive and non-increasing, length n_tx.
struct SystemConfig {
  int n_tx = 1;
  int n_rx = 1;
  int coherence_time = 2;     // T
  int training_duration = 1;  // T_tau, 1 <= T_tau <= min(T-1, n_tx)
  double power = 1.0;         // mu, average energy per time unit
  Eigen::VectorXd channel_eigs;

  void validate() const;
  double total_energy() const { return power * coherence_time; }  // T*mu
  int data_slots() const { return coherence_time - training_duration; }
};

enum class GramRole { pilot, transmit };

/// Hermitian PSD matrix under a trace budget. Tiny negative eigenvalues are
/// tolerated (clamping tolerance); the trace may exceed the budget by 1e-9.
struct GramMatrix {
  Eigen::MatrixXcd m;
  GramRole role = GramRole::pilot;
  double trace_budget = 0.0;

  GramMatrix() = default;
  GramMatrix(Eigen::MatrixXcd mat, GramRole r, double budget);
  int rank() const;
};

/// Transmit-side channel correlation, full rank, with the cached profile.
struct ChannelCovariance {
  Eigen::MatrixXcd r;
  EigenProfile eigen;

  explicit ChannelCovariance(Eigen::MatrixXcd cov);
  /// Diagonal covariance from an eigenvalue vector (the aligned vector domain).
  static ChannelCovariance from_eigenvalues(const Eigen::VectorXd& eigs);
  int dim() const { return static_cast<int>(r.rows()); }
};

/// R_hat (estimate covariance) and R_tilde (error covariance); they sum to R.
struct EstimationCovariances {
  Eigen::MatrixXcd r_hat;
  Eigen::MatrixXcd r_tilde;
};

/// Matrix-valued effective SNR with its profile and the positive denominator
/// 1 + trace(Q R_tilde).
struct EffectiveSnr {
  Eigen::MatrixXcd s;
  Eigen::VectorXd profile;
  double denom = 1.0;
};

/// Pilot/transmit eigenvalue allocation in the aligned vector domain.
struct AllocationPair {
  Eigen::VectorXd p;
  Eigen::VectorXd q;

  void validate() const;
};

/// MMSE channel estimator acting on the training observation:
/// G = (T^H R T + I)^{-1} T^H R.
Eigen::MatrixXcd estimator_matrix(const Eigen::MatrixXcd& t_pilot, const ChannelCovariance& r);

/// R_tilde = (R^{-1} + P)^{-1}; R_hat computed by the matrix-inversion-lemma
/// form R U_P (Lambda_P^{-1} + U_P^H R U_P)^{-1} U_P^H R so that
/// rank(R_hat) = rank(P) holds exactly for rank-deficient P. The two routes
/// are cross-checked against each other.
EstimationCovariances estimation_covariances(const GramMatrix& p, const ChannelCovariance& r);

/// S = R_hat^{1/2} Q R_hat^{1/2} / (1 + trace(Q R_tilde)).
EffectiveSnr effective_snr(const GramMatrix& p, const GramMatrix& q, const ChannelCovariance& r);

/// Vector-domain profile for aligned eigenbases:
/// s_i = (r_i^2 p_i q_i / (1 + r_i p_i)) / (1 + sum_j q_j r_j/(1 + r_j p_j)).
/// Returned in coordinate order (not sorted).
Eigen::VectorXd snr_profile_vec(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                                const Eigen::VectorXd& r);

/// Componentwise error/estimate eigenvalues for pilot eigenvalues p.
Eigen::VectorXd r_tilde_vec(const Eigen::VectorXd& p, const Eigen::VectorXd& r);
Eigen::VectorXd r_hat_vec(const Eigen::VectorXd& p, const Eigen::VectorXd& r);

/// Factor F with F F^H = M and rank(M) columns (eigen-factor U Lambda^{1/2},
/// valid for singular Gram matrices).
Eigen::MatrixXcd gram_factor(const GramMatrix& m);

/// i.i.d. circularly-symmetric unit-variance complex Gaussian matrix; entry
/// (i,j) is a pure function of (seed, i, j).
Eigen::MatrixXcd sample_whitened(int n_rx, int n_cols, std::uint64_t seed);

}  // namespace trainprecode
