// SPDX-License-Identifier: Apache-2.0
#include "trainprecode/channel.hpp"

#include <stdexcept>

#include "trainprecode/diagnostics.hpp"
#include "trainprecode/rng.hpp"

namespace trainprecode {

void SystemConfig::validate() const {
  if (n_tx < 1 || n_rx < 1) throw std::invalid_argument("SystemConfig: antenna counts must be >= 1");
  if (coherence_time < 2) throw std::invalid_argument("SystemConfig: coherence_time must be > 1");
  if (training_duration < 1 || training_duration > std::min(coherence_time - 1, n_tx))
    throw std::invalid_argument("SystemConfig: training_duration outside [1, min(T-1, n_tx)]");
  if (!(power > 0.0)) throw std::invalid_argument("SystemConfig: power must be positive");
  if (channel_eigs.size() != n_tx)
    throw std::invalid_argument("SystemConfig: channel_eigs length must equal n_tx");
  for (Eigen::Index i = 0; i < channel_eigs.size(); ++i) {
    if (!(channel_eigs(i) > 0.0))
      throw std::invalid_argument("SystemConfig: channel_eigs must be positive");
    if (i > 0 && channel_eigs(i) > channel_eigs(i - 1) + 1e-12)
      throw std::invalid_argument("SystemConfig: channel_eigs must be non-increasing");
  }
}

GramMatrix::GramMatrix(Eigen::MatrixXcd mat, GramRole r, double budget)
    : m(std::move(mat)), role(r), trace_budget(budget) {
  require_hermitian(m, "GramMatrix");
  m = hermitian_part(m);
  const Eigen::VectorXd vals = eig_hermitian(m).values;
  const double lmax = std::max(0.0, vals.size() ? vals(0) : 0.0);
  if (vals.size() && vals(vals.size() - 1) < -1e-10 * std::max(lmax, 1.0))
    throw std::invalid_argument("GramMatrix: not PSD");
  if (m.real().trace() > trace_budget + 1e-9)
    throw std::invalid_argument("GramMatrix: trace exceeds budget");
}

int GramMatrix::rank() const { return rank_by_threshold(eig_hermitian(m).values); }

ChannelCovariance::ChannelCovariance(Eigen::MatrixXcd cov) : r(std::move(cov)) {
  require_hermitian(r, "ChannelCovariance");
  r = hermitian_part(r);
  eigen = eig_hermitian(r);
  const double lmax = eigen.values(0);
  if (!(eigen.values(eigen.values.size() - 1) > 1e-12 * lmax) || !(lmax > 0.0))
    throw std::invalid_argument("ChannelCovariance: must be full rank positive definite");
}

ChannelCovariance ChannelCovariance::from_eigenvalues(const Eigen::VectorXd& eigs) {
  Eigen::MatrixXcd r = eigs.cast<Cx>().asDiagonal();
  return ChannelCovariance(std::move(r));
}

void AllocationPair::validate() const {
  if (p.size() != q.size()) throw std::invalid_argument("AllocationPair: length mismatch");
  if ((p.array() < 0.0).any() || (q.array() < 0.0).any())
    throw std::invalid_argument("AllocationPair: entries must be non-negative");
}

Eigen::MatrixXcd estimator_matrix(const Eigen::MatrixXcd& t_pilot, const ChannelCovariance& r) {
  if (t_pilot.rows() != r.dim()) throw std::invalid_argument("estimator_matrix: size mismatch");
  const Eigen::Index tau = t_pilot.cols();
  const Eigen::MatrixXcd lhs =
      hermitian_part(t_pilot.adjoint() * r.r * t_pilot) + Eigen::MatrixXcd::Identity(tau, tau);
  return lhs.llt().solve(t_pilot.adjoint() * r.r);
}

EstimationCovariances estimation_covariances(const GramMatrix& p, const ChannelCovariance& r) {
  const Eigen::Index n = r.dim();
  if (p.m.rows() != n) throw std::invalid_argument("estimation_covariances: size mismatch");

  // Direct route: R_tilde = (R^{-1}+P)^{-1} = R (I + P R)^{-1}, no explicit R^{-1}.
  const Eigen::MatrixXcd i_pr = Eigen::MatrixXcd::Identity(n, n) + p.m * r.r;
  const Eigen::MatrixXcd r_tilde_direct =
      hermitian_part(r.r * i_pr.partialPivLu().solve(Eigen::MatrixXcd::Identity(n, n)));
  const Eigen::MatrixXcd r_hat_direct = hermitian_part(r.r - r_tilde_direct);

  // Inversion-lemma route keeps rank(R_hat) = rank(P) exact for singular P.
  const EigenProfile pe = eig_hermitian(p.m);
  const int rp = rank_by_threshold(pe.values);
  Eigen::MatrixXcd r_hat;
  if (rp == 0) {
    r_hat = Eigen::MatrixXcd::Zero(n, n);
  } else {
    const Eigen::MatrixXcd up = pe.basis.leftCols(rp);
    const Eigen::VectorXd lam = pe.values.head(rp);
    Eigen::MatrixXcd core = hermitian_part(up.adjoint() * r.r * up);
    core += lam.cwiseInverse().cast<Cx>().asDiagonal().toDenseMatrix();
    const Eigen::MatrixXcd ru = r.r * up;
    r_hat = hermitian_part(ru * core.llt().solve(ru.adjoint()));
  }

  const double scale = std::max(1.0, r.r.norm());
  if ((r_hat - r_hat_direct).norm() > 1e-8 * scale)
    throw std::runtime_error("estimation_covariances: direct and inversion-lemma routes disagree");

  return {r_hat, hermitian_part(r.r - r_hat)};
}

EffectiveSnr effective_snr(const GramMatrix& p, const GramMatrix& q, const ChannelCovariance& r) {
  const EstimationCovariances cov = estimation_covariances(p, r);
  const Eigen::MatrixXcd root = sqrt_psd(cov.r_hat);
  const double denom = 1.0 + (q.m * cov.r_tilde).real().trace();
  EffectiveSnr out;
  out.denom = denom;
  out.s = hermitian_part(root * q.m * root) / denom;
  out.profile = psd_profile(out.s);
  return out;
}

Eigen::VectorXd r_tilde_vec(const Eigen::VectorXd& p, const Eigen::VectorXd& r) {
  return r.array() / (1.0 + r.array() * p.array());
}

Eigen::VectorXd r_hat_vec(const Eigen::VectorXd& p, const Eigen::VectorXd& r) {
  return r.array().square() * p.array() / (1.0 + r.array() * p.array());
}

Eigen::VectorXd snr_profile_vec(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                                const Eigen::VectorXd& r) {
  if (p.size() != q.size() || p.size() != r.size())
    throw std::invalid_argument("snr_profile_vec: length mismatch");
  if ((p.array() < 0.0).any() || (q.array() < 0.0).any() || (r.array() < 0.0).any())
    throw std::invalid_argument("snr_profile_vec: entries must be non-negative");
  const Eigen::VectorXd rt = r_tilde_vec(p, r);
  const Eigen::VectorXd rh = r_hat_vec(p, r);
  const double denom = 1.0 + q.dot(rt);
  return (rh.array() * q.array() / denom).matrix();
}

Eigen::MatrixXcd gram_factor(const GramMatrix& m) {
  const EigenProfile ep = eig_hermitian(m.m);
  const int rank = rank_by_threshold(ep.values);
  Eigen::MatrixXcd factor(m.m.rows(), rank);
  for (int j = 0; j < rank; ++j) factor.col(j) = ep.basis.col(j) * std::sqrt(ep.values(j));
  return factor;
}

Eigen::MatrixXcd sample_whitened(int n_rx, int n_cols, std::uint64_t seed) {
  if (n_rx < 1 || n_cols < 1) throw std::invalid_argument("sample_whitened: dimensions must be positive");
  Eigen::MatrixXcd w(n_rx, n_cols);
  for (int i = 0; i < n_rx; ++i)
    for (int j = 0; j < n_cols; ++j) w(i, j) = rng::complex_normal(seed, i, j);
  return w;
}

}  // namespace trainprecode
