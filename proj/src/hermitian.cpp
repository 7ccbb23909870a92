// SPDX-License-Identifier: Apache-2.0
#include "trainprecode/hermitian.hpp"

#include <Eigen/SVD>
#include <stdexcept>
#include <string>

#include "trainprecode/diagnostics.hpp"

namespace trainprecode {

void require_hermitian(const Eigen::MatrixXcd& a, const char* what) {
  if (a.rows() != a.cols()) throw std::invalid_argument(std::string(what) + ": not square");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = (a - a.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale)
    throw std::invalid_argument(std::string(what) + ": not Hermitian (asymmetry " +
                                std::to_string(asym) + ")");
}

Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& a) { return 0.5 * (a + a.adjoint()); }

namespace {

// Reverses Eigen's ascending order; degenerate blocks keep their relative order.
EigenProfile reversed(const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>& es) {
  const auto n = es.eigenvalues().size();
  EigenProfile out;
  out.values = es.eigenvalues().reverse();
  out.basis = es.eigenvectors().rowwise().reverse();
  (void)n;
  return out;
}

}  // namespace

EigenProfile eig_hermitian(const Eigen::MatrixXcd& a) {
  require_hermitian(a, "eig_hermitian input");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(a));
  if (es.info() != Eigen::Success) throw std::runtime_error("eig_hermitian: solver failed");
  return reversed(es);
}

EigenProfile gevp(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  require_hermitian(a, "gevp A");
  require_hermitian(b, "gevp B");
  if (a.rows() != b.rows()) throw std::invalid_argument("gevp: size mismatch");
  const EigenProfile eb = eig_hermitian(b);
  const double bmax = eb.values(0);
  const double bmin = eb.values(eb.values.size() - 1);
  if (!(bmin > 1e-12 * bmax) || bmax <= 0.0)
    throw std::invalid_argument("gevp: B is singular or indefinite");
  const Eigen::VectorXd inv_sqrt = eb.values.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXcd b_inv_half = eb.basis * inv_sqrt.asDiagonal() * eb.basis.adjoint();
  const Eigen::MatrixXcd c = hermitian_part(b_inv_half * a * b_inv_half);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(c);
  if (es.info() != Eigen::Success) throw std::runtime_error("gevp: solver failed");
  EigenProfile out = reversed(es);
  out.basis = b_inv_half * out.basis;  // V^H B V = I by construction
  return out;
}

Eigen::MatrixXcd sqrt_psd(const Eigen::MatrixXcd& a) {
  EigenProfile ep = eig_hermitian(a);
  const double lmax = std::max(0.0, ep.values.size() ? ep.values(0) : 0.0);
  for (Eigen::Index i = 0; i < ep.values.size(); ++i) {
    if (ep.values(i) < -1e-10 * lmax)
      throw std::invalid_argument("sqrt_psd: matrix is not PSD");
    if (ep.values(i) < 0.0) {
      ep.values(i) = 0.0;
      diagnostics::clamped_eigenvalues().fetch_add(1, std::memory_order_relaxed);
    }
  }
  return hermitian_part(ep.basis * ep.values.cwiseSqrt().asDiagonal() * ep.basis.adjoint());
}

Eigen::MatrixXcd pinv(const Eigen::MatrixXcd& a) {
  if (a.size() == 0) return Eigen::MatrixXcd(a.cols(), a.rows());
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-12 * smax && sv(i) > 0.0) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

int rank_by_threshold(const Eigen::VectorXd& values, double rel_tol) {
  if (values.size() == 0) return 0;
  const double vmax = values.cwiseAbs().maxCoeff();
  if (!(vmax > 0.0)) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (values(i) > rel_tol * vmax) ++r;
  return r;
}

Eigen::VectorXd psd_profile(const Eigen::MatrixXcd& a) {
  return eig_hermitian(a).values.cwiseMax(0.0);
}

}  // namespace trainprecode
