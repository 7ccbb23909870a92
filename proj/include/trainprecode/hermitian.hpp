// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>

namespace trainprecode {

using Cx = std::complex<double>;

/// Eigen/spectral data of a Hermitian problem. `values` are non-increasing.
/// For the standard problem the basis is column-orthonormal; for the
/// generalized problem gevp(A,B) it is B-orthonormal (V^H B V = I).
struct EigenProfile {
  Eigen::VectorXd values;
  Eigen::MatrixXcd basis;
};

/// Throws if max |A - A^H| exceeds the tolerance (absolute, scaled by the
/// matrix magnitude for large entries).
void require_hermitian(const Eigen::MatrixXcd& a, const char* what = "matrix");

/// (A + A^H)/2, applied after validation to remove roundoff asymmetry.
Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& a);

/// Full eigendecomposition of a Hermitian matrix, eigenvalues non-increasing.
EigenProfile eig_hermitian(const Eigen::MatrixXcd& a);

/// Generalized problem A v = w B v for Hermitian PSD A and PD B, solved as the
/// standard problem of B^{-1/2} A B^{-1/2} with vectors mapped back through
/// B^{-1/2}. Eigenvalues non-increasing; vectors satisfy V^H B V = I.
EigenProfile gevp(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

/// Hermitian PSD square root. Eigenvalues below -1e-10*lambda_max are an
/// error; tiny negatives above that are clamped to zero (counted in
/// diagnostics::clamped_eigenvalues).
Eigen::MatrixXcd sqrt_psd(const Eigen::MatrixXcd& a);

/// Moore-Penrose pseudoinverse of an arbitrary complex matrix. Singular
/// values below 1e-12*sigma_max are treated as zero.
Eigen::MatrixXcd pinv(const Eigen::MatrixXcd& a);

/// Number of entries strictly above rel_tol * max|values|. The shared rank
/// threshold used for r* detection everywhere.
int rank_by_threshold(const Eigen::VectorXd& values, double rel_tol = 1e-9);

/// Eigenvalues of a PSD matrix clamped at zero, non-increasing.
Eigen::VectorXd psd_profile(const Eigen::MatrixXcd& a);

}  // namespace trainprecode
