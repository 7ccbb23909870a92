// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>

#include "trainprecode/channel.hpp"
#include "trainprecode/hermitian.hpp"

namespace tptest {

using trainprecode::Cx;

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240817u);
  return gen;
}

inline Eigen::MatrixXcd random_complex(int rows, int cols) {
  std::normal_distribution<double> n01;
  Eigen::MatrixXcd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = Cx(n01(rng()), n01(rng()));
  return m;
}

inline Eigen::MatrixXcd random_hermitian(int n) {
  const Eigen::MatrixXcd a = random_complex(n, n);
  return 0.5 * (a + a.adjoint());
}

/// Random PSD with the given rank, scaled to the requested trace.
inline Eigen::MatrixXcd random_psd(int n, int rank, double trace = 1.0) {
  const Eigen::MatrixXcd f = random_complex(n, rank);
  Eigen::MatrixXcd m = f * f.adjoint();
  m *= trace / m.real().trace();
  return 0.5 * (m + m.adjoint());
}

/// Random full-rank channel covariance with spread eigenvalues.
inline trainprecode::ChannelCovariance random_covariance(int n) {
  std::uniform_real_distribution<double> u(0.2, 2.0);
  Eigen::VectorXd eigs(n);
  for (int i = 0; i < n; ++i) eigs(i) = u(rng());
  const Eigen::MatrixXcd basis =
      Eigen::JacobiSVD<Eigen::MatrixXcd>(random_complex(n, n), Eigen::ComputeFullU).matrixU();
  Eigen::MatrixXcd r = basis * eigs.asDiagonal() * basis.adjoint();
  return trainprecode::ChannelCovariance(0.5 * (r + r.adjoint()));
}

inline double uniform(double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return u(rng());
}

}  // namespace tptest
