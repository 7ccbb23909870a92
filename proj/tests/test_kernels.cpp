// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "trainprecode/kernels.hpp"
#include "trainprecode/rng.hpp"

using namespace trainprecode;
namespace k = trainprecode::kernels;

namespace {

k::SampleStats make_stats(int n_rx, int dim, std::size_t count, std::uint64_t seed) {
  k::SampleStats st;
  st.n_rx = n_rx;
  st.dim = dim;
  st.count = count;
  st.w.resize(count * n_rx * dim);
  for (std::size_t n = 0; n < count; ++n) {
    const std::uint64_t stream = rng::derive_seed(seed, n);
    for (int i = 0; i < n_rx; ++i)
      for (int j = 0; j < dim; ++j)
        st.w[(n * n_rx + i) * dim + j] = rng::complex_normal(stream, i, j);
  }
  k::finalize_stats(st);
  return st;
}

// Reference on raw samples through Eigen, independent of the kernel code path.
double eigen_reference_value(k::Op op, const k::SampleStats& st, const Eigen::VectorXd& s,
                             double ridge) {
  double sum = 0.0;
  for (std::size_t n = 0; n < st.count; ++n) {
    Eigen::MatrixXcd w(st.n_rx, st.dim);
    for (int i = 0; i < st.n_rx; ++i)
      for (int j = 0; j < st.dim; ++j) w(i, j) = st.at(n, i, j);
    const Eigen::MatrixXcd m = ridge * Eigen::MatrixXcd::Identity(st.n_rx, st.n_rx) +
                               w * s.asDiagonal() * w.adjoint();
    switch (op) {
      case k::Op::logdet: sum += std::log(m.determinant().real()); break;
      case k::Op::traceinv: sum += m.inverse().real().trace(); break;
      case k::Op::det: sum += m.determinant().real(); break;
    }
  }
  return sum;
}

Eigen::VectorXd eigen_reference_grad(k::Op op, const k::SampleStats& st, const Eigen::VectorXd& s,
                                     double ridge) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(st.dim);
  for (std::size_t n = 0; n < st.count; ++n) {
    Eigen::MatrixXcd w(st.n_rx, st.dim);
    for (int i = 0; i < st.n_rx; ++i)
      for (int j = 0; j < st.dim; ++j) w(i, j) = st.at(n, i, j);
    const Eigen::MatrixXcd m = ridge * Eigen::MatrixXcd::Identity(st.n_rx, st.n_rx) +
                               w * s.asDiagonal() * w.adjoint();
    const Eigen::MatrixXcd mi = m.inverse();
    for (int j = 0; j < st.dim; ++j) {
      const Eigen::VectorXcd col = w.col(j);
      switch (op) {
        case k::Op::logdet: g(j) += (col.adjoint() * mi * col).real()(0); break;
        case k::Op::traceinv: g(j) += (mi * col).squaredNorm(); break;
        case k::Op::det:
          g(j) += m.determinant().real() * (col.adjoint() * mi * col).real()(0);
          break;
      }
    }
  }
  return g;
}

}  // namespace

TEST_CASE("scalar kernels match the Eigen reference for n_rx 1..3") {
  for (int n_rx = 1; n_rx <= 3; ++n_rx) {
    for (int dim : {1, 2, 4}) {
      const k::SampleStats st = make_stats(n_rx, dim, 257, 99 + n_rx);
      Eigen::VectorXd s(dim);
      for (int j = 0; j < dim; ++j) s(j) = tptest::uniform(0.05, 3.0);
      for (k::Op op : {k::Op::logdet, k::Op::traceinv, k::Op::det}) {
        k::PartialSums ps;
        k::value_range_scalar(op, st, s.data(), 1.0, 0, st.count, true, ps);
        const double ref = eigen_reference_value(op, st, s, 1.0);
        CHECK(std::abs(ps.sum - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));

        Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
        k::grad_range_scalar(op, st, s.data(), 1.0, 0, st.count, g.data());
        const Eigen::VectorXd gref = eigen_reference_grad(op, st, s, 1.0);
        CHECK((g - gref).lpNorm<Eigen::Infinity>() <=
              1e-10 * std::max(1.0, gref.cwiseAbs().maxCoeff()));
      }
    }
  }
}

#if defined(__x86_64__)
TEST_CASE("avx2 kernels agree with the scalar reference") {
  if (!k::avx2_available()) {
    MESSAGE("avx2 not available on this host; skipping");
    return;
  }
  for (int n_rx : {1, 2}) {
    for (int dim : {1, 2, 3, 4}) {
      const k::SampleStats st = make_stats(n_rx, dim, 1003, 7 + dim);
      Eigen::VectorXd s(dim);
      for (int j = 0; j < dim; ++j) s(j) = tptest::uniform(0.1, 4.0);
      for (double ridge : {1.0, 0.0}) {
        for (k::Op op : {k::Op::logdet, k::Op::traceinv, k::Op::det}) {
          if (ridge == 0.0 && (op != k::Op::logdet || n_rx > dim)) continue;
          k::PartialSums a, b;
          k::value_range(op, st, s.data(), ridge, 0, st.count, true, a, k::Arch::scalar);
          k::value_range(op, st, s.data(), ridge, 0, st.count, true, b, k::Arch::avx2);
          CHECK(std::abs(a.sum - b.sum) <= 1e-10 * std::max(1.0, std::abs(a.sum)));
          CHECK(std::abs(a.sumsq - b.sumsq) <= 1e-10 * std::max(1.0, std::abs(a.sumsq)));

          // fast path (no sumsq) batches the logs differently; same mean
          k::PartialSums c, d;
          k::value_range(op, st, s.data(), ridge, 0, st.count, false, c, k::Arch::scalar);
          k::value_range(op, st, s.data(), ridge, 0, st.count, false, d, k::Arch::avx2);
          CHECK(std::abs(c.sum - d.sum) <= 1e-10 * std::max(1.0, std::abs(c.sum)));

          Eigen::VectorXd ga = Eigen::VectorXd::Zero(dim), gb = Eigen::VectorXd::Zero(dim);
          k::grad_range(op, st, s.data(), ridge, 0, st.count, ga.data(), k::Arch::scalar);
          k::grad_range(op, st, s.data(), ridge, 0, st.count, gb.data(), k::Arch::avx2);
          CHECK((ga - gb).lpNorm<Eigen::Infinity>() <=
                1e-10 * std::max(1.0, ga.cwiseAbs().maxCoeff()));
        }
      }
    }
  }
}

TEST_CASE("avx2 partial ranges compose to the whole") {
  if (!k::avx2_available()) return;
  const k::SampleStats st = make_stats(2, 2, 777, 31);
  Eigen::VectorXd s(2);
  s << 1.3, 0.4;
  k::PartialSums whole, parts;
  k::value_range(k::Op::logdet, st, s.data(), 1.0, 0, st.count, false, whole, k::Arch::avx2);
  for (std::size_t b = 0; b < st.count; b += 100)
    k::value_range(k::Op::logdet, st, s.data(), 1.0, b, std::min(st.count, b + 100), false, parts,
                   k::Arch::avx2);
  CHECK(std::abs(whole.sum - parts.sum) <= 1e-9 * std::max(1.0, std::abs(whole.sum)));
}
#endif

TEST_CASE("kernel dispatch falls back to scalar for wide receive arrays") {
  const k::Arch a = k::active_arch(2);
  CHECK((a == k::Arch::scalar || a == k::Arch::avx2));
  CHECK(k::active_arch(3) == k::Arch::scalar);
}
