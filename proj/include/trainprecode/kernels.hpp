// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace trainprecode::kernels {

/// Per-sample statistics of a frozen whitened sample set, laid out
/// structure-of-arrays over samples so the inner loops stream contiguously.
///
/// With M(s) = ridge*I + W diag(s) W^H per sample:
///   n_rx == 1: M = ridge + sum_j s_j a_j,          a_j[n] = |w_1j|^2
///   n_rx == 2: M = [[alpha, gamma],[conj, beta]],  alpha/beta from a/b,
///              gamma = sum_j s_j (cr_j + i ci_j),  c_j = w_1j conj(w_2j)
/// Raw samples are kept for the generic path (n_rx >= 3) and diagnostics.
struct SampleStats {
  int n_rx = 0;
  int dim = 0;
  std::size_t count = 0;
  std::vector<std::vector<double>> a, b, cr, ci;
  std::vector<std::complex<double>> w;  // (n * n_rx + row) * dim + col

  std::complex<double> at(std::size_t n, int row, int col) const {
    return w[(n * n_rx + row) * dim + col];
  }
};

/// Builds the reduced statistics from raw samples already stored in `w`.
void finalize_stats(SampleStats& stats);

struct PartialSums {
  double sum = 0.0;
  double sumsq = 0.0;
};

/// Per-sample statistic accumulated by value kernels, all on
/// M = ridge*I + W diag(s) W^H:
///   logdet   : log det M        (log of a non-positive det yields -inf)
///   traceinv : trace(M^{-1})
///   det      : det M
enum class Op { logdet, traceinv, det };

/// Per-sample vector statistic accumulated by gradient kernels:
///   logdet   : grad[i] += w_i^H M^{-1} w_i
///   traceinv : grad[i] += w_i^H M^{-2} w_i
///   det      : grad[i] += det(M) * w_i^H M^{-1} w_i
enum class Arch { scalar, avx2 };

/// Kernel variant picked at runtime: AVX2 when the CPU supports it and a
/// vector path exists for this n_rx, otherwise the scalar reference.
/// TRAINPRECODE_KERNEL=scalar|avx2 overrides.
Arch active_arch(int n_rx);
const char* arch_name(Arch arch);
bool avx2_available();

/// Accumulates sums over the sample range [n0, n1). sumsq is only filled when
/// want_sumsq is set; the fast paths may otherwise batch the per-sample logs.
void value_range(Op op, const SampleStats& stats, const double* s, double ridge,
                 std::size_t n0, std::size_t n1, bool want_sumsq, PartialSums& out, Arch arch);

/// Adds per-coordinate gradient sums over [n0, n1) into grad_sums[0..dim).
void grad_range(Op op, const SampleStats& stats, const double* s, double ridge,
                std::size_t n0, std::size_t n1, double* grad_sums, Arch arch);

// Scalar reference implementations (always present; the equivalence baseline).
void value_range_scalar(Op op, const SampleStats&, const double* s, double ridge,
                        std::size_t n0, std::size_t n1, bool want_sumsq, PartialSums& out);
void grad_range_scalar(Op op, const SampleStats&, const double* s, double ridge,
                       std::size_t n0, std::size_t n1, double* grad_sums);

#if defined(TRAINPRECODE_HAVE_AVX2)
void value_range_avx2(Op op, const SampleStats&, const double* s, double ridge,
                      std::size_t n0, std::size_t n1, bool want_sumsq, PartialSums& out);
void grad_range_avx2(Op op, const SampleStats&, const double* s, double ridge,
                     std::size_t n0, std::size_t n1, double* grad_sums);
#endif

}  // namespace trainprecode::kernels
