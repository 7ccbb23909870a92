// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <cstring>

#include "trainprecode/kernels.hpp"

namespace trainprecode::kernels {

bool avx2_available() {
#if defined(TRAINPRECODE_HAVE_AVX2) && defined(__GNUC__)
  static const bool ok = __builtin_cpu_supports("avx2");
  return ok;
#else
  return false;
#endif
}

namespace {

enum class Pref { auto_detect, scalar, avx2 };

Pref env_pref() {
  static const Pref p = [] {
    const char* env = std::getenv("TRAINPRECODE_KERNEL");
    if (!env) return Pref::auto_detect;
    if (std::strcmp(env, "scalar") == 0) return Pref::scalar;
    if (std::strcmp(env, "avx2") == 0) return Pref::avx2;
    return Pref::auto_detect;
  }();
  return p;
}

}  // namespace

Arch active_arch(int n_rx) {
  if (n_rx > 2) return Arch::scalar;  // no vector path for wide receive arrays
  switch (env_pref()) {
    case Pref::scalar: return Arch::scalar;
    case Pref::avx2: return avx2_available() ? Arch::avx2 : Arch::scalar;
    case Pref::auto_detect: break;
  }
  return avx2_available() ? Arch::avx2 : Arch::scalar;
}

const char* arch_name(Arch arch) { return arch == Arch::avx2 ? "avx2" : "scalar"; }

void value_range(Op op, const SampleStats& stats, const double* s, double ridge, std::size_t n0,
                 std::size_t n1, bool want_sumsq, PartialSums& out, Arch arch) {
#if defined(TRAINPRECODE_HAVE_AVX2)
  if (arch == Arch::avx2) {
    value_range_avx2(op, stats, s, ridge, n0, n1, want_sumsq, out);
    return;
  }
#endif
  (void)arch;
  value_range_scalar(op, stats, s, ridge, n0, n1, want_sumsq, out);
}

void grad_range(Op op, const SampleStats& stats, const double* s, double ridge, std::size_t n0,
                std::size_t n1, double* grad_sums, Arch arch) {
#if defined(TRAINPRECODE_HAVE_AVX2)
  if (arch == Arch::avx2) {
    grad_range_avx2(op, stats, s, ridge, n0, n1, grad_sums);
    return;
  }
#endif
  (void)arch;
  grad_range_scalar(op, stats, s, ridge, n0, n1, grad_sums);
}

}  // namespace trainprecode::kernels
