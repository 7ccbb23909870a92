// SPDX-License-Identifier: Apache-2.0
//
// AVX2 variants of the Monte Carlo accumulation kernels for n_rx in {1,2}.
// Larger receive arrays fall back to the scalar reference (see dispatch.cpp).

#include <immintrin.h>

#include <cmath>

#include "trainprecode/kernels.hpp"

namespace trainprecode::kernels {

namespace {

constexpr std::size_t kLanes = 4;

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

// Running product with the binary exponents peeled off into an integer
// accumulator, so log(prod) stays exact over long sample runs and the
// transcendental is paid once per chunk instead of once per sample.
struct LogProduct {
  __m256d mant = _mm256_set1_pd(1.0);
  __m256i expo = _mm256_setzero_si256();
  int pending = 0;
  double total = 0.0;

  static constexpr int kNormalizeEvery = 24;

  inline void normalize() {
    const __m256i bits = _mm256_castpd_si256(mant);
    const __m256i exp_mask = _mm256_set1_epi64x(0x7ffLL << 52);
    const __m256i biased = _mm256_srli_epi64(_mm256_and_si256(bits, exp_mask), 52);
    expo = _mm256_add_epi64(expo, _mm256_sub_epi64(biased, _mm256_set1_epi64x(1023)));
    const __m256i unit = _mm256_set1_epi64x(1023LL << 52);
    mant = _mm256_castsi256_pd(_mm256_or_si256(_mm256_andnot_si256(exp_mask, bits), unit));
    pending = 0;
  }

  inline void multiply(__m256d v) {
    mant = _mm256_mul_pd(mant, v);
    if (++pending == kNormalizeEvery) normalize();
  }

  inline void flush() {
    normalize();
    alignas(32) double m[kLanes];
    alignas(32) long long e[kLanes];
    _mm256_store_pd(m, mant);
    _mm256_store_si256(reinterpret_cast<__m256i*>(e), expo);
    constexpr double ln2 = 0.69314718055994530942;
    for (std::size_t l = 0; l < kLanes; ++l) total += std::log(m[l]) + ln2 * static_cast<double>(e[l]);
    mant = _mm256_set1_pd(1.0);
    expo = _mm256_setzero_si256();
  }
};

// n_rx == 1: M = ridge + sum_j s_j a_j per sample.
inline __m256d det1(const SampleStats& st, const double* s, double ridge, std::size_t n) {
  __m256d m = _mm256_set1_pd(ridge);
  for (int j = 0; j < st.dim; ++j)
    m = _mm256_fmadd_pd(_mm256_set1_pd(s[j]), _mm256_loadu_pd(st.a[j].data() + n), m);
  return m;
}

struct M2v {
  __m256d alpha, beta, gr, gi, det;
};

inline M2v build2(const SampleStats& st, const double* s, double ridge, std::size_t n) {
  M2v m;
  m.alpha = _mm256_set1_pd(ridge);
  m.beta = _mm256_set1_pd(ridge);
  m.gr = _mm256_setzero_pd();
  m.gi = _mm256_setzero_pd();
  for (int j = 0; j < st.dim; ++j) {
    const __m256d sj = _mm256_set1_pd(s[j]);
    m.alpha = _mm256_fmadd_pd(sj, _mm256_loadu_pd(st.a[j].data() + n), m.alpha);
    m.beta = _mm256_fmadd_pd(sj, _mm256_loadu_pd(st.b[j].data() + n), m.beta);
    m.gr = _mm256_fmadd_pd(sj, _mm256_loadu_pd(st.cr[j].data() + n), m.gr);
    m.gi = _mm256_fmadd_pd(sj, _mm256_loadu_pd(st.ci[j].data() + n), m.gi);
  }
  m.det = _mm256_sub_pd(_mm256_mul_pd(m.alpha, m.beta),
                        _mm256_add_pd(_mm256_mul_pd(m.gr, m.gr), _mm256_mul_pd(m.gi, m.gi)));
  return m;
}

}  // namespace

void value_range_avx2(Op op, const SampleStats& st, const double* s, double ridge,
                      std::size_t n0, std::size_t n1, bool want_sumsq, PartialSums& out) {
  if (st.n_rx > 2) {
    value_range_scalar(op, st, s, ridge, n0, n1, want_sumsq, out);
    return;
  }
  const std::size_t main_end = n0 + ((n1 - n0) / kLanes) * kLanes;
  const __m256d zero = _mm256_setzero_pd();

  if (op == Op::logdet && !want_sumsq) {
    LogProduct prod;
    for (std::size_t n = n0; n < main_end; n += kLanes) {
      const __m256d det = (st.n_rx == 1) ? det1(st, s, ridge, n) : build2(st, s, ridge, n).det;
      prod.multiply(_mm256_max_pd(det, zero));
    }
    prod.flush();
    out.sum += prod.total;
  } else {
    __m256d vsum = zero, vsq = zero;
    alignas(32) double lane[kLanes];
    for (std::size_t n = n0; n < main_end; n += kLanes) {
      __m256d v;
      if (st.n_rx == 1) {
        const __m256d m = det1(st, s, ridge, n);
        switch (op) {
          case Op::logdet: {
            _mm256_store_pd(lane, _mm256_max_pd(m, zero));
            for (std::size_t l = 0; l < kLanes; ++l) lane[l] = std::log(lane[l]);
            v = _mm256_load_pd(lane);
            break;
          }
          case Op::traceinv: v = _mm256_div_pd(_mm256_set1_pd(1.0), m); break;
          default: v = m; break;
        }
      } else {
        const M2v m = build2(st, s, ridge, n);
        switch (op) {
          case Op::logdet: {
            _mm256_store_pd(lane, _mm256_max_pd(m.det, zero));
            for (std::size_t l = 0; l < kLanes; ++l) lane[l] = std::log(lane[l]);
            v = _mm256_load_pd(lane);
            break;
          }
          case Op::traceinv: v = _mm256_div_pd(_mm256_add_pd(m.alpha, m.beta), m.det); break;
          default: v = m.det; break;
        }
      }
      vsum = _mm256_add_pd(vsum, v);
      if (want_sumsq) vsq = _mm256_fmadd_pd(v, v, vsq);
    }
    out.sum += hsum(vsum);
    if (want_sumsq) out.sumsq += hsum(vsq);
  }

  if (main_end < n1) value_range_scalar(op, st, s, ridge, main_end, n1, want_sumsq, out);
}

void grad_range_avx2(Op op, const SampleStats& st, const double* s, double ridge,
                     std::size_t n0, std::size_t n1, double* grad_sums) {
  if (st.n_rx > 2) {
    grad_range_scalar(op, st, s, ridge, n0, n1, grad_sums);
    return;
  }
  const int d = st.dim;
  const std::size_t main_end = n0 + ((n1 - n0) / kLanes) * kLanes;
  const __m256d one = _mm256_set1_pd(1.0);
  alignas(32) double lane[kLanes];

  std::vector<__m256d> acc(static_cast<std::size_t>(d), _mm256_setzero_pd());

  for (std::size_t n = n0; n < main_end; n += kLanes) {
    if (st.n_rx == 1) {
      const __m256d m = det1(st, s, ridge, n);
      __m256d f;
      switch (op) {
        case Op::logdet: f = _mm256_div_pd(one, m); break;
        case Op::traceinv: f = _mm256_div_pd(one, _mm256_mul_pd(m, m)); break;
        default: f = one; break;
      }
      for (int j = 0; j < d; ++j)
        acc[j] = _mm256_fmadd_pd(f, _mm256_loadu_pd(st.a[j].data() + n), acc[j]);
    } else {
      const M2v m = build2(st, s, ridge, n);
      __m256d ka, kb, kc;
      switch (op) {
        case Op::logdet: {
          const __m256d inv = _mm256_div_pd(one, m.det);
          ka = _mm256_mul_pd(m.beta, inv);
          kb = _mm256_mul_pd(m.alpha, inv);
          kc = _mm256_sub_pd(_mm256_setzero_pd(), inv);
          break;
        }
        case Op::traceinv: {
          const __m256d inv2 = _mm256_div_pd(one, _mm256_mul_pd(m.det, m.det));
          const __m256d g2 = _mm256_add_pd(_mm256_mul_pd(m.gr, m.gr), _mm256_mul_pd(m.gi, m.gi));
          ka = _mm256_mul_pd(_mm256_add_pd(_mm256_mul_pd(m.beta, m.beta), g2), inv2);
          kb = _mm256_mul_pd(_mm256_add_pd(_mm256_mul_pd(m.alpha, m.alpha), g2), inv2);
          kc = _mm256_sub_pd(_mm256_setzero_pd(),
                             _mm256_mul_pd(_mm256_add_pd(m.alpha, m.beta), inv2));
          break;
        }
        default:
          ka = m.beta;
          kb = m.alpha;
          kc = _mm256_set1_pd(-1.0);
          break;
      }
      const __m256d kc2 = _mm256_add_pd(kc, kc);
      for (int j = 0; j < d; ++j) {
        __m256d t = _mm256_mul_pd(ka, _mm256_loadu_pd(st.a[j].data() + n));
        t = _mm256_fmadd_pd(kb, _mm256_loadu_pd(st.b[j].data() + n), t);
        __m256d cross = _mm256_mul_pd(m.gr, _mm256_loadu_pd(st.cr[j].data() + n));
        cross = _mm256_fmadd_pd(m.gi, _mm256_loadu_pd(st.ci[j].data() + n), cross);
        t = _mm256_fmadd_pd(kc2, cross, t);
        acc[j] = _mm256_add_pd(acc[j], t);
      }
    }
  }
  for (int j = 0; j < d; ++j) {
    _mm256_store_pd(lane, acc[j]);
    grad_sums[j] += lane[0] + lane[1] + lane[2] + lane[3];
  }

  if (main_end < n1) grad_range_scalar(op, st, s, ridge, main_end, n1, grad_sums);
}

}  // namespace trainprecode::kernels
