// SPDX-License-Identifier: Apache-2.0
#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "trainprecode/kernels.hpp"

namespace trainprecode::kernels {

void finalize_stats(SampleStats& stats) {
  const int nr = stats.n_rx;
  const int d = stats.dim;
  if (nr < 1 || d < 1) throw std::invalid_argument("SampleStats: bad dimensions");
  if (stats.w.size() != stats.count * static_cast<std::size_t>(nr) * d)
    throw std::invalid_argument("SampleStats: raw buffer size mismatch");
  if (nr > 2) return;
  stats.a.assign(d, std::vector<double>(stats.count));
  if (nr == 2) {
    stats.b.assign(d, std::vector<double>(stats.count));
    stats.cr.assign(d, std::vector<double>(stats.count));
    stats.ci.assign(d, std::vector<double>(stats.count));
  }
  for (std::size_t n = 0; n < stats.count; ++n) {
    for (int j = 0; j < d; ++j) {
      const std::complex<double> w1 = stats.at(n, 0, j);
      stats.a[j][n] = std::norm(w1);
      if (nr == 2) {
        const std::complex<double> w2 = stats.at(n, 1, j);
        stats.b[j][n] = std::norm(w2);
        const std::complex<double> c = w1 * std::conj(w2);
        stats.cr[j][n] = c.real();
        stats.ci[j][n] = c.imag();
      }
    }
  }
}

namespace {

inline void accum(PartialSums& out, double v, bool want_sumsq) {
  out.sum += v;
  if (want_sumsq) out.sumsq += v * v;
}

// --- n_rx == 1 -------------------------------------------------------------

void value1(Op op, const SampleStats& st, const double* s, double ridge, std::size_t n0,
            std::size_t n1, bool want_sumsq, PartialSums& out) {
  const int d = st.dim;
  for (std::size_t n = n0; n < n1; ++n) {
    double m = ridge;
    for (int j = 0; j < d; ++j) m += s[j] * st.a[j][n];
    switch (op) {
      case Op::logdet: accum(out, std::log(std::max(m, 0.0)), want_sumsq); break;
      case Op::traceinv: accum(out, 1.0 / m, want_sumsq); break;
      case Op::det: accum(out, m, want_sumsq); break;
    }
  }
}

void grad1(Op op, const SampleStats& st, const double* s, double ridge, std::size_t n0,
           std::size_t n1, double* g) {
  const int d = st.dim;
  for (std::size_t n = n0; n < n1; ++n) {
    double m = ridge;
    for (int j = 0; j < d; ++j) m += s[j] * st.a[j][n];
    double f = 0.0;
    switch (op) {
      case Op::logdet: f = 1.0 / m; break;
      case Op::traceinv: f = 1.0 / (m * m); break;
      case Op::det: f = 1.0; break;  // det(M)/M for the 1x1 case
    }
    for (int j = 0; j < d; ++j) g[j] += f * st.a[j][n];
  }
}

// --- n_rx == 2 -------------------------------------------------------------

struct M2 {
  double alpha, beta, gr, gi, det;
};

inline M2 build2(const SampleStats& st, const double* s, double ridge, std::size_t n) {
  M2 m{ridge, ridge, 0.0, 0.0, 0.0};
  const int d = st.dim;
  for (int j = 0; j < d; ++j) {
    const double sj = s[j];
    m.alpha += sj * st.a[j][n];
    m.beta += sj * st.b[j][n];
    m.gr += sj * st.cr[j][n];
    m.gi += sj * st.ci[j][n];
  }
  m.det = m.alpha * m.beta - m.gr * m.gr - m.gi * m.gi;
  return m;
}

void value2(Op op, const SampleStats& st, const double* s, double ridge, std::size_t n0,
            std::size_t n1, bool want_sumsq, PartialSums& out) {
  for (std::size_t n = n0; n < n1; ++n) {
    const M2 m = build2(st, s, ridge, n);
    switch (op) {
      case Op::logdet: accum(out, std::log(std::max(m.det, 0.0)), want_sumsq); break;
      case Op::traceinv: accum(out, (m.alpha + m.beta) / m.det, want_sumsq); break;
      case Op::det: accum(out, m.det, want_sumsq); break;
    }
  }
}

void grad2(Op op, const SampleStats& st, const double* s, double ridge, std::size_t n0,
           std::size_t n1, double* g) {
  const int d = st.dim;
  for (std::size_t n = n0; n < n1; ++n) {
    const M2 m = build2(st, s, ridge, n);
    // Coefficients of the quadratic form tr(K G_j) with G_j the per-column
    // sample Gram; K = M^{-1}, M^{-2} or det(M) M^{-1} depending on op.
    double ka = 0.0, kb = 0.0, kc = 0.0;
    switch (op) {
      case Op::logdet: {
        const double scale = 1.0 / m.det;
        ka = m.beta * scale;
        kb = m.alpha * scale;
        kc = -scale;
        break;
      }
      case Op::traceinv: {
        const double scale = 1.0 / (m.det * m.det);
        const double g2 = m.gr * m.gr + m.gi * m.gi;
        ka = (m.beta * m.beta + g2) * scale;
        kb = (m.alpha * m.alpha + g2) * scale;
        kc = -(m.alpha + m.beta) * scale;
        break;
      }
      case Op::det:
        ka = m.beta;
        kb = m.alpha;
        kc = -1.0;
        break;
    }
    for (int j = 0; j < d; ++j)
      g[j] += ka * st.a[j][n] + kb * st.b[j][n] + 2.0 * kc * (m.gr * st.cr[j][n] + m.gi * st.ci[j][n]);
  }
}

// --- generic n_rx ----------------------------------------------------------

void value_generic(Op op, const SampleStats& st, const double* s, double ridge, std::size_t n0,
                   std::size_t n1, bool want_sumsq, PartialSums& out) {
  const int nr = st.n_rx;
  const int d = st.dim;
  Eigen::MatrixXcd w(nr, d), m(nr, nr);
  for (std::size_t n = n0; n < n1; ++n) {
    for (int k = 0; k < nr; ++k)
      for (int j = 0; j < d; ++j) w(k, j) = st.at(n, k, j);
    m = ridge * Eigen::MatrixXcd::Identity(nr, nr);
    for (int j = 0; j < d; ++j) m += s[j] * (w.col(j) * w.col(j).adjoint());
    Eigen::LLT<Eigen::MatrixXcd> llt(m);
    if (llt.info() != Eigen::Success) {
      if (op == Op::logdet) accum(out, -std::numeric_limits<double>::infinity(), want_sumsq);
      else accum(out, 0.0, want_sumsq);
      continue;
    }
    switch (op) {
      case Op::logdet: {
        double v = 0.0;
        for (int k = 0; k < nr; ++k) v += 2.0 * std::log(llt.matrixL()(k, k).real());
        accum(out, v, want_sumsq);
        break;
      }
      case Op::traceinv:
        accum(out, llt.solve(Eigen::MatrixXcd::Identity(nr, nr)).real().trace(), want_sumsq);
        break;
      case Op::det: {
        double v = 1.0;
        for (int k = 0; k < nr; ++k) v *= std::norm(llt.matrixL()(k, k));
        accum(out, v, want_sumsq);
        break;
      }
    }
  }
}

void grad_generic(Op op, const SampleStats& st, const double* s, double ridge, std::size_t n0,
                  std::size_t n1, double* g) {
  const int nr = st.n_rx;
  const int d = st.dim;
  Eigen::MatrixXcd w(nr, d), m(nr, nr);
  for (std::size_t n = n0; n < n1; ++n) {
    for (int k = 0; k < nr; ++k)
      for (int j = 0; j < d; ++j) w(k, j) = st.at(n, k, j);
    m = ridge * Eigen::MatrixXcd::Identity(nr, nr);
    for (int j = 0; j < d; ++j) m += s[j] * (w.col(j) * w.col(j).adjoint());
    Eigen::LLT<Eigen::MatrixXcd> llt(m);
    if (llt.info() != Eigen::Success)
      throw std::domain_error("gradient kernel: singular sample matrix");
    const Eigen::MatrixXcd sols = llt.solve(w);  // M^{-1} w_j per column
    double det = 1.0;
    if (op == Op::det)
      for (int k = 0; k < nr; ++k) det *= std::norm(llt.matrixL()(k, k));
    for (int j = 0; j < d; ++j) {
      double q;
      if (op == Op::traceinv) q = sols.col(j).squaredNorm();
      else q = (w.col(j).adjoint() * sols.col(j)).real()(0);
      g[j] += (op == Op::det) ? det * q : q;
    }
  }
}

}  // namespace

void value_range_scalar(Op op, const SampleStats& st, const double* s, double ridge,
                        std::size_t n0, std::size_t n1, bool want_sumsq, PartialSums& out) {
  if (st.n_rx == 1) value1(op, st, s, ridge, n0, n1, want_sumsq, out);
  else if (st.n_rx == 2) value2(op, st, s, ridge, n0, n1, want_sumsq, out);
  else value_generic(op, st, s, ridge, n0, n1, want_sumsq, out);
}

void grad_range_scalar(Op op, const SampleStats& st, const double* s, double ridge,
                       std::size_t n0, std::size_t n1, double* g) {
  if (st.n_rx == 1) grad1(op, st, s, ridge, n0, n1, g);
  else if (st.n_rx == 2) grad2(op, st, s, ridge, n0, n1, g);
  else grad_generic(op, st, s, ridge, n0, n1, g);
}

}  // namespace trainprecode::kernels
