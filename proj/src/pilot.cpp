// SPDX-License-Identifier: Apache-2.0
#include "trainprecode/pilot.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "trainprecode/diagnostics.hpp"
#include "trainprecode/pga.hpp"

namespace trainprecode {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXcd psd_clamped(const Eigen::MatrixXcd& a) {
  EigenProfile ep = eig_hermitian(a);
  bool touched = false;
  for (Eigen::Index i = 0; i < ep.values.size(); ++i)
    if (ep.values(i) < 0.0) {
      ep.values(i) = 0.0;
      touched = true;
    }
  if (touched) diagnostics::clamped_eigenvalues().fetch_add(1, std::memory_order_relaxed);
  return hermitian_part(ep.basis * ep.values.asDiagonal() * ep.basis.adjoint());
}

}  // namespace

double EstimateCovDomain::pilot_energy(const Eigen::MatrixXcd& r_hat) const {
  const Eigen::VectorXd gap = eig_hermitian(hermitian_part(r.r - r_hat)).values;
  if (!(gap(gap.size() - 1) > 0.0)) return kInf;
  return gap.cwiseInverse().sum() - r.eigen.values.cwiseInverse().sum();
}

bool EstimateCovDomain::contains(const Eigen::MatrixXcd& r_hat, double tol) const {
  const Eigen::VectorXd ev = eig_hermitian(r_hat).values;
  const double scale = std::max(1.0, r.eigen.values(0));
  if (ev(ev.size() - 1) < -tol * scale) return false;
  return pilot_energy(r_hat) <= mu_p + tol;
}

EffectiveSnr s_prime(const Eigen::MatrixXcd& r_hat, const GramMatrix& q,
                     const ChannelCovariance& r) {
  require_hermitian(r_hat, "s_prime R_hat");
  const double tau = 1.0 + (q.m * r.r).real().trace();
  const double denom = tau - (q.m * r_hat).real().trace();
  if (denom <= 1e-12) throw std::domain_error("s_prime: denominator not positive");
  const Eigen::MatrixXcd root = sqrt_psd(q.m);
  EffectiveSnr out;
  out.denom = denom;
  out.s = hermitian_part(root * r_hat * root) / denom;
  out.profile = psd_profile(out.s);
  return out;
}

GramMatrix pilot_from_estimate_cov(const Eigen::MatrixXcd& r_hat, const ChannelCovariance& r) {
  require_hermitian(r_hat, "pilot_from_estimate_cov R_hat");
  const Eigen::Index n = r.dim();
  const Eigen::VectorXd diff = eig_hermitian(hermitian_part(r_hat - r.r)).values;
  if (!(diff(0) < -1e-10))
    throw std::domain_error("pilot_from_estimate_cov: R_hat must be strictly below R");
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(n, n);
  const Eigen::MatrixXcd inv_gap = hermitian_part(r.r - r_hat).llt().solve(eye);
  const Eigen::MatrixXcd inv_r = r.r.llt().solve(eye);
  const Eigen::MatrixXcd p = psd_clamped(hermitian_part(inv_gap - inv_r));
  return GramMatrix(p, GramRole::pilot, std::max(0.0, p.real().trace()));
}

// --- aligned vector path -----------------------------------------------------

namespace {

struct PilotVecProblem {
  Eigen::VectorXd q, r;
  double mu_p = 0.0;
  double tau = 0.0;
  std::vector<int> active;
  const UtilitySpec* spec;

  Eigen::VectorXd profile(const Eigen::VectorXd& rhat) const {
    const double d = tau - q.dot(rhat);
    return (q.array() * rhat.array() / d).matrix();
  }
  double energy(const Eigen::VectorXd& rhat) const {
    double e = 0.0;
    for (int i : active) {
      const double gap = r(i) - rhat(i);
      if (!(gap > 0.0)) return kInf;
      e += 1.0 / gap - 1.0 / r(i);
    }
    return e;
  }
  double value(const Eigen::VectorXd& rhat) const { return evaluate(*spec, profile(rhat)).value; }
  Eigen::VectorXd grad(const Eigen::VectorXd& rhat) const {
    const Eigen::VectorXd s = profile(rhat);
    const Eigen::VectorXd g = gradient(*spec, s);
    const double d = tau - q.dot(rhat);
    const double inner = g.dot(s);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(rhat.size());
    for (int i : active) out(i) = q(i) / d * (g(i) + inner);
    return out;
  }
  // Box clip, then pull back toward the feasible anchor until the energy
  // constraint holds (bisection; the constraint is convex along the ray).
  Eigen::VectorXd project(const Eigen::VectorXd& y, const Eigen::VectorXd& anchor) const {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(y.size());
    for (int i : active) {
      const double hi = r(i) - 1.0 / (mu_p + 1.0 / r(i));
      z(i) = std::clamp(y(i), 0.0, hi);
    }
    if (energy(z) <= mu_p) return z;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const Eigen::VectorXd cand = anchor + mid * (z - anchor);
      const double e = energy(cand);
      if (e > mu_p) hi = mid;
      else lo = mid;
      if (std::isfinite(e) && std::abs(e - mu_p) <= 1e-10 * std::max(1.0, mu_p)) break;
    }
    return anchor + lo * (z - anchor);
  }
};

VecStepResult run_pilot_vec(const PilotVecProblem& prob, Eigen::VectorXd rhat0) {
  VecStepResult out;
  Eigen::VectorXd x = prob.project(rhat0, Eigen::VectorXd::Zero(rhat0.size()));
  double v;
  try {
    v = prob.value(x);
  } catch (const std::domain_error&) {
    v = -kInf;
  }
  double step = 1.0;
  for (int it = 0; it < 5000; ++it) {
    Eigen::VectorXd g;
    try {
      g = prob.grad(x);
    } catch (const std::domain_error&) {
      break;  // utility degenerate here; keep the incumbent
    }
    bool accepted = false;
    Eigen::VectorXd cand;
    double vc = v;
    for (int h = 0; h < 64; ++h) {
      cand = prob.project(x + step * g, x);
      vc = prob.value(cand);
      if (std::isfinite(vc) && vc >= v && vc >= v + 1e-4 * g.dot(cand - x)) {
        accepted = true;
        break;
      }
      step *= 0.5;
      if (step < 1e-18) break;
    }
    if (!accepted) break;
    const double improve = vc - v;
    x = cand;
    v = vc;
    step = std::min(step * 2.0, 1e12);
    if (improve <= 1e-9 * std::max(1.0, std::abs(v))) break;
  }
  out.s = prob.profile(x);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(x.size());
  for (int i : prob.active) {
    const double gap = prob.r(i) - x(i);
    p(i) = x(i) / (prob.r(i) * gap);
  }
  out.x = p;
  const UtilityValue val = evaluate(*prob.spec, out.s);
  out.utility = val.value;
  out.std_error = val.std_error;
  return out;
}

}  // namespace

VecStepResult optimize_pilot_vec(const Eigen::VectorXd& q, const Eigen::VectorXd& r, double mu_p,
                                 const UtilitySpec& spec, const Eigen::VectorXd* warm_p) {
  const Eigen::Index n = r.size();
  PilotVecProblem prob;
  prob.q = q;
  prob.r = r;
  prob.mu_p = mu_p;
  prob.tau = 1.0 + q.dot(r);
  prob.spec = &spec;
  const double qmax = q.maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i)
    if (q(i) > 1e-12 * std::max(qmax, 1.0) && q(i) > 0.0) prob.active.push_back(static_cast<int>(i));

  if (prob.active.empty() || !(mu_p > 0.0)) {
    VecStepResult out;
    out.x = Eigen::VectorXd::Zero(n);
    out.s = Eigen::VectorXd::Zero(n);
    const UtilityValue val = evaluate(spec, out.s);
    out.utility = val.value;
    out.std_error = val.std_error;
    return out;
  }

  Eigen::VectorXd p0 = Eigen::VectorXd::Zero(n);
  if (warm_p && warm_p->size() == n && warm_p->sum() > 0.0) {
    p0 = warm_p->cwiseMax(0.0);
    const double total = p0.sum();
    if (total > mu_p) p0 *= mu_p / total;
    for (Eigen::Index i = 0; i < n; ++i) {
      bool act = false;
      for (int j : prob.active) act = act || (j == i);
      if (!act) p0(i) = 0.0;
    }
  } else {
    for (int i : prob.active) p0(i) = mu_p / static_cast<double>(prob.active.size());
  }
  Eigen::VectorXd rhat0 = Eigen::VectorXd::Zero(n);
  for (int i : prob.active) rhat0(i) = r(i) * r(i) * p0(i) / (1.0 + r(i) * p0(i));
  return run_pilot_vec(prob, rhat0);
}

// --- matrix path -------------------------------------------------------------

namespace {

struct PilotMatProblem {
  Eigen::MatrixXcd q, root_q;
  const ChannelCovariance* r = nullptr;
  double mu_p = 0.0;
  double tau = 0.0;
  const UtilitySpec* spec = nullptr;

  double energy(const Eigen::MatrixXcd& rhat) const {
    const Eigen::VectorXd gap = eig_hermitian(hermitian_part(r->r - rhat)).values;
    if (!(gap(gap.size() - 1) > 0.0)) return kInf;
    return gap.cwiseInverse().sum() - r->eigen.values.cwiseInverse().sum();
  }
  Eigen::MatrixXcd snr(const Eigen::MatrixXcd& rhat, double& denom) const {
    denom = tau - (q * rhat).real().trace();
    return hermitian_part(root_q * rhat * root_q.adjoint()) / denom;
  }
  double value(const Eigen::MatrixXcd& rhat) const {
    double denom;
    return evaluate(*spec, psd_profile(snr(rhat, denom))).value;
  }
  Eigen::MatrixXcd grad(const Eigen::MatrixXcd& rhat) const {
    double denom;
    const Eigen::MatrixXcd sp = snr(rhat, denom);
    const EigenProfile ep = eig_hermitian(sp);
    const Eigen::VectorXd g = gradient(*spec, ep.values.cwiseMax(0.0));
    const Eigen::MatrixXcd gm = ep.basis * g.asDiagonal() * ep.basis.adjoint();
    const double trace_gs = (gm * sp).real().trace();
    return hermitian_part(root_q.adjoint() * gm * root_q / denom + (trace_gs / denom) * q);
  }
  Eigen::MatrixXcd project(const Eigen::MatrixXcd& y, const Eigen::MatrixXcd& anchor) const {
    Eigen::MatrixXcd z = psd_clamped(hermitian_part(y));
    if (energy(z) <= mu_p) return z;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double e = energy(anchor + mid * (z - anchor));
      if (e > mu_p) hi = mid;
      else lo = mid;
      if (std::isfinite(e) && std::abs(e - mu_p) <= 1e-10 * std::max(1.0, mu_p)) break;
    }
    return anchor + lo * (z - anchor);
  }
};

}  // namespace

PilotResult optimize_pilot(const GramMatrix& q, const ChannelCovariance& r, double mu_p,
                           const UtilitySpec& spec) {
  const Eigen::Index n = r.dim();
  spec.validate(static_cast<int>(n));
  if (!(mu_p > 0.0)) throw std::invalid_argument("optimize_pilot: mu_p must be positive");
  PilotResult out;

  if (q.rank() == 0) {
    out.p_star = GramMatrix(Eigen::MatrixXcd::Zero(n, n), GramRole::pilot, 0.0);
    out.s_star = Eigen::VectorXd::Zero(n);
    const UtilityValue val = evaluate(spec, out.s_star);
    out.utility = val.value;
    out.std_error = val.std_error;
    return out;
  }

  const double comm_scale = std::max(1.0, q.m.norm() * r.r.norm());
  const bool aligned = (q.m * r.r - r.r * q.m).norm() <= 1e-10 * comm_scale;

  if (aligned) {
    out.aligned_path = true;
    // Diagonalize R; refine degenerate blocks so Q is diagonal in the basis.
    EigenProfile re = r.eigen;
    Eigen::MatrixXcd u = re.basis;
    Eigen::Index i = 0;
    while (i < n) {
      Eigen::Index j = i + 1;
      while (j < n && std::abs(re.values(j) - re.values(i)) <= 1e-10 * re.values(0)) ++j;
      if (j - i > 1) {
        const Eigen::MatrixXcd block =
            hermitian_part(u.middleCols(i, j - i).adjoint() * q.m * u.middleCols(i, j - i));
        u.middleCols(i, j - i) = u.middleCols(i, j - i) * eig_hermitian(block).basis;
      }
      i = j;
    }
    const Eigen::VectorXd q_diag = (u.adjoint() * q.m * u).diagonal().real().cwiseMax(0.0);
    const VecStepResult vec = optimize_pilot_vec(q_diag, re.values, mu_p, spec, nullptr);
    Eigen::MatrixXcd p = hermitian_part(u * vec.x.cast<Cx>().asDiagonal() * u.adjoint());
    p = psd_clamped(p);
    out.p_star = GramMatrix(p, GramRole::pilot, mu_p);
    out.s_star = vec.s;
    std::sort(out.s_star.data(), out.s_star.data() + out.s_star.size(), std::greater<double>());
    const UtilityValue val = evaluate(spec, out.s_star);
    out.utility = val.value;
    out.std_error = val.std_error;
    return out;
  }

  PilotMatProblem prob;
  prob.q = q.m;
  prob.root_q = sqrt_psd(q.m);
  prob.r = &r;
  prob.mu_p = mu_p;
  prob.tau = 1.0 + (q.m * r.r).real().trace();
  prob.spec = &spec;

  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(n, n);
  double v;
  try {
    v = prob.value(x);
  } catch (const std::domain_error&) {
    v = -kInf;
  }
  double step = 1.0;
  for (int it = 0; it < 5000; ++it) {
    Eigen::MatrixXcd g;
    try {
      g = prob.grad(x);
    } catch (const std::domain_error&) {
      break;
    }
    bool accepted = false;
    Eigen::MatrixXcd cand;
    double vc = v;
    for (int h = 0; h < 64; ++h) {
      cand = prob.project(x + step * g, x);
      vc = prob.value(cand);
      const double directional = (g * (cand - x)).real().trace();
      if (std::isfinite(vc) && vc >= v && vc >= v + 1e-4 * directional) {
        accepted = true;
        break;
      }
      step *= 0.5;
      if (step < 1e-18) break;
    }
    if (!accepted) break;
    const double improve = vc - v;
    x = cand;
    v = vc;
    step = std::min(step * 2.0, 1e12);
    if (improve <= 1e-9 * std::max(1.0, std::abs(v))) break;
  }

  // Trim sub-threshold eigenvalues so rank(P*) respects rank(Q) exactly.
  EigenProfile xe = eig_hermitian(x);
  const int rank = rank_by_threshold(xe.values);
  Eigen::MatrixXcd rhat = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k < rank; ++k)
    rhat += xe.values(k) * (xe.basis.col(k) * xe.basis.col(k).adjoint());
  rhat = hermitian_part(rhat);

  if (rank == 0) {
    out.p_star = GramMatrix(Eigen::MatrixXcd::Zero(n, n), GramRole::pilot, 0.0);
    out.s_star = Eigen::VectorXd::Zero(n);
  } else {
    out.p_star = pilot_from_estimate_cov(rhat, r);
    double denom;
    out.s_star = psd_profile(prob.snr(rhat, denom));
  }
  const UtilityValue val = evaluate(spec, out.s_star);
  out.utility = val.value;
  out.std_error = val.std_error;
  return out;
}

}  // namespace trainprecode
