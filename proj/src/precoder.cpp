// SPDX-License-Identifier: Apache-2.0
#include "trainprecode/precoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "trainprecode/pga.hpp"

namespace trainprecode {

namespace {

double real_trace_prod(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a * b).real().trace();
}

}  // namespace

Eigen::MatrixXcd lf_apply(const LinearFractionalMap& map, const Eigen::MatrixXcd& x) {
  require_hermitian(x, "lf_apply argument");
  const double denom = 1.0 + real_trace_prod(map.b, x);
  if (denom <= 1e-12) throw std::domain_error("lf_apply: denominator not positive");
  return hermitian_part(map.a * x * map.a.adjoint()) / denom;
}

Eigen::MatrixXcd lf_invert(const LinearFractionalMap& map, const Eigen::MatrixXcd& y, LfMode mode) {
  require_hermitian(y, "lf_invert argument");
  Eigen::MatrixXcd a_pseudo;
  if (mode == LfMode::full_column_rank) {
    const Eigen::MatrixXcd gram = hermitian_part(map.a.adjoint() * map.a);
    a_pseudo = gram.llt().solve(map.a.adjoint());  // (A^H A)^{-1} A^H
  } else {
    const Eigen::MatrixXcd gram = hermitian_part(map.a * map.a.adjoint());
    a_pseudo = (gram.llt().solve(map.a)).adjoint();  // A^H (A A^H)^{-1}
  }
  const Eigen::MatrixXcd core = hermitian_part(a_pseudo * y * a_pseudo.adjoint());
  const double denom = 1.0 - real_trace_prod(map.b, core);
  if (denom <= 1e-12) throw std::domain_error("lf_invert: image outside the invertible region");
  return core / denom;
}

double segment_beta(const LinearFractionalMap& map, const Eigen::MatrixXcd& x1,
                    const Eigen::MatrixXcd& x2, double alpha) {
  const double t1 = real_trace_prod(map.b, x1);
  const double t2 = real_trace_prod(map.b, x2);
  return alpha * (1.0 + t1) / (1.0 + alpha * t1 + (1.0 - alpha) * t2);
}

SimplexRegion simplex_region(const GramMatrix& p, const ChannelCovariance& r, double mu_q) {
  if (!(mu_q > 0.0)) throw std::invalid_argument("simplex_region: mu_q must be positive");
  const Eigen::Index n = r.dim();
  SimplexRegion region;
  region.mu_q = mu_q;
  region.r_p = p.rank();
  region.omegas = Eigen::VectorXd::Zero(n);
  region.vertices.push_back(Eigen::VectorXd::Zero(n));
  if (region.r_p == 0) {
    region.basis = Eigen::MatrixXcd::Zero(n, 0);
    region.basis_sqnorm = Eigen::VectorXd::Zero(0);
    return region;
  }

  const EstimationCovariances cov = estimation_covariances(p, r);
  const Eigen::MatrixXcd b =
      Eigen::MatrixXcd::Identity(n, n) / mu_q + cov.r_tilde;
  const EigenProfile ge = gevp(cov.r_hat, b);

  for (int i = 0; i < region.r_p; ++i) region.omegas(i) = std::max(ge.values(i), 0.0);
  region.basis = ge.basis.leftCols(region.r_p);
  region.basis_sqnorm = region.basis.colwise().squaredNorm().real();

  double inv_sum = 0.0;
  for (int k = 1; k <= region.r_p; ++k) {
    if (!(region.omegas(k - 1) > 0.0))
      throw std::runtime_error("simplex_region: nonzero eigenvalue count below rank(P)");
    inv_sum += 1.0 / region.omegas(k - 1);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v.head(k).setConstant(1.0 / inv_sum);
    region.vertices.push_back(std::move(v));
  }
  return region;
}

SimplexCoords simplex_coords(const SimplexRegion& region, const Eigen::VectorXd& profile) {
  Eigen::VectorXd s = profile;
  std::sort(s.data(), s.data() + s.size(), std::greater<double>());
  SimplexCoords out;
  out.nu = Eigen::VectorXd::Zero(region.r_p);
  for (Eigen::Index i = region.r_p; i < s.size(); ++i) out.tail = std::max(out.tail, std::abs(s(i)));
  for (int k = 1; k <= region.r_p; ++k) {
    const double h = region.vertices[k](0);  // common entry value of sigma^(k)
    const double next = (k < region.r_p) ? s(k) : 0.0;
    out.nu(k - 1) = (s(k - 1) - next) / h;
    out.nu_sum += s(k - 1) / region.omegas(k - 1);
  }
  return out;
}

Eigen::MatrixXcd q_from_profile(const SimplexRegion& region, const Eigen::VectorXd& s_target) {
  const Eigen::Index n = region.omegas.size();
  if (region.r_p == 0) return Eigen::MatrixXcd::Zero(n, n);
  double ratio = 0.0, norm_ratio = 0.0;
  for (int i = 0; i < region.r_p; ++i) {
    ratio += s_target(i) / region.omegas(i);
    norm_ratio += s_target(i) * region.basis_sqnorm(i) / region.omegas(i);
  }
  const double factor = 1.0 - ratio + norm_ratio / region.mu_q;
  if (factor <= 1e-12) throw std::domain_error("q_from_profile: target outside the region");
  const double d = 1.0 / factor;
  Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < region.r_p; ++i) {
    const double c = s_target(i) * d / region.omegas(i);
    if (c != 0.0) q += c * (region.basis.col(i) * region.basis.col(i).adjoint());
  }
  return hermitian_part(q);
}

namespace {

struct NuProblem {
  Eigen::MatrixXd vertex_mat;  // n x r_p, column k-1 = sigma^(k)
  const UtilitySpec* spec;

  Eigen::VectorXd profile(const Eigen::VectorXd& nu) const { return vertex_mat * nu; }
  double value(const Eigen::VectorXd& nu) const { return evaluate(*spec, profile(nu)).value; }
  Eigen::VectorXd grad(const Eigen::VectorXd& nu) const {
    return vertex_mat.transpose() * gradient(*spec, profile(nu));
  }
};

// Maximizes over the barycentric weights; falls back to vertex enumeration
// when the utility is degenerate (-inf or non-differentiable) on the region.
struct NuSolve {
  Eigen::VectorXd nu;
  bool multistart = false;
};

NuSolve solve_over_simplex(const NuProblem& prob, int r_p, const Eigen::VectorXd* warm) {
  const auto project = [](const Eigen::VectorXd& x) { return project_capped_simplex(x, 1.0); };
  std::vector<Eigen::VectorXd> starts;
  if (warm && warm->size() == r_p) starts.push_back(project(*warm));
  starts.push_back(Eigen::VectorXd::Constant(r_p, 1.0 / (r_p + 1)));

  NuSolve out;
  const bool concave = is_concave(prob.spec->kind);
  if (!concave) {
    out.multistart = true;
    for (int k = 0; k < r_p; ++k) starts.push_back(Eigen::VectorXd::Unit(r_p, k));
  }

  double best = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& x0 : starts) {
    try {
      const PgaResult res = pga_maximize(
          x0, [&](const Eigen::VectorXd& x) { return prob.value(x); },
          [&](const Eigen::VectorXd& x) { return prob.grad(x); }, project, PgaOptions{});
      if (!any || res.value > best) {
        best = res.value;
        out.nu = res.x;
        any = true;
      }
    } catch (const std::domain_error&) {
      // non-differentiable start; try the others
    }
    if (concave && any) break;
  }
  if (!any) {
    // Degenerate utility on the whole region: pick the best vertex by value.
    out.multistart = true;
    best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < r_p; ++k) {
      const Eigen::VectorXd nu = Eigen::VectorXd::Unit(r_p, k);
      const double v = prob.value(nu);
      if (!any || v > best) {
        best = v;
        out.nu = nu;
        any = true;
      }
    }
  }
  return out;
}

}  // namespace

PrecoderResult optimize_precoder(const GramMatrix& p, const ChannelCovariance& r, double mu_q,
                                 const UtilitySpec& spec) {
  const Eigen::Index n = r.dim();
  spec.validate(static_cast<int>(n));
  PrecoderResult out;
  const SimplexRegion region = simplex_region(p, r, mu_q);
  if (region.r_p == 0) {
    out.q_star = GramMatrix(Eigen::MatrixXcd::Zero(n, n), GramRole::transmit, mu_q);
    out.s_star = Eigen::VectorXd::Zero(n);
    out.utility = evaluate(spec, out.s_star).value;
    return out;
  }

  NuProblem prob;
  prob.vertex_mat = Eigen::MatrixXd(n, region.r_p);
  for (int k = 1; k <= region.r_p; ++k) prob.vertex_mat.col(k - 1) = region.vertices[k];
  prob.spec = &spec;

  const NuSolve sol = solve_over_simplex(prob, region.r_p, nullptr);
  out.multistart = sol.multistart;
  out.s_star = prob.profile(sol.nu);
  const UtilityValue val = evaluate(spec, out.s_star);
  out.utility = val.value;
  out.std_error = val.std_error;
  out.q_star = GramMatrix(q_from_profile(region, out.s_star), GramRole::transmit, mu_q);

  const EstimationCovariances cov = estimation_covariances(p, r);
  const double comm_scale = std::max(1.0, cov.r_hat.norm() * cov.r_tilde.norm());
  out.vertex_optimal_only =
      (cov.r_hat * cov.r_tilde - cov.r_tilde * cov.r_hat).norm() > 1e-10 * comm_scale;
  return out;
}

VecStepResult optimize_precoder_vec(const Eigen::VectorXd& p, const Eigen::VectorXd& r,
                                    double mu_q, const UtilitySpec& spec,
                                    const Eigen::VectorXd* warm_q) {
  const Eigen::Index n = r.size();
  VecStepResult out;
  const Eigen::VectorXd rh = r_hat_vec(p, r);
  const Eigen::VectorXd rt = r_tilde_vec(p, r);
  Eigen::VectorXd omega(n);
  for (Eigen::Index i = 0; i < n; ++i) omega(i) = rh(i) / (1.0 / mu_q + rt(i));

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return omega(a) > omega(b); });
  const double omax = omega(order[0]);
  int r_p = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (omega(i) > 1e-9 * omax) ++r_p;

  if (r_p == 0 || !(omax > 0.0)) {
    out.x = Eigen::VectorXd::Zero(n);
    out.s = Eigen::VectorXd::Zero(n);
    const UtilityValue val = evaluate(spec, out.s);
    out.utility = val.value;
    out.std_error = val.std_error;
    return out;
  }

  // Vertex columns live in coordinate order: sigma^(k) spreads H(w_1..w_k)
  // over the k strongest coordinates.
  NuProblem prob;
  prob.vertex_mat = Eigen::MatrixXd::Zero(n, r_p);
  double inv_sum = 0.0;
  Eigen::VectorXd h(r_p);
  for (int k = 0; k < r_p; ++k) {
    inv_sum += 1.0 / omega(order[k]);
    h(k) = 1.0 / inv_sum;
    for (int j = 0; j <= k; ++j) prob.vertex_mat(order[j], k) = h(k);
  }
  prob.spec = &spec;

  Eigen::VectorXd warm_nu;
  if (warm_q && warm_q->size() == n) {
    const Eigen::VectorXd s_inc = snr_profile_vec(p, *warm_q, r);
    Eigen::VectorXd sorted(r_p);
    for (int k = 0; k < r_p; ++k) sorted(k) = s_inc(order[k]);
    std::sort(sorted.data(), sorted.data() + r_p, std::greater<double>());
    warm_nu = Eigen::VectorXd::Zero(r_p);
    for (int k = 0; k < r_p; ++k) {
      const double next = (k + 1 < r_p) ? sorted(k + 1) : 0.0;
      warm_nu(k) = (sorted(k) - next) / h(k);
    }
  }

  const NuSolve sol =
      solve_over_simplex(prob, r_p, warm_nu.size() ? &warm_nu : nullptr);
  out.s = prob.profile(sol.nu);

  // q_i = s_i D / r_hat_i with D = 1/(1 - sum s_i r_tilde_i / r_hat_i).
  double ratio = 0.0;
  for (int k = 0; k < r_p; ++k) {
    const int i = order[k];
    if (out.s(i) > 0.0) ratio += out.s(i) * rt(i) / rh(i);
  }
  const double d = 1.0 / std::max(1e-300, 1.0 - ratio);
  out.x = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < r_p; ++k) {
    const int i = order[k];
    if (out.s(i) > 0.0) out.x(i) = out.s(i) * d / rh(i);
  }
  const UtilityValue val = evaluate(spec, out.s);
  out.utility = val.value;
  out.std_error = val.std_error;
  return out;
}

}  // namespace trainprecode
