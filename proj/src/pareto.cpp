// SPDX-License-Identifier: Apache-2.0
#include "trainprecode/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "trainprecode/pga.hpp"

namespace trainprecode {

Direction::Direction(Eigen::VectorXd v) : e(std::move(v)) {
  if (e.size() < 1) throw std::invalid_argument("Direction: empty");
  if ((e.array() < 0.0).any()) throw std::invalid_argument("Direction: entries must be non-negative");
  const double sum = e.sum();
  if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("Direction: 1-norm must be 1");
  if (!(e.maxCoeff() > 0.0)) throw std::invalid_argument("Direction: all-zero");
}

namespace {

std::vector<int> active_coords(const Direction& e) {
  std::vector<int> act;
  for (Eigen::Index i = 0; i < e.e.size(); ++i)
    if (e.e(i) > 0.0) act.push_back(static_cast<int>(i));
  return act;
}

// w_i = e_i (1 + r_i p_i) / (r_i^2 p_i), the per-coordinate ray weight.
double weight_sum(const Eigen::VectorXd& p, const Direction& e, const Eigen::VectorXd& r,
                  const std::vector<int>& act, Eigen::VectorXd* w_out) {
  double sum = 0.0;
  for (int i : act) {
    if (!(p(i) > 0.0)) throw std::domain_error("eta_and_q: p_i = 0 on an active direction coordinate");
    const double w = e.e(i) * (1.0 + r(i) * p(i)) / (r(i) * r(i) * p(i));
    if (w_out) (*w_out)(i) = w;
    sum += w;
  }
  return sum;
}

}  // namespace

std::pair<double, Eigen::VectorXd> eta_and_q(const Eigen::VectorXd& p, const Direction& e,
                                             const SystemConfig& cfg) {
  cfg.validate();
  const Eigen::VectorXd& r = cfg.channel_eigs;
  if (p.size() != r.size() || e.e.size() != r.size())
    throw std::invalid_argument("eta_and_q: dimension mismatch");
  const double budget = cfg.total_energy();
  if (p.sum() > budget + 1e-9) throw std::invalid_argument("eta_and_q: pilot energy over budget");
  const std::vector<int> act = active_coords(e);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(r.size());
  const double wsum = weight_sum(p, e, r, act, &w);
  const double residual = std::max(0.0, budget - p.sum()) / cfg.data_slots();
  const double eta = residual / wsum;
  Eigen::VectorXd q = Eigen::VectorXd::Zero(r.size());
  for (int i : act) q(i) = eta * w(i);
  return {eta, q};
}

double nu(const Eigen::VectorXd& p, const Direction& e, const SystemConfig& cfg) {
  const auto [eta, q] = eta_and_q(p, e, cfg);
  return eta / (1.0 + cfg.channel_eigs.dot(q) - eta);
}

double nu_reciprocal(const Eigen::VectorXd& p, const Direction& e, const SystemConfig& cfg) {
  const Eigen::VectorXd& r = cfg.channel_eigs;
  const std::vector<int> act = active_coords(e);
  const double rem = cfg.total_energy() - p.sum();
  if (!(rem > 0.0)) return std::numeric_limits<double>::infinity();
  double nu1 = 0.0, nu2 = 0.0, nu3 = 0.0;
  for (int i : act) {
    if (!(p(i) > 0.0)) return std::numeric_limits<double>::infinity();
    nu1 += e.e(i) / (r(i) * r(i)) / (p(i) * rem);
    nu2 += e.e(i) / r(i) / rem;
    nu3 += e.e(i) * (1.0 + r(i) * p(i)) / (r(i) * p(i));
  }
  return cfg.data_slots() * (nu1 + nu2) + nu3;
}

RayResult maximize_nu_boost(const Direction& e, const SystemConfig& cfg,
                            const Eigen::VectorXd* warm_p) {
  cfg.validate();
  const Eigen::VectorXd& r = cfg.channel_eigs;
  const Eigen::Index n = r.size();
  const std::vector<int> act = active_coords(e);
  const double budget = cfg.total_energy();
  const double lo = 1e-9 * budget;  // interior backstop off the 1/p poles
  const double slots = cfg.data_slots();

  // minimize (T - T_tau)(nu1 + nu2) + nu3 over the active coordinates
  const auto objective = [&](const Eigen::VectorXd& pa) {
    const double rem = budget - pa.sum();
    if (!(rem > 0.0)) return std::numeric_limits<double>::infinity();
    double nu1 = 0.0, nu2 = 0.0, nu3 = 0.0;
    for (std::size_t k = 0; k < act.size(); ++k) {
      const int i = act[k];
      nu1 += e.e(i) / (r(i) * r(i)) / (pa(k) * rem);
      nu2 += e.e(i) / r(i) / rem;
      nu3 += e.e(i) * (1.0 + r(i) * pa(k)) / (r(i) * pa(k));
    }
    return slots * (nu1 + nu2) + nu3;
  };
  const auto gradient_fn = [&](const Eigen::VectorXd& pa) {
    const double rem = budget - pa.sum();
    double nu1_sum = 0.0, b = 0.0;
    for (std::size_t k = 0; k < act.size(); ++k) {
      const int i = act[k];
      nu1_sum += e.e(i) / (r(i) * r(i)) / pa(k);
      b += e.e(i) / r(i);
    }
    Eigen::VectorXd g(act.size());
    for (std::size_t k = 0; k < act.size(); ++k) {
      const int i = act[k];
      const double a_i = e.e(i) / (r(i) * r(i));
      g(k) = slots * (-a_i / (pa(k) * pa(k) * rem) + (nu1_sum + b) / (rem * rem)) -
             e.e(i) / (r(i) * pa(k) * pa(k));
    }
    return g;
  };
  const auto project = [&](const Eigen::VectorXd& pa) {
    Eigen::VectorXd shifted = pa.array() - lo;
    shifted = project_capped_simplex(shifted, budget * (1.0 - 1e-9) - lo * act.size());
    return (shifted.array() + lo).matrix().eval();
  };

  Eigen::VectorXd p0(act.size());
  const double init_total = cfg.training_duration * cfg.power;
  for (std::size_t k = 0; k < act.size(); ++k) p0(k) = init_total / act.size();
  if (warm_p && warm_p->size() == n) {
    for (std::size_t k = 0; k < act.size(); ++k)
      if ((*warm_p)(act[k]) > lo) p0(k) = (*warm_p)(act[k]);
    p0 = project(p0);
  }

  // descent on the convex reciprocal = ascent on its negation
  const PgaResult res = pga_maximize(
      project(p0), [&](const Eigen::VectorXd& x) { return -objective(x); },
      [&](const Eigen::VectorXd& x) { return (-gradient_fn(x)).eval(); }, project,
      PgaOptions{1e-4, 1e-13, 20000, 1.0});

  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < act.size(); ++k) p(act[k]) = res.x(k);

  RayResult out;
  out.e = e.e;
  out.p = p;
  const auto [eta, q] = eta_and_q(p, e, cfg);
  out.eta = eta;
  out.q = q;
  out.nu = eta / (1.0 + r.dot(q) - eta);
  out.s = out.nu * e.e;
  return out;
}

RayResult maximize_nu_fixed_budgets(const Direction& e, double mu_p, double mu_q,
                                    const SystemConfig& cfg) {
  cfg.validate();
  if (!(mu_p > 0.0) || !(mu_q > 0.0))
    throw std::invalid_argument("maximize_nu_fixed_budgets: budgets must be positive");
  const Eigen::VectorXd& r = cfg.channel_eigs;
  const Eigen::Index n = r.size();
  const std::vector<int> act = active_coords(e);

  // p_i proportional to (1/r_i) sqrt(e_i (1 + mu_q r_i)), summing to mu_p
  Eigen::VectorXd raw = Eigen::VectorXd::Zero(n);
  double norm = 0.0;
  for (int i : act) {
    raw(i) = std::sqrt(e.e(i) * (1.0 + mu_q * r(i))) / r(i);
    norm += raw(i);
  }
  RayResult out;
  out.e = e.e;
  out.p = mu_p * raw / norm;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  const double wsum = weight_sum(out.p, e, r, act, &w);
  out.eta = mu_q / wsum;
  out.q = Eigen::VectorXd::Zero(n);
  for (int i : act) out.q(i) = out.eta * w(i);
  out.nu = out.eta / (1.0 + r.dot(out.q) - out.eta);
  out.s = out.nu * e.e;
  return out;
}

std::vector<Direction> border_directions(int n_dirs, int dim) {
  if (n_dirs < 1) throw std::invalid_argument("border_directions: n_dirs must be >= 1");
  std::vector<Direction> dirs;
  dirs.reserve(n_dirs);
  for (int k = 0; k < std::min(n_dirs, dim); ++k)
    dirs.emplace_back(Eigen::VectorXd::Unit(dim, k).eval());
  if (dim == 1 || static_cast<int>(dirs.size()) >= n_dirs) return dirs;

  // Kronecker sequence -> sorted-spacings map: uniform, deterministic cover.
  const int m = dim - 1;
  double phi = 2.0;
  for (int it = 0; it < 64; ++it) phi = std::pow(1.0 + phi, 1.0 / (m + 1));
  std::vector<double> alpha(m);
  for (int j = 0; j < m; ++j) alpha[j] = std::fmod(std::pow(1.0 / phi, j + 1), 1.0);

  for (int k = static_cast<int>(dirs.size()); k < n_dirs; ++k) {
    std::vector<double> u(m);
    for (int j = 0; j < m; ++j) u[j] = std::fmod(0.5 + (k + 1) * alpha[j], 1.0);
    std::sort(u.begin(), u.end());
    Eigen::VectorXd e(dim);
    double prev = 0.0;
    for (int j = 0; j < m; ++j) {
      e(j) = u[j] - prev;
      prev = u[j];
    }
    e(dim - 1) = 1.0 - prev;
    // exact renormalization guards the 1e-12 simplex invariant
    e = e.cwiseMax(0.0);
    e /= e.sum();
    dirs.emplace_back(std::move(e));
  }
  return dirs;
}

std::vector<RayResult> sample_border(int n_dirs, BorderMode mode, const SystemConfig& cfg,
                                     double mu_p, double mu_q) {
  const std::vector<Direction> dirs = border_directions(n_dirs, cfg.n_tx);
  std::vector<RayResult> out;
  out.reserve(dirs.size());
  for (const Direction& e : dirs) {
    if (mode == BorderMode::boost) out.push_back(maximize_nu_boost(e, cfg));
    else out.push_back(maximize_nu_fixed_budgets(e, mu_p, mu_q, cfg));
  }
  return out;
}

}  // namespace trainprecode
