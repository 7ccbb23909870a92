// SPDX-License-Identifier: Apache-2.0
#include "trainprecode/joint.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "trainprecode/pilot.hpp"
#include "trainprecode/precoder.hpp"
#include "trainprecode/rng.hpp"

namespace trainprecode {

namespace {

constexpr std::uint64_t kFreshStream = 0xf5e5u;

int nonzero_count(const Eigen::VectorXd& v) {
  const double vmax = v.cwiseAbs().maxCoeff();
  if (!(vmax > 0.0)) return 0;
  int c = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v(i) > 1e-9 * vmax) ++c;
  return c;
}

struct StepEval {
  double utility;
  double std_error;
};

StepEval eval_profile(const UtilitySpec& spec, const Eigen::VectorXd& s, double scale) {
  const UtilityValue v = evaluate(spec, s);
  return {scale * v.value, scale * v.std_error};
}

// Shared loop body of the two constraint flavors. `reproject` maps the
// intermediate (p', q') onto the Pareto border along its own profile ray.
JointResult run_iteration(
    const SystemConfig& cfg, const UtilitySpec& spec, const JointOptions& opt, Eigen::VectorXd p,
    Eigen::VectorXd q,
    const std::function<RayResult(const Direction&, const Eigen::VectorXd&)>& reproject) {
  cfg.validate();
  spec.validate(cfg.n_tx);
  const Eigen::VectorXd& r = cfg.channel_eigs;
  const double scale = opt.utility_scale;

  JointResult out;
  IterationTrace& trace = out.trace;
  Eigen::VectorXd s = snr_profile_vec(p, q, r);
  StepEval cur = eval_profile(spec, s, scale);
  trace.rows.push_back({p, q, s, cur.utility, cur.std_error});

  int plateau = 0;
  for (int it = 0; it < opt.max_iters; ++it) {
    // (a) pilots for the incumbent precoder, at the incumbent pilot budget
    const VecStepResult pa = optimize_pilot_vec(q, r, p.sum(), spec, &p);
    Eigen::VectorXd p_next = pa.x;
    if (scale * pa.utility < cur.utility) p_next = p;  // keep the incumbent

    // (b) precoder for the new pilots, at the incumbent transmit budget
    const VecStepResult qb = optimize_precoder_vec(p_next, r, q.sum(), spec, &q);
    Eigen::VectorXd q_next = qb.x;
    Eigen::VectorXd s_mid = qb.s;
    {
      const Eigen::VectorXd s_keep = snr_profile_vec(p_next, q, r);
      if (scale * qb.utility < eval_profile(spec, s_keep, scale).utility) {
        q_next = q;
        s_mid = s_keep;
      }
    }

    // (c) Pareto re-projection along the profile's own ray
    const double l1 = s_mid.sum();
    if (!(l1 > 0.0)) {
      p = p_next;
      q = q_next;
      s = s_mid;
      cur = eval_profile(spec, s, scale);
      trace.rows.push_back({p, q, s, cur.utility, cur.std_error});
      trace.converged = true;
      break;
    }
    const Direction e((s_mid / l1).eval());
    const RayResult ray = reproject(e, p_next);
    Eigen::VectorXd p_new = ray.p, q_new = ray.q, s_new = ray.s;
    StepEval next = eval_profile(spec, s_new, scale);
    if (next.utility < eval_profile(spec, s_mid, scale).utility) {
      // the ray solver may only match the incumbent up to numerics
      p_new = p_next;
      q_new = q_next;
      s_new = s_mid;
      next = eval_profile(spec, s_new, scale);
    }

    const double gain = next.utility - cur.utility;
    const double moved = (p_new - p).lpNorm<Eigen::Infinity>() +
                         (q_new - q).lpNorm<Eigen::Infinity>();
    p = p_new;
    q = q_new;
    s = s_new;
    cur = next;
    trace.rows.push_back({p, q, s, cur.utility, cur.std_error});

    if (gain <= opt.eps) {
      const double move_tol = 1e-6 * std::max(1.0, cfg.total_energy());
      if (moved <= move_tol) {
        trace.converged = true;
        break;
      }
      if (++plateau >= 5) {
        trace.cycle_detected = true;
        break;
      }
    } else {
      plateau = 0;
    }
  }

  // best iterate wins (relevant when a cycle was detected)
  std::size_t best = 0;
  for (std::size_t i = 1; i < trace.rows.size(); ++i)
    if (trace.rows[i].utility > trace.rows[best].utility) best = i;
  out.p_star = trace.rows[best].p;
  out.q_star = trace.rows[best].q;
  out.s_star = trace.rows[best].s;
  out.utility = trace.rows[best].utility;
  out.std_error = trace.rows[best].std_error;
  out.t_tau_star = cfg.training_duration;
  out.rank_star = nonzero_count(out.p_star);

  const UtilitySpec fresh =
      spec.with_seed(rng::derive_seed(spec.master_seed, kFreshStream));
  const StepEval fe = eval_profile(fresh, out.s_star, scale);
  out.utility_fresh = fe.utility;
  out.fresh_std_error = fe.std_error;
  return out;
}

}  // namespace

JointResult run_boost(const SystemConfig& cfg, const UtilitySpec& spec, const JointOptions& opt) {
  cfg.validate();
  const int n = cfg.n_tx;
  // Uniform full-power start: per-slot power mu during training and data.
  const Eigen::VectorXd p0 =
      Eigen::VectorXd::Constant(n, cfg.training_duration * cfg.power / n);
  const Eigen::VectorXd q0 = Eigen::VectorXd::Constant(n, cfg.power / n);
  return run_iteration(cfg, spec, opt, p0, q0,
                       [&](const Direction& e, const Eigen::VectorXd& warm) {
                         return maximize_nu_boost(e, cfg, &warm);
                       });
}

JointResult run_fixed_budgets(const SystemConfig& cfg, const UtilitySpec& spec, double mu_p,
                              double mu_q, const JointOptions& opt) {
  if (!(mu_p > 0.0) || !(mu_q > 0.0))
    throw std::invalid_argument("run_fixed_budgets: budgets must be positive");
  const int n = cfg.n_tx;
  const Eigen::VectorXd p0 = Eigen::VectorXd::Constant(n, mu_p / n);
  const Eigen::VectorXd q0 = Eigen::VectorXd::Constant(n, mu_q / n);
  return run_iteration(cfg, spec, opt, p0, q0,
                       [&](const Direction& e, const Eigen::VectorXd&) {
                         return maximize_nu_fixed_budgets(e, mu_p, mu_q, cfg);
                       });
}

FullFledgedResult run_full_fledged(const SystemConfig& cfg_base, const UtilitySpec& spec,
                                   const JointOptions& opt) {
  FullFledgedResult out;
  const int t_max = std::min(cfg_base.coherence_time - 1, cfg_base.n_tx);
  for (int t_tau = 1; t_tau <= t_max; ++t_tau) {
    SystemConfig cfg = cfg_base;
    cfg.training_duration = t_tau;
    JointOptions scaled = opt;
    scaled.utility_scale =
        opt.utility_scale * static_cast<double>(cfg.data_slots()) / cfg.coherence_time;
    out.per_duration.push_back(run_boost(cfg, spec, scaled));
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < out.per_duration.size(); ++i)
    if (out.per_duration[i].utility > out.per_duration[best].utility) best = i;
  out.best = out.per_duration[best];
  return out;
}

}  // namespace trainprecode
