// SPDX-License-Identifier: Apache-2.0
#include "trainprecode/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "trainprecode/parallel.hpp"

namespace trainprecode {

void GridSpec::validate() const {
  cfg.validate();
  if (resolution < 2) throw std::invalid_argument("GridSpec: resolution must be >= 2");
  if (cfg.n_tx > 2) throw std::invalid_argument("grid_search_joint: refuses n_tx > 2");
  if (mode == GridMode::fixed_budgets && (!(mu_p > 0.0) || !(mu_q > 0.0)))
    throw std::invalid_argument("GridSpec: fixed budgets must be positive");
}

namespace {

struct BestPoint {
  double utility = -std::numeric_limits<double>::infinity();
  std::size_t index = static_cast<std::size_t>(-1);
  Eigen::VectorXd p, q;

  void offer(double u, std::size_t idx, const Eigen::VectorXd& pp, const Eigen::VectorXd& qq) {
    if (u > utility || (u == utility && idx < index)) {
      utility = u;
      index = idx;
      p = pp;
      q = qq;
    }
  }
  void merge(const BestPoint& o) {
    if (o.index != static_cast<std::size_t>(-1)) offer(o.utility, o.index, o.p, o.q);
  }
};

}  // namespace

GridOptimum grid_search_joint(const GridSpec& grid, const UtilitySpec& spec) {
  grid.validate();
  spec.validate(grid.cfg.n_tx);
  const SystemConfig& cfg = grid.cfg;
  const Eigen::VectorXd& r = cfg.channel_eigs;
  const int res = grid.resolution;
  const double slots = cfg.data_slots();

  const auto value = [&](const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    return evaluate_mean(spec, snr_profile_vec(p, q, r));
  };

  BestPoint best;
  if (cfg.n_tx == 1) {
    if (grid.mode == GridMode::boost) {
      const double budget = cfg.total_energy();
      for (int i = 0; i < res; ++i) {
        Eigen::VectorXd p(1), q(1);
        p(0) = budget * i / (res - 1);
        q(0) = (budget - p(0)) / slots;
        best.offer(value(p, q), static_cast<std::size_t>(i), p, q);
      }
    } else {
      Eigen::VectorXd p(1), q(1);
      p(0) = grid.mu_p;
      q(0) = grid.mu_q;
      best.offer(value(p, q), 0, p, q);
    }
    return {best.p, best.q, best.utility};
  }

  if (grid.mode == GridMode::fixed_budgets) {
    // p1 + p2 = mu_p, q1 + q2 = mu_q: two free axes
    for (int i = 0; i < res; ++i) {
      const double p1 = grid.mu_p * i / (res - 1);
      Eigen::VectorXd p(2);
      p << p1, std::max(0.0, grid.mu_p - p1);
      for (int j = 0; j < res; ++j) {
        const double q1 = grid.mu_q * j / (res - 1);
        Eigen::VectorXd q(2);
        q << q1, std::max(0.0, grid.mu_q - q1);
        best.offer(value(p, q), static_cast<std::size_t>(i) * res + j, p, q);
      }
    }
    return {best.p, best.q, best.utility};
  }

  // boost: p1, p2, q1 free; q2 fixed by the full-power constraint
  const double budget = cfg.total_energy();
  std::vector<BestPoint> partial(res);
  parallel_tiles(static_cast<std::size_t>(res), 1, [&](std::size_t tile, std::size_t i0, std::size_t) {
    const int i = static_cast<int>(i0);
    BestPoint local;
    const double p1 = budget * i / (res - 1);
    Eigen::VectorXd p(2), q(2);
    for (int j = 0; j < res; ++j) {
      const double p2 = (budget - p1) * j / (res - 1);
      const double data_energy = budget - p1 - p2;
      for (int k = 0; k < res; ++k) {
        const double q1 = (data_energy / slots) * k / (res - 1);
        p << p1, p2;
        q << q1, std::max(0.0, data_energy / slots - q1);
        const std::size_t idx =
            (static_cast<std::size_t>(i) * res + j) * res + k;
        local.offer(value(p, q), idx, p, q);
      }
    }
    partial[tile] = local;
  });
  for (const auto& bp : partial) best.merge(bp);
  return {best.p, best.q, best.utility};
}

// --- scalar-channel quadrature -------------------------------------------------

namespace {

double integrand(QuadKind kind, double s, double t) {
  if (kind == QuadKind::mutual_info) return std::exp(-t) * std::log1p(s * t);
  return std::exp(-t) / (1.0 + s * t);
}

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(QuadKind kind, double s, double a, double b, double fa, double fm, double fb,
                double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = integrand(kind, s, lm), frm = integrand(kind, s, rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive(kind, s, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive(kind, s, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// 20-point Gauss-Legendre nodes/weights on [-1, 1)
constexpr int kGlN = 10;
constexpr double kGlX[kGlN] = {0.0765265211334973, 0.2277858511416451, 0.3737060887154195,
                               0.5108670019508271, 0.6360536807265150, 0.7463319064601508,
                               0.8391169718222188, 0.9122344282513259, 0.9639719272779138,
                               0.9931285991850949};
constexpr double kGlW[kGlN] = {0.1527533871307258, 0.1491729864726037, 0.1420961093183820,
                               0.1316886384491766, 0.1181945319615184, 0.1019301198172404,
                               0.0832767415767048, 0.0626720483341091, 0.0406014298003869,
                               0.0176140071391521};

}  // namespace

double quadrature_1x1(QuadKind kind, double s) {
  if (kind == QuadKind::mutual_info) {
    if (s < 0.0) throw std::invalid_argument("quadrature_1x1: s must be non-negative");
    if (s == 0.0) return 0.0;
  } else {
    if (s < 0.0) throw std::invalid_argument("quadrature_1x1: s must be non-negative");
    if (s == 0.0) return 1.0;
  }
  const double cut = 60.0;  // exp(-60) ~ 9e-27 leaves the tail below 1e-12
  const double fa = integrand(kind, s, 0.0);
  const double fb = integrand(kind, s, cut);
  const double fm = integrand(kind, s, 0.5 * cut);
  const double whole = simpson(0.0, cut, fa, fm, fb);
  return adaptive(kind, s, 0.0, cut, fa, fm, fb, whole, 1e-10, 60);
}

double quadrature_1x1_gl(QuadKind kind, double s) {
  if (s == 0.0) return kind == QuadKind::mutual_info ? 0.0 : 1.0;
  const double cut = 60.0;
  const int segments = 48;
  const double h = cut / segments;
  double total = 0.0;
  for (int seg = 0; seg < segments; ++seg) {
    const double mid = (seg + 0.5) * h;
    double acc = 0.0;
    for (int i = 0; i < kGlN; ++i) {
      acc += kGlW[i] * (integrand(kind, s, mid + 0.5 * h * kGlX[i]) +
                        integrand(kind, s, mid - 0.5 * h * kGlX[i]));
    }
    total += 0.5 * h * acc;
  }
  return total;
}

Eigen::VectorXd finite_diff_gradient(const UtilitySpec& spec, const Eigen::VectorXd& s, double h) {
  const double scale = std::max(1.0, s.size() ? s.maxCoeff() : 1.0);
  if (!(h >= 1e-6 * scale) || !(h <= 1e-3 * scale))
    throw std::invalid_argument("finite_diff_gradient: h outside [1e-6, 1e-3] * max(s, 1)");
  Eigen::VectorXd g(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    Eigen::VectorXd hi = s, lo = s;
    hi(i) += h;
    if (s(i) >= h) {
      lo(i) -= h;
      g(i) = (evaluate(spec, hi).value - evaluate(spec, lo).value) / (2.0 * h);
    } else {
      g(i) = (evaluate(spec, hi).value - evaluate(spec, s).value) / h;
    }
    if (!std::isfinite(g(i)))
      throw std::domain_error("finite_diff_gradient: utility not differentiable here");
  }
  return g;
}

}  // namespace trainprecode
