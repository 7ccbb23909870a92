// SPDX-License-Identifier: Apache-2.0
#include "trainprecode/pga.hpp"

#include <numeric>
#include <vector>

namespace trainprecode {

Eigen::VectorXd project_simplex_boundary(const Eigen::VectorXd& x, double cap) {
  const Eigen::Index n = x.size();
  std::vector<double> u(x.data(), x.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  int rho = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cum += u[k];
    const double t = (cum - cap) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) {
      rho = static_cast<int>(k + 1);
      tau = t;
    }
  }
  (void)rho;
  return (x.array() - tau).max(0.0).matrix();
}

Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& x, double cap) {
  Eigen::VectorXd y = x.cwiseMax(0.0);
  if (y.sum() <= cap) return y;
  return project_simplex_boundary(x, cap);
}

PgaResult pga_maximize(const Eigen::VectorXd& x0,
                       const std::function<double(const Eigen::VectorXd&)>& value,
                       const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
                       const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& project,
                       const PgaOptions& opt) {
  PgaResult res;
  res.x = x0;
  res.value = value(res.x);
  double step = opt.step0;

  for (res.iters = 0; res.iters < opt.max_iters; ++res.iters) {
    const Eigen::VectorXd g = grad(res.x);
    Eigen::VectorXd cand;
    double cand_value = res.value;
    bool accepted = false;
    for (int h = 0; h < 64; ++h) {
      cand = project(res.x + step * g);
      const double directional = g.dot(cand - res.x);
      cand_value = value(cand);
      if (std::isfinite(cand_value) && cand_value >= res.value + opt.armijo * directional &&
          cand_value >= res.value) {
        accepted = true;
        break;
      }
      step *= 0.5;
      if (step < 1e-18) break;
    }
    if (!accepted) {
      res.converged = true;  // gradient mapping exhausted at this scale
      break;
    }
    const double improve = cand_value - res.value;
    res.x = cand;
    res.value = cand_value;
    step = std::min(step * 2.0, 1e12);
    if (improve <= opt.rel_tol * std::max(1.0, std::abs(res.value))) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace trainprecode
