// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>

namespace trainprecode {

/// Euclidean projection onto {x >= 0, sum x <= cap}.
Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& x, double cap);

/// Euclidean projection onto {x >= 0, sum x = cap}.
Eigen::VectorXd project_simplex_boundary(const Eigen::VectorXd& x, double cap);

struct PgaOptions {
  double armijo = 1e-4;
  double rel_tol = 1e-9;
  int max_iters = 5000;
  double step0 = 1.0;
};

struct PgaResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iters = 0;
  bool converged = false;
};

/// Projected gradient ascent with halving line search. `x0` must already be
/// feasible; `project` maps any point back onto the feasible set.
PgaResult pga_maximize(const Eigen::VectorXd& x0,
                       const std::function<double(const Eigen::VectorXd&)>& value,
                       const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
                       const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& project,
                       const PgaOptions& opt = {});

}  // namespace trainprecode
