// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trainprecode/channel.hpp"
#include "trainprecode/utility.hpp"

namespace trainprecode {

enum class GridMode { boost, fixed_budgets };

struct GridSpec {
  int resolution = 200;  // points per free axis
  GridMode mode = GridMode::boost;
  SystemConfig cfg;
  double mu_p = 0.0;  // fixed_budgets only
  double mu_q = 0.0;

  void validate() const;
};

struct GridOptimum {
  Eigen::VectorXd p, q;
  double utility = 0.0;
};

/// Exhaustive utility maximization over full-power allocations on a uniform
/// grid. Restricted to n_tx <= 2 (at most 3 free axes after the full-power
/// reduction). Ties resolve to the lowest linear scan index.
GridOptimum grid_search_joint(const GridSpec& grid, const UtilitySpec& spec);

enum class QuadKind { mutual_info, mmse_inner };

/// Reference value for the scalar channel: E log(1 + s|w|^2) resp.
/// E 1/(1 + s|w|^2) with |w|^2 standard exponential, by adaptive quadrature
/// (absolute tolerance 1e-10).
double quadrature_1x1(QuadKind kind, double s);

/// Same integrals on a fixed composite Gauss-Legendre rule; the
/// self-consistency partner of quadrature_1x1.
double quadrature_1x1_gl(QuadKind kind, double s);

/// Central finite differences on the frozen-sample estimator (same seed on
/// both sides); falls back to a forward difference at the s_i = 0 boundary.
/// Throws where the utility itself is non-differentiable.
Eigen::VectorXd finite_diff_gradient(const UtilitySpec& spec, const Eigen::VectorXd& s, double h);

}  // namespace trainprecode
