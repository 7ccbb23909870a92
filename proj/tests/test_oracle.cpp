// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "trainprecode/oracle.hpp"

using namespace trainprecode;

TEST_CASE("quadrature limits and frozen exponential-integral values") {
  CHECK(quadrature_1x1(QuadKind::mutual_info, 0.0) == 0.0);
  CHECK(quadrature_1x1(QuadKind::mmse_inner, 0.0) == 1.0);
  CHECK_THROWS_AS(quadrature_1x1(QuadKind::mutual_info, -0.5), std::invalid_argument);

  // e^{1/s} E1(1/s) references
  CHECK(quadrature_1x1(QuadKind::mutual_info, 0.5) ==
        doctest::Approx(0.361328616888223).epsilon(1e-9));
  CHECK(quadrature_1x1(QuadKind::mutual_info, 1.0) ==
        doctest::Approx(0.596347362323195).epsilon(1e-9));
  CHECK(quadrature_1x1(QuadKind::mutual_info, 2.0) ==
        doctest::Approx(0.922910632483731).epsilon(1e-9));
  CHECK(quadrature_1x1(QuadKind::mutual_info, 10.0) ==
        doctest::Approx(2.014642544708452).epsilon(1e-9));
  CHECK(quadrature_1x1(QuadKind::mmse_inner, 1.0) ==
        doctest::Approx(0.596347362323195).epsilon(1e-9));
  CHECK(quadrature_1x1(QuadKind::mmse_inner, 2.0) ==
        doctest::Approx(0.461455316241865).epsilon(1e-9));
}

TEST_CASE("two quadrature schemes agree to 1e-9 and are monotone") {
  double prev = 0.0;
  for (double s = 0.05; s < 40.0; s *= 1.7) {
    const double a = quadrature_1x1(QuadKind::mutual_info, s);
    const double b = quadrature_1x1_gl(QuadKind::mutual_info, s);
    CHECK(std::abs(a - b) <= 1e-9);
    CHECK(a > prev);  // monotone sweep
    prev = a;
    CHECK(std::abs(quadrature_1x1(QuadKind::mmse_inner, s) -
                   quadrature_1x1_gl(QuadKind::mmse_inner, s)) <= 1e-9);
  }
}

TEST_CASE("finite differences: trace kind and validation") {
  UtilitySpec spec;
  spec.kind = UtilityKind::trace;
  spec.n_rx = 2;
  Eigen::VectorXd s(3);
  s << 2.0, 1.0, 0.5;
  const Eigen::VectorXd g = finite_diff_gradient(spec, s, 1e-4 * 2.0);
  CHECK((g - Eigen::VectorXd::Ones(3)).lpNorm<Eigen::Infinity>() <= 1e-9);
  CHECK_THROWS_AS(finite_diff_gradient(spec, s, 1.0), std::invalid_argument);
}

TEST_CASE("finite differences flag non-differentiable det-family points") {
  UtilitySpec spec;
  spec.kind = UtilityKind::det;
  spec.n_rx = 1;
  const Eigen::VectorXd s = Eigen::VectorXd::Zero(2);
  CHECK_THROWS(finite_diff_gradient(spec, s, 1e-4));
}

TEST_CASE("grid oracle refuses more than two transmit antennas") {
  GridSpec grid;
  grid.cfg.n_tx = 3;
  grid.cfg.n_rx = 2;
  grid.cfg.coherence_time = 10;
  grid.cfg.training_duration = 2;
  grid.cfg.power = 1.0;
  grid.cfg.channel_eigs = Eigen::Vector3d(0.5, 0.3, 0.2);
  UtilitySpec spec;
  spec.kind = UtilityKind::trace;
  CHECK_THROWS_AS(grid_search_joint(grid, spec), std::invalid_argument);
}

TEST_CASE("grid oracle: one antenna, trace utility") {
  // trace(s) = rhat*q/(1+rtilde*q); the best split is interior and unique.
  GridSpec grid;
  grid.resolution = 2001;
  grid.cfg.n_tx = 1;
  grid.cfg.n_rx = 1;
  grid.cfg.coherence_time = 10;
  grid.cfg.training_duration = 1;
  grid.cfg.power = 1.0;
  grid.cfg.channel_eigs = Eigen::VectorXd::Ones(1);
  UtilitySpec spec;
  spec.kind = UtilityKind::trace;
  spec.n_rx = 1;
  const GridOptimum best = grid_search_joint(grid, spec);
  // independent dense scan at 10x resolution
  double best_ref = -1.0;
  for (int i = 0; i <= 20000; ++i) {
    const double p = 10.0 * i / 20000.0;
    const double q = (10.0 - p) / 9.0;
    const double rhat = p / (1.0 + p), rtilde = 1.0 / (1.0 + p);
    const double s = rhat * q / (1.0 + rtilde * q);
    best_ref = std::max(best_ref, s);
  }
  CHECK(best.utility == doctest::Approx(best_ref).epsilon(1e-5));
}

TEST_CASE("grid oracle symmetry: symmetric channel puts the optimum on the diagonal") {
  GridSpec grid;
  grid.resolution = 41;
  grid.cfg.n_tx = 2;
  grid.cfg.n_rx = 2;
  grid.cfg.coherence_time = 10;
  grid.cfg.training_duration = 2;
  grid.cfg.power = 1.0;
  grid.cfg.channel_eigs = Eigen::Vector2d(0.5, 0.5);
  UtilitySpec spec;
  spec.kind = UtilityKind::trace;
  spec.n_rx = 2;
  const GridOptimum best = grid_search_joint(grid, spec);
  const double cell = 10.0 / 40.0;
  CHECK(std::abs(best.p(0) - best.p(1)) <= cell + 1e-12);
  CHECK(std::abs(best.q(0) - best.q(1)) <= cell / 8.0 + 1e-12);
}

TEST_CASE("grid refinement is stable (Lipschitz sanity)") {
  for (int inst = 0; inst < 10; ++inst) {
    GridSpec grid;
    grid.resolution = 30;
    grid.cfg.n_tx = 2;
    grid.cfg.n_rx = 2;
    grid.cfg.coherence_time = 6 + inst % 5;
    grid.cfg.training_duration = 1 + inst % 2;
    grid.cfg.power = 0.5 + 0.5 * (inst % 4);
    const double r1 = tptest::uniform(0.4, 0.8);
    grid.cfg.channel_eigs = Eigen::Vector2d(r1, 1.0 - r1);
    UtilitySpec spec;
    spec.kind = UtilityKind::logdet_shifted;
    spec.shift = 4.0;
    spec.n_rx = 2;
    const double coarse = grid_search_joint(grid, spec).utility;
    grid.resolution = 60;
    const double fine = grid_search_joint(grid, spec).utility;
    CHECK(fine >= coarse - 1e-12);       // refinement can only improve a max
    CHECK(fine - coarse <= 0.15);        // and only by a cell-sized amount
  }
}
