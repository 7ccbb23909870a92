// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "trainprecode/oracle.hpp"
#include "trainprecode/rng.hpp"
#include "trainprecode/utility.hpp"

using namespace trainprecode;

namespace {

UtilitySpec mc_spec(UtilityKind kind, int n_rx, int samples, std::uint64_t seed) {
  UtilitySpec spec;
  spec.kind = kind;
  spec.n_rx = n_rx;
  spec.mc_samples = samples;
  spec.master_seed = seed;
  spec.streams = n_rx;
  return spec;
}

}  // namespace

TEST_CASE("trivial and hand values") {
  SUBCASE("mutual_info at the zero profile is exactly zero") {
    const UtilitySpec spec = mc_spec(UtilityKind::mutual_info, 2, 500, 5);
    const UtilityValue v = evaluate(spec, Eigen::VectorXd::Zero(2));
    CHECK(v.value == 0.0);
    CHECK(v.std_error == 0.0);
  }
  SUBCASE("mmse_bound at zero equals -streams") {
    UtilitySpec spec = mc_spec(UtilityKind::mmse_bound, 2, 500, 5);
    spec.streams = 2;
    CHECK(evaluate(spec, Eigen::VectorXd::Zero(2)).value == doctest::Approx(-2.0));
  }
  SUBCASE("trace") {
    UtilitySpec spec;
    spec.kind = UtilityKind::trace;
    Eigen::VectorXd s(2);
    s << 3.0, 1.0;
    CHECK(evaluate(spec, s).value == doctest::Approx(4.0));
    CHECK(evaluate(spec, s).std_error == 0.0);
  }
}

TEST_CASE("mutual_info matches the quadrature oracle at n_rx=1") {
  const UtilitySpec spec = mc_spec(UtilityKind::mutual_info, 1, 100000, 42);
  Eigen::VectorXd s(1);
  s << 1.0;
  const UtilityValue v = evaluate(spec, s);
  const double oracle = quadrature_1x1(QuadKind::mutual_info, 1.0);
  CHECK(oracle == doctest::Approx(0.596347).epsilon(1e-5));
  CHECK(std::abs(v.value - oracle) <= 3.0 * v.std_error);
  CHECK(v.std_error > 0.0);
}

TEST_CASE("mmse_bound matches the quadrature oracle at n_rx=1") {
  UtilitySpec spec = mc_spec(UtilityKind::mmse_bound, 1, 100000, 43);
  spec.streams = 1;
  Eigen::VectorXd s(1);
  s << 2.0;
  const UtilityValue v = evaluate(spec, s);
  const double inner = quadrature_1x1(QuadKind::mmse_inner, 2.0);
  CHECK(std::abs(v.value - (-(1.0 - 1.0 + inner))) <= 3.0 * v.std_error);
}

TEST_CASE("determinism: identical spec and profile give bit-identical values") {
  const UtilitySpec spec = mc_spec(UtilityKind::mutual_info, 2, 20000, 77);
  Eigen::VectorXd s(3);
  s << 2.0, 1.0, 0.25;
  const UtilityValue a = evaluate(spec, s);
  const UtilityValue b = evaluate(spec, s);
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
  CHECK(evaluate_mean(spec, s) == evaluate_mean(spec, s));
}

TEST_CASE("permutation invariance") {
  std::mt19937_64 gen(4);
  Eigen::VectorXd s(4);
  s << 2.0, 1.2, 0.7, 0.1;
  for (UtilityKind kind :
       {UtilityKind::trace, UtilityKind::det, UtilityKind::logdet_shifted, UtilityKind::harmonic,
        UtilityKind::jensen_upper_1, UtilityKind::jensen_upper_2}) {
    UtilitySpec spec;
    spec.kind = kind;
    spec.n_rx = 2;
    spec.shift = 2.0;
    const double base = evaluate(spec, s).value;
    for (int t = 0; t < 10; ++t) {
      Eigen::VectorXd perm = s;
      std::shuffle(perm.data(), perm.data() + perm.size(), gen);
      CHECK(evaluate(spec, perm).value == doctest::Approx(base).epsilon(1e-12));
    }
  }
  for (UtilityKind kind : {UtilityKind::mutual_info, UtilityKind::mmse_bound,
                           UtilityKind::expected_det, UtilityKind::minkowski_lower}) {
    UtilitySpec spec = mc_spec(kind, 2, 40000, 99);
    const UtilityValue base = evaluate(spec, s);
    for (int t = 0; t < 5; ++t) {
      Eigen::VectorXd perm = s;
      std::shuffle(perm.data(), perm.data() + perm.size(), gen);
      const UtilityValue other = evaluate(spec, perm);
      const double combined = std::hypot(base.std_error, other.std_error);
      CHECK(std::abs(other.value - base.value) <= 3.0 * std::max(combined, 1e-12));
    }
  }
}

TEST_CASE("componentwise monotonicity") {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (UtilityKind kind :
       {UtilityKind::mutual_info, UtilityKind::mmse_bound, UtilityKind::trace, UtilityKind::det,
        UtilityKind::logdet_shifted, UtilityKind::harmonic, UtilityKind::expected_det,
        UtilityKind::jensen_upper_1, UtilityKind::jensen_upper_2, UtilityKind::minkowski_lower}) {
    UtilitySpec spec = mc_spec(kind, 2, 20000, 1234);
    for (int t = 0; t < 20; ++t) {
      Eigen::VectorXd s(3);
      s << 0.05 + u(gen), 0.05 + u(gen), 0.05 + u(gen);
      Eigen::VectorXd s2 = s;
      for (int i = 0; i < 3; ++i) s2(i) += u(gen);
      const UtilityValue a = evaluate(spec, s);
      const UtilityValue b = evaluate(spec, s2);
      const double slack = 3.0 * std::hypot(a.std_error, b.std_error) + 1e-12;
      CHECK(b.value >= a.value - slack);
    }
  }
}

TEST_CASE("bound ordering: minkowski <= mutual_info <= jensen bounds") {
  Eigen::VectorXd s(2);
  s << 1.0, 0.5;
  const UtilitySpec mi = mc_spec(UtilityKind::mutual_info, 2, 100000, 7);
  const UtilitySpec mk = mc_spec(UtilityKind::minkowski_lower, 2, 100000, 7);
  UtilitySpec j1;
  j1.kind = UtilityKind::jensen_upper_1;
  j1.n_rx = 2;
  UtilitySpec j2 = j1;
  j2.kind = UtilityKind::jensen_upper_2;

  const UtilityValue vmi = evaluate(mi, s);
  const UtilityValue vmk = evaluate(mk, s);
  const double slack = 3.0 * std::hypot(vmi.std_error, vmk.std_error);
  CHECK(vmk.value <= vmi.value + slack);
  CHECK(vmi.value <= evaluate(j1, s).value + 3.0 * vmi.std_error);
  CHECK(vmi.value <= evaluate(j2, s).value + 3.0 * vmi.std_error);
}

TEST_CASE("sentinel values instead of crashes at singular profiles") {
  Eigen::VectorXd s(2);
  s << 1.0, 0.0;
  UtilitySpec det_spec;
  det_spec.kind = UtilityKind::det;
  const UtilityValue dv = evaluate(det_spec, s);
  CHECK(dv.sentinel);
  CHECK(std::isinf(dv.value));
  CHECK(dv.value < 0.0);

  const UtilitySpec mk = mc_spec(UtilityKind::minkowski_lower, 2, 200, 3);
  const UtilityValue mv = evaluate(mk, s);  // one positive entry < n_rx = 2
  CHECK(mv.sentinel);

  UtilitySpec harm;
  harm.kind = UtilityKind::harmonic;
  CHECK(evaluate(harm, s).value == 0.0);  // continuous limit
}

TEST_CASE("gradients: deterministic kinds") {
  Eigen::VectorXd s(3);
  s << 2.0, 1.0, 0.5;
  UtilitySpec spec;
  spec.n_rx = 2;

  spec.kind = UtilityKind::trace;
  CHECK((gradient(spec, s) - Eigen::VectorXd::Ones(3)).norm() <= 1e-14);

  spec.kind = UtilityKind::det;
  const Eigen::VectorXd gd = gradient(spec, s);
  CHECK(gd(0) == doctest::Approx(0.5));
  CHECK(gd(1) == doctest::Approx(1.0));
  CHECK(gd(2) == doctest::Approx(2.0));
  CHECK_THROWS_AS(gradient(spec, Eigen::VectorXd::Zero(3)), std::domain_error);

  spec.kind = UtilityKind::harmonic;
  CHECK_THROWS_AS(gradient(spec, Eigen::VectorXd::Zero(3)), std::domain_error);
}

TEST_CASE("gradient at zero profile reduces to sample second moments") {
  const UtilitySpec spec = mc_spec(UtilityKind::mutual_info, 1, 50000, 2024);
  const Eigen::VectorXd g = gradient(spec, Eigen::VectorXd::Zero(2));
  // each component averages |w_i|^2 with unit mean
  const double se = 1.0 / std::sqrt(50000.0);
  CHECK(std::abs(g(0) - 1.0) <= 4.0 * se);
  CHECK(std::abs(g(1) - 1.0) <= 4.0 * se);
}

TEST_CASE("analytic gradients match central finite differences (rel err <= 1e-4)") {
  Eigen::VectorXd s(3);
  s << 1.4, 0.8, 0.3;
  for (UtilityKind kind :
       {UtilityKind::mutual_info, UtilityKind::mmse_bound, UtilityKind::trace, UtilityKind::det,
        UtilityKind::logdet_shifted, UtilityKind::harmonic, UtilityKind::expected_det,
        UtilityKind::jensen_upper_1, UtilityKind::jensen_upper_2, UtilityKind::minkowski_lower}) {
    UtilitySpec spec = mc_spec(kind, 2, 20000, 31337);
    spec.shift = 1.5;
    const Eigen::VectorXd ana = gradient(spec, s);
    const Eigen::VectorXd num = finite_diff_gradient(spec, s, 1e-5 * 1.4);
    const double scale = std::max(1.0, ana.cwiseAbs().maxCoeff());
    CHECK((ana - num).cwiseAbs().maxCoeff() <= 1e-4 * scale);
  }
}

TEST_CASE("frozen samples match the public sampler stream") {
  const auto fs = frozen_samples(555, 2, 3, 4);
  for (std::size_t n = 0; n < 4; ++n) {
    const Eigen::MatrixXcd w =
        sample_whitened(2, 3, trainprecode::rng::derive_seed(555, n));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 3; ++j) CHECK(std::abs(fs->stats.at(n, i, j) - w(i, j)) == 0.0);
  }
}

TEST_CASE("spec validation") {
  UtilitySpec spec;
  spec.kind = UtilityKind::mmse_bound;
  spec.streams = 5;
  CHECK_THROWS_AS(spec.validate(2), std::invalid_argument);
  spec.streams = 2;
  CHECK_NOTHROW(spec.validate(2));
  CHECK_THROWS_AS(evaluate(spec, (-Eigen::VectorXd::Ones(2)).eval()), std::invalid_argument);
}
