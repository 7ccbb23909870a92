// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>

#include "trainprecode/kernels.hpp"

namespace trainprecode {

enum class UtilityKind {
  mutual_info,     // E log det(I + W diag(s) W^H), nats
  mmse_bound,      // -(r - n_rx + E trace((I + W diag(s) W^H)^{-1})), larger is better
  trace,           // sum s_i
  det,             // prod s_i
  logdet_shifted,  // sum log(1 + shift * s_i)
  harmonic,        // (sum 1/s_i)^{-1}
  expected_det,    // E det(I + W diag(s) W^H)
  jensen_upper_1,  // n_rx * log(1 + n_t * sum s_i)
  jensen_upper_2,  // sum log(1 + n_t * n_rx * s_i)
  minkowski_lower  // n_rx * log(1 + exp(Ibar/n_rx)), Ibar = E log det of the identity-free form
};

bool is_monte_carlo(UtilityKind kind);
/// Concave in s (projected gradient alone suffices); the remaining kinds are
/// only log-/quasi-concave and get a multi-start fallback in the optimizers.
bool is_concave(UtilityKind kind);
const char* kind_name(UtilityKind kind);
UtilityKind kind_from_name(const std::string& name);

struct UtilitySpec {
  UtilityKind kind = UtilityKind::mutual_info;
  int streams = 1;  // r, used by mmse_bound
  int n_rx = 1;
  int mc_samples = 10000;
  std::uint64_t master_seed = 0;
  double shift = 1.0;  // nu in logdet_shifted

  void validate(int profile_len) const;
  UtilitySpec with_seed(std::uint64_t seed) const {
    UtilitySpec s = *this;
    s.master_seed = seed;
    return s;
  }
};

struct UtilityValue {
  double value = 0.0;
  double std_error = 0.0;  // 0 for deterministic kinds
  bool sentinel = false;   // set when a log of zero forced the -inf value
};

/// Frozen whitened sample set: sample n equals
/// sample_whitened(n_rx, dim, derive_seed(master_seed, n)).
struct FrozenSamples {
  std::uint64_t master_seed = 0;
  kernels::SampleStats stats;
  double mean_logdet_gram = 0.0;  // E log det(W^H W); only filled when dim < n_rx
};

/// Shared, cached sample sets keyed by (seed, n_rx, dim, count).
std::shared_ptr<const FrozenSamples> frozen_samples(std::uint64_t seed, int n_rx, int dim,
                                                    int count);

/// Utility value with Monte Carlo standard error. The profile is consumed in
/// the given coordinate order; for Monte Carlo kinds coordinate i is bound to
/// sample column i, so values at permuted inputs agree only within noise.
UtilityValue evaluate(const UtilitySpec& spec, const Eigen::VectorXd& s);

/// Mean-only evaluation (no standard error); the fast path used by grid
/// oracles. Agrees with evaluate().value up to accumulation rounding.
double evaluate_mean(const UtilitySpec& spec, const Eigen::VectorXd& s);

/// Exact gradient, consistent with evaluate() through the same frozen sample
/// set. Throws std::domain_error at non-differentiable points of the
/// det family (singular profiles).
Eigen::VectorXd gradient(const UtilitySpec& spec, const Eigen::VectorXd& s);

}  // namespace trainprecode
