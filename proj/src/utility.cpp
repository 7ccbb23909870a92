// SPDX-License-Identifier: Apache-2.0
#include "trainprecode/utility.hpp"

#include <cmath>
#include <limits>
#include <list>
#include <mutex>
#include <stdexcept>
#include <string>

#include "trainprecode/parallel.hpp"
#include "trainprecode/rng.hpp"

namespace trainprecode {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kTile = 8192;

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) { return x > 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

Eigen::VectorXd sanitized(const Eigen::VectorXd& s) {
  Eigen::VectorXd out = s;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (out(i) < -1e-12) throw std::invalid_argument("utility: profile entries must be non-negative");
    if (out(i) < 0.0) out(i) = 0.0;
  }
  return out;
}

}  // namespace

bool is_monte_carlo(UtilityKind kind) {
  switch (kind) {
    case UtilityKind::mutual_info:
    case UtilityKind::mmse_bound:
    case UtilityKind::expected_det:
      return true;
    case UtilityKind::minkowski_lower:
      return true;  // deterministic only in the wide branch constant
    default:
      return false;
  }
}

bool is_concave(UtilityKind kind) {
  switch (kind) {
    case UtilityKind::mutual_info:
    case UtilityKind::mmse_bound:
    case UtilityKind::trace:
    case UtilityKind::logdet_shifted:
    case UtilityKind::harmonic:
    case UtilityKind::jensen_upper_1:
    case UtilityKind::jensen_upper_2:
      return true;
    case UtilityKind::det:
    case UtilityKind::expected_det:
    case UtilityKind::minkowski_lower:
      return false;  // log-/quasi-concave only
  }
  return false;
}

const char* kind_name(UtilityKind kind) {
  switch (kind) {
    case UtilityKind::mutual_info: return "mutual_info";
    case UtilityKind::mmse_bound: return "mmse_bound";
    case UtilityKind::trace: return "trace";
    case UtilityKind::det: return "det";
    case UtilityKind::logdet_shifted: return "logdet_shifted";
    case UtilityKind::harmonic: return "harmonic";
    case UtilityKind::expected_det: return "expected_det";
    case UtilityKind::jensen_upper_1: return "jensen_upper_1";
    case UtilityKind::jensen_upper_2: return "jensen_upper_2";
    case UtilityKind::minkowski_lower: return "minkowski_lower";
  }
  return "?";
}

UtilityKind kind_from_name(const std::string& name) {
  for (int k = 0; k <= static_cast<int>(UtilityKind::minkowski_lower); ++k) {
    const auto kind = static_cast<UtilityKind>(k);
    if (name == kind_name(kind)) return kind;
  }
  throw std::invalid_argument("unknown utility kind: " + name);
}

void UtilitySpec::validate(int profile_len) const {
  if (n_rx < 1) throw std::invalid_argument("UtilitySpec: n_rx must be >= 1");
  if (mc_samples < 1) throw std::invalid_argument("UtilitySpec: mc_samples must be >= 1");
  if (kind == UtilityKind::mmse_bound && (streams < 1 || streams > profile_len))
    throw std::invalid_argument("UtilitySpec: streams must lie in [1, profile length]");
  if (kind == UtilityKind::logdet_shifted && shift < 0.0)
    throw std::invalid_argument("UtilitySpec: shift must be non-negative");
}

// --- frozen sample registry --------------------------------------------------

namespace {

struct CacheKey {
  std::uint64_t seed;
  int n_rx, dim, count;
  bool operator==(const CacheKey& o) const {
    return seed == o.seed && n_rx == o.n_rx && dim == o.dim && count == o.count;
  }
};

std::shared_ptr<const FrozenSamples> build_samples(const CacheKey& key) {
  auto fs = std::make_shared<FrozenSamples>();
  fs->master_seed = key.seed;
  auto& st = fs->stats;
  st.n_rx = key.n_rx;
  st.dim = key.dim;
  st.count = static_cast<std::size_t>(key.count);
  st.w.resize(st.count * key.n_rx * key.dim);
  parallel_tiles(st.count, kTile, [&](std::size_t, std::size_t i0, std::size_t i1) {
    for (std::size_t n = i0; n < i1; ++n) {
      const std::uint64_t stream = rng::derive_seed(key.seed, n);
      for (int k = 0; k < key.n_rx; ++k)
        for (int j = 0; j < key.dim; ++j)
          st.w[(n * key.n_rx + k) * key.dim + j] = rng::complex_normal(stream, k, j);
    }
  });
  kernels::finalize_stats(st);

  if (key.dim < key.n_rx) {
    // E log det(W^H W); the profile-independent part of the wide bound branch.
    double sum = 0.0;
    Eigen::MatrixXcd w(key.n_rx, key.dim);
    for (std::size_t n = 0; n < st.count; ++n) {
      for (int k = 0; k < key.n_rx; ++k)
        for (int j = 0; j < key.dim; ++j) w(k, j) = st.at(n, k, j);
      const Eigen::MatrixXcd g = w.adjoint() * w;
      Eigen::LLT<Eigen::MatrixXcd> llt(g);
      for (int j = 0; j < key.dim; ++j) sum += 2.0 * std::log(llt.matrixL()(j, j).real());
    }
    fs->mean_logdet_gram = sum / static_cast<double>(st.count);
  }
  return fs;
}

}  // namespace

std::shared_ptr<const FrozenSamples> frozen_samples(std::uint64_t seed, int n_rx, int dim,
                                                    int count) {
  if (n_rx < 1 || dim < 1 || count < 1)
    throw std::invalid_argument("frozen_samples: dimensions must be positive");
  static std::mutex mu;
  static std::list<std::pair<CacheKey, std::shared_ptr<const FrozenSamples>>> cache;
  const CacheKey key{seed, n_rx, dim, count};
  {
    std::lock_guard<std::mutex> lock(mu);
    for (auto it = cache.begin(); it != cache.end(); ++it) {
      if (it->first == key) {
        cache.splice(cache.begin(), cache, it);
        return cache.front().second;
      }
    }
  }
  auto fs = build_samples(key);
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace_front(key, fs);
  while (cache.size() > 8) cache.pop_back();
  return fs;
}

// --- evaluation ---------------------------------------------------------------

namespace {

kernels::PartialSums mc_sums(kernels::Op op, const FrozenSamples& fs, const double* s,
                             double ridge, bool want_sumsq) {
  const std::size_t n = fs.stats.count;
  const std::size_t n_tiles = (n + kTile - 1) / kTile;
  std::vector<kernels::PartialSums> parts(n_tiles);
  const kernels::Arch arch = kernels::active_arch(fs.stats.n_rx);
  parallel_tiles(n, kTile, [&](std::size_t t, std::size_t i0, std::size_t i1) {
    kernels::value_range(op, fs.stats, s, ridge, i0, i1, want_sumsq, parts[t], arch);
  });
  kernels::PartialSums total;
  for (const auto& p : parts) {
    total.sum += p.sum;
    total.sumsq += p.sumsq;
  }
  return total;
}

Eigen::VectorXd mc_grad(kernels::Op op, const FrozenSamples& fs, const double* s, double ridge) {
  const std::size_t n = fs.stats.count;
  const int d = fs.stats.dim;
  const std::size_t n_tiles = (n + kTile - 1) / kTile;
  std::vector<std::vector<double>> parts(n_tiles, std::vector<double>(d, 0.0));
  const kernels::Arch arch = kernels::active_arch(fs.stats.n_rx);
  parallel_tiles(n, kTile, [&](std::size_t t, std::size_t i0, std::size_t i1) {
    kernels::grad_range(op, fs.stats, s, ridge, i0, i1, parts[t].data(), arch);
  });
  Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
  for (const auto& p : parts)
    for (int j = 0; j < d; ++j) g(j) += p[j];
  return g / static_cast<double>(n);
}

UtilityValue from_sums(const kernels::PartialSums& sums, std::size_t n) {
  UtilityValue out;
  const double nn = static_cast<double>(n);
  out.value = sums.sum / nn;
  const double var = std::max(0.0, sums.sumsq / nn - out.value * out.value);
  out.std_error = std::sqrt(var / nn);
  return out;
}

int positive_count(const Eigen::VectorXd& s) {
  int c = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > 0.0) ++c;
  return c;
}

}  // namespace

UtilityValue evaluate(const UtilitySpec& spec, const Eigen::VectorXd& s_in) {
  const Eigen::VectorXd s = sanitized(s_in);
  const int n_t = static_cast<int>(s.size());
  spec.validate(n_t);
  UtilityValue out;

  switch (spec.kind) {
    case UtilityKind::trace:
      out.value = s.sum();
      return out;
    case UtilityKind::det:
      if (positive_count(s) < n_t) {
        out.value = -kInf;
        out.sentinel = true;
        return out;
      }
      out.value = s.prod();
      return out;
    case UtilityKind::logdet_shifted:
      out.value = (spec.shift * s.array()).log1p().sum();
      return out;
    case UtilityKind::harmonic:
      if (positive_count(s) < n_t) {
        out.value = 0.0;  // continuous limit at singular profiles
        return out;
      }
      out.value = 1.0 / s.cwiseInverse().sum();
      return out;
    case UtilityKind::jensen_upper_1:
      out.value = spec.n_rx * std::log1p(static_cast<double>(n_t) * s.sum());
      return out;
    case UtilityKind::jensen_upper_2:
      out.value = (static_cast<double>(n_t) * spec.n_rx * s.array()).log1p().sum();
      return out;
    default:
      break;
  }

  const auto fs = frozen_samples(spec.master_seed, spec.n_rx, n_t, spec.mc_samples);
  switch (spec.kind) {
    case UtilityKind::mutual_info:
      return from_sums(mc_sums(kernels::Op::logdet, *fs, s.data(), 1.0, true), fs->stats.count);
    case UtilityKind::mmse_bound: {
      out = from_sums(mc_sums(kernels::Op::traceinv, *fs, s.data(), 1.0, true), fs->stats.count);
      out.value = -(static_cast<double>(spec.streams) - spec.n_rx + out.value);
      return out;
    }
    case UtilityKind::expected_det:
      return from_sums(mc_sums(kernels::Op::det, *fs, s.data(), 1.0, true), fs->stats.count);
    case UtilityKind::minkowski_lower: {
      UtilityValue ibar;
      if (n_t >= spec.n_rx) {
        if (positive_count(s) < spec.n_rx) {
          out.value = -kInf;
          out.sentinel = true;
          return out;
        }
        ibar = from_sums(mc_sums(kernels::Op::logdet, *fs, s.data(), 0.0, true), fs->stats.count);
      } else {
        if (positive_count(s) < n_t) {
          out.value = -kInf;
          out.sentinel = true;
          return out;
        }
        ibar.value = s.array().log().sum() + fs->mean_logdet_gram;
        ibar.std_error = 0.0;
      }
      const double x = ibar.value / spec.n_rx;
      out.value = spec.n_rx * softplus(x);
      out.std_error = sigmoid(x) * ibar.std_error;
      return out;
    }
    default:
      throw std::logic_error("evaluate: unhandled kind");
  }
}

double evaluate_mean(const UtilitySpec& spec, const Eigen::VectorXd& s_in) {
  const Eigen::VectorXd s = sanitized(s_in);
  const int n_t = static_cast<int>(s.size());
  switch (spec.kind) {
    case UtilityKind::mutual_info: {
      const auto fs = frozen_samples(spec.master_seed, spec.n_rx, n_t, spec.mc_samples);
      const auto sums = mc_sums(kernels::Op::logdet, *fs, s.data(), 1.0, false);
      return sums.sum / static_cast<double>(fs->stats.count);
    }
    case UtilityKind::mmse_bound: {
      const auto fs = frozen_samples(spec.master_seed, spec.n_rx, n_t, spec.mc_samples);
      const auto sums = mc_sums(kernels::Op::traceinv, *fs, s.data(), 1.0, false);
      return -(static_cast<double>(spec.streams) - spec.n_rx +
               sums.sum / static_cast<double>(fs->stats.count));
    }
    case UtilityKind::expected_det: {
      const auto fs = frozen_samples(spec.master_seed, spec.n_rx, n_t, spec.mc_samples);
      const auto sums = mc_sums(kernels::Op::det, *fs, s.data(), 1.0, false);
      return sums.sum / static_cast<double>(fs->stats.count);
    }
    default:
      return evaluate(spec, s).value;
  }
}

Eigen::VectorXd gradient(const UtilitySpec& spec, const Eigen::VectorXd& s_in) {
  const Eigen::VectorXd s = sanitized(s_in);
  const int n_t = static_cast<int>(s.size());
  spec.validate(n_t);

  switch (spec.kind) {
    case UtilityKind::trace:
      return Eigen::VectorXd::Ones(n_t);
    case UtilityKind::det: {
      if (positive_count(s) < n_t)
        throw std::domain_error("gradient: det is treated as non-differentiable at singular profiles");
      const double d = s.prod();
      return d * s.cwiseInverse();
    }
    case UtilityKind::logdet_shifted:
      return (spec.shift / (1.0 + spec.shift * s.array())).matrix();
    case UtilityKind::harmonic: {
      if (positive_count(s) < n_t)
        throw std::domain_error("gradient: harmonic is non-differentiable at singular profiles");
      const double h = 1.0 / s.cwiseInverse().sum();
      return (h * h * s.array().square().inverse()).matrix();
    }
    case UtilityKind::jensen_upper_1: {
      const double g = spec.n_rx * n_t / (1.0 + n_t * s.sum());
      return Eigen::VectorXd::Constant(n_t, g);
    }
    case UtilityKind::jensen_upper_2: {
      const double c = static_cast<double>(n_t) * spec.n_rx;
      return (c / (1.0 + c * s.array())).matrix();
    }
    default:
      break;
  }

  const auto fs = frozen_samples(spec.master_seed, spec.n_rx, n_t, spec.mc_samples);
  switch (spec.kind) {
    case UtilityKind::mutual_info:
      return mc_grad(kernels::Op::logdet, *fs, s.data(), 1.0);
    case UtilityKind::mmse_bound:
      return mc_grad(kernels::Op::traceinv, *fs, s.data(), 1.0);
    case UtilityKind::expected_det:
      return mc_grad(kernels::Op::det, *fs, s.data(), 1.0);
    case UtilityKind::minkowski_lower: {
      if (n_t >= spec.n_rx) {
        if (positive_count(s) < spec.n_rx)
          throw std::domain_error("gradient: minkowski bound is -inf at this profile");
        const auto sums = mc_sums(kernels::Op::logdet, *fs, s.data(), 0.0, false);
        const double ibar = sums.sum / static_cast<double>(fs->stats.count);
        return sigmoid(ibar / spec.n_rx) * mc_grad(kernels::Op::logdet, *fs, s.data(), 0.0);
      }
      if (positive_count(s) < n_t)
        throw std::domain_error("gradient: minkowski bound is -inf at this profile");
      const double ibar = s.array().log().sum() + fs->mean_logdet_gram;
      return sigmoid(ibar / spec.n_rx) * s.cwiseInverse();
    }
    default:
      throw std::logic_error("gradient: unhandled kind");
  }
}

}  // namespace trainprecode
