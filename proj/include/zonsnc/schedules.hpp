#pragma once

#include <cstdint>
#include <iostream>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "types.hpp"

namespace zonsnc {

enum class StepKind { Constant, Diminishing, SqrtDecay, LinearDecay };

/// Stepsize sequence gamma_k.
///   Constant      gamma0
///   Diminishing   gamma0 / sqrt(k+1)
///   SqrtDecay     gamma0 / (1 + sqrt(k+1) / scale)
///   LinearDecay   gamma0 / (1 + (k+1) / scale)
struct StepSchedule {
  StepKind kind = StepKind::Constant;
  double gamma0 = 0.01;
  double scale = 100.0;

  static StepSchedule constant(double gamma) { return {StepKind::Constant, gamma, 1.0}; }
  static StepSchedule diminishing(double gamma0) { return {StepKind::Diminishing, gamma0, 1.0}; }
  static StepSchedule sqrt_decay(double gamma0, double scale) { return {StepKind::SqrtDecay, gamma0, scale}; }
  static StepSchedule linear_decay(double gamma0, double scale) { return {StepKind::LinearDecay, gamma0, scale}; }

  double value(std::uint64_t k) const {
    const double k1 = static_cast<double>(k) + 1.0;
    switch (kind) {
      case StepKind::Constant: return gamma0;
      case StepKind::Diminishing: return gamma0 / std::sqrt(k1);
      case StepKind::SqrtDecay: return gamma0 / (1.0 + std::sqrt(k1) / scale);
      case StepKind::LinearDecay: return gamma0 / (1.0 + k1 / scale);
    }
    return gamma0;
  }

  void validate() const {
    if (!(gamma0 > 0)) throw ConfigError("step schedule: gamma0 must be > 0");
    if (!(scale > 0)) throw ConfigError("step schedule: scale must be > 0");
  }

  std::string name() const {
    switch (kind) {
      case StepKind::Constant: return "constant";
      case StepKind::Diminishing: return "diminishing";
      case StepKind::SqrtDecay: return "sqrt_decay";
      case StepKind::LinearDecay: return "linear_decay";
    }
    return "?";
  }
};

enum class BatchKind { Linear, Sqrt, Poly, Affine, Constant };

/// Mini-batch size sequence N_k, clamped to [1, max_batch].
///   Linear    ceil(a sqrt(n) L0 (k+1))
///   Sqrt      ceil(a sqrt(n) L0 sqrt(k+1))
///   Poly      ceil(c (k+1)^(1+b))
///   Affine    ceil(2 + a k)
///   Constant  N
struct BatchSchedule {
  BatchKind kind = BatchKind::Affine;
  double a = 0.01;
  double b = 0.0;
  double c = 1.0;
  double dim = 1.0;
  double l0 = 1.0;
  std::uint64_t constant_size = 1;
  std::uint64_t max_batch = std::numeric_limits<std::uint64_t>::max();

  static BatchSchedule linear(double a, Eigen::Index n, double l0) {
    BatchSchedule s;
    s.kind = BatchKind::Linear;
    s.a = a;
    s.dim = static_cast<double>(n);
    s.l0 = l0;
    return s;
  }
  static BatchSchedule sqrt(double a, Eigen::Index n, double l0) {
    BatchSchedule s = linear(a, n, l0);
    s.kind = BatchKind::Sqrt;
    return s;
  }
  static BatchSchedule poly(double c, double b) {
    BatchSchedule s;
    s.kind = BatchKind::Poly;
    s.c = c;
    s.b = b;
    return s;
  }
  /// ceil(a n L0 eta^3 (k+1)^(1+b)).
  static BatchSchedule sqn_theory(double a, double b, Eigen::Index n, double l0, double eta) {
    return poly(a * static_cast<double>(n) * l0 * eta * eta * eta, b);
  }
  static BatchSchedule affine(double a) {
    BatchSchedule s;
    s.kind = BatchKind::Affine;
    s.a = a;
    return s;
  }
  static BatchSchedule constant(std::uint64_t n) {
    BatchSchedule s;
    s.kind = BatchKind::Constant;
    s.constant_size = n;
    return s;
  }

  std::uint64_t value(std::uint64_t k) const {
    const double k1 = static_cast<double>(k) + 1.0;
    double raw = 1.0;
    switch (kind) {
      case BatchKind::Linear: raw = a * std::sqrt(dim) * l0 * k1; break;
      case BatchKind::Sqrt: raw = a * std::sqrt(dim) * l0 * std::sqrt(k1); break;
      case BatchKind::Poly: raw = c * std::pow(k1, 1.0 + b); break;
      case BatchKind::Affine: raw = 2.0 + a * static_cast<double>(k); break;
      case BatchKind::Constant: raw = static_cast<double>(constant_size); break;
    }
    // Guard the ceiling against representation error (0.01 * 100 etc.).
    const double ceiled = std::ceil(raw - 1e-9 * std::max(1.0, std::abs(raw)));
    std::uint64_t n = ceiled < 1.0 ? 1 : (ceiled >= 1.8e19 ? max_batch : static_cast<std::uint64_t>(ceiled));
    return std::min(std::max<std::uint64_t>(n, 1), max_batch);
  }

  void validate() const {
    if (kind == BatchKind::Constant && constant_size < 1) throw ConfigError("batch: N must be >= 1");
    if (kind != BatchKind::Constant && !(a > 0) && kind != BatchKind::Poly)
      throw ConfigError("batch: a must be > 0");
    if (kind == BatchKind::Poly && (!(c > 0) || !(b >= 0))) throw ConfigError("batch: need c > 0, b >= 0");
    if (max_batch < 1) throw ConfigError("batch: max must be >= 1");
  }

  std::string name() const {
    switch (kind) {
      case BatchKind::Linear: return "linear";
      case BatchKind::Sqrt: return "sqrt";
      case BatchKind::Poly: return "poly";
      case BatchKind::Affine: return "affine";
      case BatchKind::Constant: return "constant";
    }
    return "?";
  }
};

/// Largest K with sum_{k<K} evals_per_sample * N_k <= budget, capped at max_iterations.
inline std::uint64_t iterations_within_budget(const BatchSchedule& batch, std::uint64_t evals_per_sample,
                                              std::uint64_t budget, std::uint64_t max_iterations) {
  std::uint64_t used = 0;
  std::uint64_t k = 0;
  while (k < max_iterations) {
    const std::uint64_t cost = evals_per_sample * batch.value(k);
    if (used + cost > budget) break;
    used += cost;
    ++k;
  }
  return k;
}

/// Start of the output window, ceil(lambda K), kept inside {0, ..., K-1}.
inline std::uint64_t window_start(double lambda, std::uint64_t k_total) {
  if (!(lambda >= 0 && lambda < 1)) throw ConfigError("lambda_window must lie in [0, 1)");
  if (k_total == 0) throw ConfigError("window_start: K must be >= 1");
  const auto ell = static_cast<std::uint64_t>(std::ceil(lambda * static_cast<double>(k_total) - 1e-12));
  return std::min(ell, k_total - 1);
}

/// Draws R from {ell, ..., K-1} with P[R = j] = gamma_j / sum_{i=ell}^{K-1} gamma_i.
/// `gammas` holds gamma_0 .. gamma_{K-1}.
inline std::uint64_t pick_output_index(std::span<const double> gammas, std::uint64_t ell,
                                       std::uint64_t k_total, Rng& rng) {
  if (k_total == 0 || ell > k_total - 1) throw ConfigError("pick_output_index: empty window");
  if (gammas.size() < k_total) throw ConfigError("pick_output_index: need gamma_0..gamma_{K-1}");
  double total = 0.0;
  for (std::uint64_t j = ell; j < k_total; ++j) {
    if (!(gammas[j] > 0)) throw ConfigError("pick_output_index: stepsizes must be > 0");
    total += gammas[j];
  }
  const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  double acc = 0.0;
  for (std::uint64_t j = ell; j < k_total; ++j) {
    acc += gammas[j];
    if (u < acc) return j;
  }
  return k_total - 1;
}

/// Output rule over the whole run, {0, ..., K-1}.
inline std::uint64_t pick_output_index_full(std::span<const double> gammas, std::uint64_t k_total,
                                            Rng& rng) {
  return pick_output_index(gammas, 0, k_total, rng);
}

/// Lipschitz constant of grad h_eta: (L0 sqrt(n) + 1) / eta.
inline double smoothed_lipschitz(double l0, Eigen::Index n, double eta) {
  return (l0 * std::sqrt(static_cast<double>(n)) + 1.0) / eta;
}

/// Lower bound on the smallest eigenvalue of the damped L-BFGS matrix H_k.
inline double sqn_eigen_lower(double eta, double delta, std::uint64_t p, double l0, Eigen::Index n) {
  const double le = smoothed_lipschitz(l0, n, eta);
  return delta / (32.0 * (2.0 + delta) * (static_cast<double>(p) + 1.0) * le * le);
}

/// Upper bound on the largest eigenvalue of H_k.
inline double sqn_eigen_upper(double eta, double delta, std::uint64_t p, double l0, Eigen::Index n) {
  const double le = smoothed_lipschitz(l0, n, eta);
  const double pp = static_cast<double>(p);
  return (4.0 * pp + 1.0) * std::pow(1.0 + 16.0 * le * std::sqrt(2.0 + delta) / delta, 2.0 * pp);
}

/// Theoretical stepsize ceiling lambda_lower / (lambda_upper^2 L_eta).
/// Meaningful for delta eta^2 <= 4; outside that range a warning is printed.
inline double sqn_stepsize_bound(double eta, double delta, std::uint64_t p, double l0, Eigen::Index n) {
  if (!(eta > 0) || !(delta > 0) || !(l0 > 0)) throw ConfigError("sqn_stepsize_bound: eta, delta, L0 must be > 0");
  if (delta * eta * eta > 4.0)
    std::clog << "warning: delta * eta^2 = " << delta * eta * eta << " exceeds 4; eigenvalue bounds do not apply\n";
  const double lo = sqn_eigen_lower(eta, delta, p, l0, n);
  const double hi = sqn_eigen_upper(eta, delta, p, l0, n);
  return lo / (hi * hi * smoothed_lipschitz(l0, n, eta));
}

/// Constant step for the batch-free regime (N_k = 1) over a horizon of K steps:
/// 1 / (lambda_upper sqrt(16 n L_eta K) (2 pi)^(1/4) L0).
inline double sqn_horizon_step(double eta, double delta, std::uint64_t p, double l0, Eigen::Index n,
                               std::uint64_t k_total) {
  const double le = smoothed_lipschitz(l0, n, eta);
  const double hi = sqn_eigen_upper(eta, delta, p, l0, n);
  return 1.0 / (hi * std::sqrt(16.0 * static_cast<double>(n) * le * static_cast<double>(k_total)) *
                std::pow(2.0 * std::numbers::pi, 0.25) * l0);
}

/// Default constant VRG step eta / (2 sqrt(n) L0).
inline double vrg_default_step(double eta, Eigen::Index n, double l0) {
  return eta / (2.0 * std::sqrt(static_cast<double>(n)) * l0);
}

}  // namespace zonsnc
