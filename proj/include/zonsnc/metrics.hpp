#pragma once

// Run traces and the stationarity / objective measurements recorded in them.
// Measurements draw from their own generator and their own evaluation
// counter, never from the optimization stream or budget.

#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "smoothing.hpp"

namespace zonsnc {

/// Source of the gradient used inside metrics.
///   Auto      exact grad f_eta if the problem has it, else exact grad f, else an estimate
///   Estimate  always a fresh M-sample zeroth-order estimate of grad f_eta
enum class MetricGradient { Auto, Estimate };

struct MetricOptions {
  std::uint64_t cadence = 0;  // 0: every ceil(K / 50) iterations
  std::size_t samples = 1000; // M
  MetricGradient gradient = MetricGradient::Auto;
};

struct Checkpoint {
  std::uint64_t k = 0;
  double gamma = 0.0;
  std::uint64_t batch = 0;
  double stationarity = 0.0;  // |G_{eta,beta}(x_k)| for VRG, |grad h_eta(x_k)| for VRSQN
  double objective = 0.0;
  double infeasibility = 0.0;
  std::uint64_t evals = 0;
  double wall_s = 0.0;
};

struct RunReport {
  std::string algorithm;
  Vector x_final;
  Vector x_output;  // x_R
  std::uint64_t output_index = 0;
  std::uint64_t iterations = 0;  // K
  std::uint64_t evals_used = 0;  // optimization evaluations only
  std::uint64_t metric_evals = 0;
  std::uint64_t batch_total = 0;  // sum of N_k
  std::uint64_t last_batch = 0;   // N_{K-1}
  std::uint64_t kdamp = 0;        // iterations with Phi < 1 (VRSQN)
  std::uint64_t skipped_pairs = 0;
  double g_output = 0.0;  // squared stationarity measure at x_R
  double g_final = 0.0;   // squared stationarity measure at x_K
  double f_final = 0.0;
  double infeas_final = 0.0;
  double cpu_s = 0.0;
  std::vector<Checkpoint> checkpoints;
};

inline std::uint64_t metric_cadence(const MetricOptions& opt, std::uint64_t k_total) {
  if (opt.cadence > 0) return opt.cadence;
  return std::max<std::uint64_t>(1, (k_total + 49) / 50);
}

/// Gradient of f_eta (or of f, see MetricGradient) used by the metrics.
template <StochasticProblem P>
Vector metric_gradient(const P& problem, const Vector& x, double eta, const MetricOptions& opt, Rng& rng,
                       EvalCounter& counter) {
  if (opt.gradient == MetricGradient::Auto) {
    if constexpr (HasSmoothedGradient<P>) return problem.smoothed_grad(x, eta);
    else if constexpr (HasExactGradient<P>) return problem.true_grad(x);
  }
  return zo_grad_batch(problem, x, eta, opt.samples, rng, counter).mean_grad;
}

template <StochasticProblem P>
double metric_objective(const P& problem, const Vector& x, const MetricOptions& opt, Rng& rng,
                        EvalCounter& counter) {
  if constexpr (HasExactValue<P>) {
    return problem.true_value(x);
  } else {
    double sum = 0.0;
    for (std::size_t j = 0; j < opt.samples; ++j) sum += problem.evaluate(x, problem.sample(rng));
    counter.add(opt.samples);
    return sum / static_cast<double>(opt.samples);
  }
}

/// |residual(set, x, g_hat, beta)| with g_hat a fresh M-sample estimate of grad f_eta.
template <StochasticProblem P>
double measure_residual(const P& problem, const ConvexSet& set, const Vector& x, double eta, double beta,
                        std::size_t samples, Rng& rng, EvalCounter& counter) {
  if (samples < 1) throw ConfigError("measure_residual: M must be >= 1");
  const Vector g = zo_grad_batch(problem, x, eta, samples, rng, counter).mean_grad;
  return residual(set, x, g, beta).norm();
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace zonsnc
