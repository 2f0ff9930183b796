#pragma once

// Variance-reduced zeroth-order projected gradient method:
//   x_{k+1} = P_X[x_k - gamma_k g_{eta,N_k}(x_k)]
// with the output drawn from {ceil(lambda K), ..., K-1} with weights gamma_j.

#include <optional>

#include "metrics.hpp"
#include "schedules.hpp"

namespace zonsnc {

struct VrgConfig {
  double eta = 0.1;
  StepSchedule step = StepSchedule::constant(0.01);
  BatchSchedule batch = BatchSchedule::affine(0.01);
  std::uint64_t budget = 0;          // evaluations; 0 = unlimited
  std::uint64_t max_iterations = 0;  // K; 0 = run until the budget is spent
  double lambda_window = 0.5;
  std::uint64_t seed = 0;
  std::optional<Vector> x0;          // default: center of the set
  double residual_beta = 0.0;        // 0: 1 / gamma_0
  MetricOptions metrics;
  bool warn = true;  // stepsize warning on stderr
};

/// Iteration count implied by a max-iterations / budget pair.
inline std::uint64_t planned_iterations(const BatchSchedule& batch, std::uint64_t evals_per_sample,
                                        std::uint64_t budget, std::uint64_t max_iterations) {
  if (budget == 0 && max_iterations == 0) throw ConfigError("need an iteration count K or a budget");
  const std::uint64_t cap = max_iterations ? max_iterations : std::numeric_limits<std::uint64_t>::max();
  if (budget == 0) return cap;
  return iterations_within_budget(batch, evals_per_sample, budget, cap);
}

template <StochasticProblem P>
RunReport vrg_run(const P& problem, const ConvexSet& set, const VrgConfig& cfg) {
  const Eigen::Index n = problem.dim();
  if (set.dim() != n) throw DimensionError("vrg: set and problem dimensions differ");
  if (!(cfg.eta > 0)) throw ConfigError("vrg: eta must be > 0");
  cfg.step.validate();
  cfg.batch.validate();
  const double gamma0 = cfg.step.value(0);
  const double l0 = problem.lipschitz_l0();
  if (cfg.warn && gamma0 >= cfg.eta / (std::sqrt(static_cast<double>(n)) * l0))
    std::clog << "warning: gamma_0 = " << gamma0 << " is not below eta / (sqrt(n) L0) = "
              << cfg.eta / (std::sqrt(static_cast<double>(n)) * l0) << '\n';

  const std::uint64_t k_total = planned_iterations(cfg.batch, 2, cfg.budget, cfg.max_iterations);
  if (k_total == 0) throw ConfigError("vrg: budget does not cover a single iteration");

  Stopwatch clock;
  Rng rng = make_stream(cfg.seed, kOptimizationStream);
  Rng out_rng = make_stream(cfg.seed, kOutputIndexStream);
  Rng metric_rng = make_stream(cfg.seed, kMetricStream);
  EvalCounter evals;
  EvalCounter metric_evals;

  std::vector<double> gammas(k_total);
  for (std::uint64_t k = 0; k < k_total; ++k) gammas[k] = cfg.step.value(k);
  const std::uint64_t ell = window_start(cfg.lambda_window, k_total);
  const std::uint64_t r_index = pick_output_index(gammas, ell, k_total, out_rng);
  const double beta = cfg.residual_beta > 0 ? cfg.residual_beta : 1.0 / gamma0;

  RunReport report;
  report.algorithm = "vrg";
  report.iterations = k_total;
  report.output_index = r_index;

  auto stationarity = [&](const Vector& x) {
    const Vector g = metric_gradient(problem, x, cfg.eta, cfg.metrics, metric_rng, metric_evals);
    return residual(set, x, g, beta).norm();
  };
  auto record = [&](std::uint64_t k, const Vector& x) {
    Checkpoint c;
    c.k = k;
    c.gamma = k < k_total ? gammas[k] : gammas.back();
    c.batch = cfg.batch.value(k);
    c.stationarity = stationarity(x);
    c.objective = metric_objective(problem, x, cfg.metrics, metric_rng, metric_evals);
    c.infeasibility = infeasibility(set, x);
    c.evals = evals.used;
    c.wall_s = clock.seconds();
    report.checkpoints.push_back(c);
  };

  const std::uint64_t cadence = metric_cadence(cfg.metrics, k_total);
  Vector x = set.project(cfg.x0 ? *cfg.x0 : set.default_start());
  require_dim(x, n, "vrg x0");
  for (std::uint64_t k = 0; k < k_total; ++k) {
    if (k % cadence == 0) record(k, x);
    if (k == r_index) report.x_output = x;
    const std::uint64_t batch_size = cfg.batch.value(k);
    const auto batch = zo_grad_batch(problem, x, cfg.eta, batch_size, rng, evals);
    x = set.project(x - gammas[k] * batch.mean_grad);
    if (!x.allFinite()) throw NonFiniteError("vrg: non-finite iterate at k = " + std::to_string(k));
    report.batch_total += batch_size;
    report.last_batch = batch_size;
  }
  record(k_total, x);

  report.x_final = x;
  report.evals_used = evals.used;
  const double sr = stationarity(report.x_output);
  report.g_output = sr * sr;
  report.g_final = report.checkpoints.back().stationarity * report.checkpoints.back().stationarity;
  report.f_final = report.checkpoints.back().objective;
  report.infeas_final = infeasibility(set, x);
  report.metric_evals = metric_evals.used;
  report.cpu_s = clock.seconds();
  return report;
}

}  // namespace zonsnc
