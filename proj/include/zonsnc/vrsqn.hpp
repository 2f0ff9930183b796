#pragma once

// Variance-reduced zeroth-order smoothed quasi-Newton method on
//   h_eta(x) = f_eta(x) + (1 / 2eta) dist(x, X)^2.
// Each iteration draws one mini-batch, uses it at x_k for the step and again
// at x_{k+1} for the gradient difference that feeds the damped L-BFGS memory.

#include <functional>
#include <numbers>
#include <optional>

#include "metrics.hpp"
#include "schedules.hpp"
#include "sqn_core.hpp"
#include "vrg.hpp"

namespace zonsnc {

enum class ColdStart { Scaled, Raw };

struct VrsqnConfig {
  double eta = 0.1;
  double delta = 1.0;
  std::size_t memory = 5;  // p~
  StepSchedule step = StepSchedule::constant(0.01);
  BatchSchedule batch = BatchSchedule::affine(0.01);
  std::uint64_t budget = 0;
  std::uint64_t max_iterations = 0;
  std::uint64_t seed = 0;
  std::optional<Vector> x0;
  ColdStart cold_start = ColdStart::Scaled;
  MetricOptions metrics;
  bool warn = true;
};

/// Per-iteration view handed to an observer (instrumented runs).
struct SqnIteration {
  std::uint64_t k;
  const Vector& x;       // x_k
  const Vector& s;       // x_{k+1} - x_k
  const Vector& y;       // g_hat(x_{k+1}) - g_bar(x_k)
  double nu_next;
  const CurvatureTriple* triple;  // null when the pair was skipped
  const SqnMemory& memory;        // after the update
};

using SqnObserver = std::function<void(const SqnIteration&)>;

/// Distance bound eta (eps + 4 (2 pi)^(1/4) sqrt(n) L0) for a point with
/// |grad h_eta| <= eps.
inline double infeasibility_bound(Eigen::Index n, double l0, double eta, double eps) {
  if (!(eta > 0) || !(l0 > 0) || eps < 0) throw ConfigError("infeasibility_bound: bad arguments");
  return eta * (eps + 4.0 * std::pow(2.0 * std::numbers::pi, 0.25) * std::sqrt(static_cast<double>(n)) * l0);
}

/// Default delta = n L0^2 / eta^2 from the complexity analysis.
inline double sqn_theory_delta(Eigen::Index n, double l0, double eta) {
  return static_cast<double>(n) * l0 * l0 / (eta * eta);
}

template <StochasticProblem P>
RunReport vrsqn_run(const P& problem, const ConvexSet& set, const VrsqnConfig& cfg,
                    const SqnObserver& observer = {}) {
  const Eigen::Index n = problem.dim();
  if (set.dim() != n) throw DimensionError("vrsqn: set and problem dimensions differ");
  if (!(cfg.eta > 0)) throw ConfigError("vrsqn: eta must be > 0");
  if (!(cfg.delta > 0)) throw ConfigError("vrsqn: delta must be > 0");
  cfg.step.validate();
  cfg.batch.validate();
  if (cfg.warn && cfg.delta * cfg.eta * cfg.eta > 4.0)
    std::clog << "warning: delta * eta^2 = " << cfg.delta * cfg.eta * cfg.eta
              << " exceeds 4; eigenvalue bounds do not apply\n";

  const std::uint64_t k_total = planned_iterations(cfg.batch, 4, cfg.budget, cfg.max_iterations);
  if (k_total == 0) throw ConfigError("vrsqn: budget does not cover a single iteration");

  Stopwatch clock;
  Rng rng = make_stream(cfg.seed, kOptimizationStream);
  Rng out_rng = make_stream(cfg.seed, kOutputIndexStream);
  Rng metric_rng = make_stream(cfg.seed, kMetricStream);
  EvalCounter evals;
  EvalCounter metric_evals;

  std::vector<double> gammas(k_total);
  for (std::uint64_t k = 0; k < k_total; ++k) gammas[k] = cfg.step.value(k);
  const std::uint64_t r_index = pick_output_index_full(gammas, k_total, out_rng);

  RunReport report;
  report.algorithm = "vrsqn";
  report.iterations = k_total;
  report.output_index = r_index;

  auto stationarity = [&](const Vector& x) {
    const Vector g = metric_gradient(problem, x, cfg.eta, cfg.metrics, metric_rng, metric_evals);
    return (g + moreau_indicator_grad(set, x, cfg.eta)).norm();
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
  SqnMemory memory(cfg.memory, cfg.delta);
  Vector x = cfg.x0 ? *cfg.x0 : set.default_start();
  require_dim(x, n, "vrsqn x0");

  for (std::uint64_t k = 0; k < k_total; ++k) {
    if (k % cadence == 0) record(k, x);
    if (k == r_index) report.x_output = x;

    const std::uint64_t batch_size = cfg.batch.value(k);
    auto batch = draw_batch(problem, cfg.eta, batch_size, rng);
    const Vector g_bar = zo_grad_sqn(problem, set, x, batch, cfg.eta, evals);

    Vector direction;
    if (k >= cfg.memory) {
      direction = two_loop(memory, g_bar);
    } else if (cfg.cold_start == ColdStart::Scaled) {
      direction = g_bar / std::max(memory.nu(), cfg.delta);
    } else {
      direction = g_bar;
    }

    Vector x_next = x - gammas[k] * direction;
    if (!x_next.allFinite())
      throw NonFiniteError("vrsqn: non-finite iterate at k = " + std::to_string(k) +
                           ", x_k = " + format_vector(x));
    const Vector g_hat = zo_grad_sqn(problem, set, x_next, batch, cfg.eta, evals);

    Vector s = x_next - x;
    Vector y = g_hat - g_bar;
    double nu_next = memory.nu();
    const CurvatureTriple* stored = nullptr;
    if (s.norm() >= 1e-14 * (1.0 + x.norm())) {
      nu_next = compute_nu(s, y, cfg.delta);
      CurvatureTriple t = make_triple(s, y, nu_next);
      if (t.phi < 1.0) ++report.kdamp;
      memory.push(std::move(t));
      memory.set_nu(nu_next);
      stored = &memory.pairs().back();
    } else {
      ++report.skipped_pairs;
    }
    if (observer) observer(SqnIteration{k, x, s, y, nu_next, stored, memory});

    x = std::move(x_next);
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
