#pragma once

// Property checks and reference experiments backing `zo-nsnc verify` and the
// acceptance binary. Every check is seeded and returns a one-line verdict.

#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>
#include <sstream>

#include "harness.hpp"

namespace zonsnc::verify {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// 1. unbiasedness on a linear objective

inline CheckResult estimator_unbiasedness(std::uint64_t seed = 11) {
  constexpr Eigen::Index n = 5;
  constexpr std::size_t samples = 100000;
  constexpr double eta = 0.1;
  constexpr double max_z = 4.0;
  Rng rng = make_stream(seed, kOptimizationStream);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector c(n), x(n);
  for (Eigen::Index i = 0; i < n; ++i) c[i] = normal(rng);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = normal(rng);
  const LinearProblem problem(c);

  EvalCounter counter;
  Vector sum = Vector::Zero(n), sumsq = Vector::Zero(n);
  for (std::size_t j = 0; j < samples; ++j) {
    const Vector g = zo_grad_sample(problem, x, sample_sphere(rng, n, eta), NoNoise{}, eta, counter);
    sum += g;
    sumsq += g.cwiseProduct(g);
  }
  const double m = static_cast<double>(samples);
  const Vector mean = sum / m;
  const Vector var = (sumsq / m - mean.cwiseProduct(mean)) * (m / (m - 1.0));
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) worst = std::max(worst, std::abs(mean[i] - c[i]) / std::sqrt(var[i] / m));
  return {1, "estimator unbiasedness", worst <= max_z,
          "max |mean - c| / se = " + fmt(worst) + " (limit " + fmt(max_z) + ")"};
}

// ---------------------------------------------------------------------------
// 2. second-moment bound and 1/N batch variance

/// Sum of coordinate variances of the N-sample batch mean, from `samples`
/// single estimates grouped into batches.
template <StochasticProblem P>
double batch_mean_variance(const P& problem, const Vector& x, double eta, std::size_t batch, std::size_t samples,
                           Rng& rng) {
  const std::size_t groups = samples / batch;
  EvalCounter counter;
  Vector sum = Vector::Zero(problem.dim());
  double sumsq = 0.0;
  for (std::size_t g = 0; g < groups; ++g) {
    const Vector mean = zo_grad_batch(problem, x, eta, batch, rng, counter).mean_grad;
    sum += mean;
    sumsq += mean.squaredNorm();
  }
  const double m = static_cast<double>(groups);
  return (sumsq - sum.squaredNorm() / m) / (m - 1.0);
}

inline CheckResult moment_bound(std::uint64_t seed = 12) {
  constexpr std::size_t samples = 100000;
  constexpr double eta = 0.1;
  constexpr double scaling_tol = 0.2;
  bool ok = true;
  std::ostringstream detail;
  double worst_ratio = 0.0, worst_scaling = 0.0;
  for (double l0 : {1.0, 3.0}) {
    for (Eigen::Index n : {1, 5, 20}) {
      Rng rng = make_stream(seed + static_cast<std::uint64_t>(n) * 10 + static_cast<std::uint64_t>(l0),
                            kOptimizationStream);
      std::normal_distribution<double> normal(0.0, 0.1);
      Vector x(n);
      for (Eigen::Index i = 0; i < n; ++i) x[i] = normal(rng);
      const NormProblem problem(n, l0);
      const double bound = 16.0 * std::sqrt(2.0 * std::numbers::pi) * l0 * l0 * static_cast<double>(n);
      const double v1 = batch_mean_variance(problem, x, eta, 1, samples, rng);
      worst_ratio = std::max(worst_ratio, v1 / bound);
      if (!(v1 <= bound)) {
        ok = false;
        detail << " moment(n=" << n << ",L0=" << l0 << ")=" << fmt(v1) << ">" << fmt(bound);
      }
      // 1-D estimates are deterministic: no 1/N law to check
      if (n < 2) continue;
      for (std::size_t batch : {10u, 100u}) {
        const double vn = batch_mean_variance(problem, x, eta, batch, samples, rng);
        const double scaled = vn * static_cast<double>(batch) / v1;
        worst_scaling = std::max(worst_scaling, std::abs(scaled - 1.0));
        if (std::abs(scaled - 1.0) > scaling_tol) {
          ok = false;
          detail << " N*var(N)/var(1)(n=" << n << ",L0=" << l0 << ",N=" << batch << ")=" << fmt(scaled);
        }
      }
    }
  }
  return {2, "second-moment bound and 1/N variance", ok,
          "max moment/bound = " + fmt(worst_ratio) + ", max |N var(N)/var(1) - 1| = " + fmt(worst_scaling) +
              detail.str()};
}

// ---------------------------------------------------------------------------
// 3. two-loop recursion against the dense construction

/// Fills `memory` with `pairs` damped triples whose y are noisy gradient
/// differences y = A s + e of a random (possibly indefinite) quadratic.
inline void fill_random_memory(SqnMemory& memory, Eigen::Index n, std::size_t pairs, Rng& rng,
                               double noise = 0.1) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = normal(rng) / std::sqrt(static_cast<double>(n));
  a = 0.5 * (a + a.transpose());
  for (std::size_t j = 0; j < pairs; ++j) {
    Vector s(n), e(n);
    for (Eigen::Index i = 0; i < n; ++i) s[i] = normal(rng);
    for (Eigen::Index i = 0; i < n; ++i) e[i] = noise * s.norm() * normal(rng);
    Vector y = a * s + e;
    const double nu_next = compute_nu(s, y, memory.delta());
    memory.push(make_triple(std::move(s), std::move(y), nu_next));
    memory.set_nu(nu_next);
  }
}

inline CheckResult two_loop_correctness(std::uint64_t seed = 13) {
  constexpr int trials = 1000;
  constexpr double tol_apply = 1e-10;
  constexpr double tol_inverse = 1e-8;
  Rng rng = make_stream(seed, kOptimizationStream);
  std::uniform_int_distribution<int> dim(1, 8), cap(1, 5), extra(0, 3);
  std::uniform_real_distribution<double> delta_dist(0.1, 2.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst_apply = 0.0, worst_inverse = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Eigen::Index n = dim(rng);
    const std::size_t p = static_cast<std::size_t>(cap(rng));
    SqnMemory memory(p, delta_dist(rng));
    fill_random_memory(memory, n, p + static_cast<std::size_t>(extra(rng)), rng);
    Vector g(n);
    for (Eigen::Index i = 0; i < n; ++i) g[i] = normal(rng);
    const Matrix h = dense_inverse_hessian(memory, n);
    const Matrix b = dense_hessian(memory, n);
    worst_apply = std::max(worst_apply, (two_loop(memory, g) - h * g).lpNorm<Eigen::Infinity>());
    worst_inverse = std::max(worst_inverse, (h * b - Matrix::Identity(n, n)).lpNorm<Eigen::Infinity>());
  }
  return {3, "two-loop equals dense inverse", worst_apply <= tol_apply && worst_inverse <= tol_inverse,
          "max |two_loop - Hg| = " + fmt(worst_apply) + ", max |HB - I| = " + fmt(worst_inverse)};
}

// ---------------------------------------------------------------------------
// 4-6. instrumented VRSQN runs

inline Config logistic_box_config() {
  return Config::parse_string(
      "problem = logistic\nn = 5\nS = 1000\nset = box\nbox.lower = -1\nbox.upper = 1\nx0 = 0\n"
      "eta = 0.1\nstep.kind = constant\nstep.gamma0 = 0.01\nbatch.kind = affine\nbatch.a = 0.01\n"
      "sqn.p = 5\nsqn.delta = 1\n");
}

inline Config minquad_config(Eigen::Index n) {
  return Config::parse_string("problem = minquad\nn = " + std::to_string(n) +
                              "\nset = box\nbox.lower = -5\nbox.upper = 5\nx0 = 3\neta = 0.1\nstep.kind = constant\nstep.gamma0 = 0.01\n"
                              "batch.kind = affine\nbatch.a = 0.01\nsqn.p = 5\nsqn.delta = 1\n");
}

/// Runs VRSQN on the problem described by `cfg`, calling `observer` every iteration.
inline RunReport observed_vrsqn(const Config& cfg, std::uint64_t seed, const SqnObserver& observer,
                                double* l0_out = nullptr, Eigen::Index* n_out = nullptr) {
  const ProblemSetup setup = build_problem(cfg);
  return std::visit(
      [&](const auto& p) {
        if (l0_out) *l0_out = p.lipschitz_l0();
        if (n_out) *n_out = p.dim();
        return vrsqn_run(p, setup.set, build_vrsqn_config(cfg, p.dim(), p.lipschitz_l0(), seed), observer);
      },
      setup.problem);
}

inline CheckResult curvature_condition(std::uint64_t seed = 14) {
  constexpr double rel_slack = 1e-12;
  std::uint64_t accepted = 0, violations = 0, damped = 0;
  const SqnObserver observer = [&](const SqnIteration& it) {
    if (!it.triple) return;
    ++accepted;
    if (it.triple->phi < 1.0) ++damped;
    const auto& t = *it.triple;
    if (!(t.s.dot(t.ybar) >= 0.25 * it.nu_next * t.s.squaredNorm() * (1.0 - rel_slack))) ++violations;
  };
  Config mq = minquad_config(12);
  mq.set("budget", "500000");
  Config lr = logistic_box_config();
  lr.set("budget", "50000");
  Config lr_free = lr;
  lr_free.set("set", "rn");
  for (std::uint64_t r = 0; r < 3; ++r) {
    observed_vrsqn(mq, seed + r, observer);
    observed_vrsqn(lr, seed + r, observer);
    observed_vrsqn(lr_free, seed + r, observer);
  }
  return {4, "curvature condition on accepted pairs", violations == 0 && accepted > 0,
          std::to_string(accepted) + " pairs (" + std::to_string(damped) + " damped), " +
              std::to_string(violations) + " violations"};
}

struct SpectrumStats {
  std::uint64_t matrices = 0;
  std::uint64_t eigen_violations = 0;
  std::uint64_t iterations = 0;
  std::uint64_t y_violations = 0;
  double min_lower_margin = INFINITY;  // lambda_min / bound
  double min_upper_margin = INFINITY;  // bound / lambda_max
  double max_y_ratio = 0.0;            // |y| / (2 L_eta |s|)
};

/// Instrumented runs on n = 5 benchmarks for p in {1, 3, 5}: dense H every
/// `every` iterations plus the y-bound on every iteration.
inline SpectrumStats instrumented_spectrum(std::uint64_t seed = 15, std::uint64_t iterations = 5000,
                                           std::uint64_t every = 50) {
  SpectrumStats st;
  Config mq = minquad_config(5);
  Config lr = logistic_box_config();
  for (Config* cfg : {&mq, &lr}) {
    cfg->set("K", std::to_string(iterations));
    cfg->set("metric.cadence", std::to_string(iterations));
    for (std::size_t p : {1u, 3u, 5u}) {
      cfg->set("sqn.p", std::to_string(p));
      const double eta = cfg->get_double("eta", 0.1);
      const double delta = cfg->get_double("sqn.delta", 1.0);
      if (delta * eta * eta > 4.0) throw ConfigError("instrumented runs need delta eta^2 <= 4");
      double l0 = 0.0;
      Eigen::Index n = 0;
      const ProblemSetup probe = build_problem(*cfg);
      std::visit([&](const auto& pr) { l0 = pr.lipschitz_l0(); n = pr.dim(); }, probe.problem);
      const double lo = sqn_eigen_lower(eta, delta, p, l0, n);
      const double hi = sqn_eigen_upper(eta, delta, p, l0, n);
      const double l_eta = smoothed_lipschitz(l0, n, eta);
      const SqnObserver observer = [&](const SqnIteration& it) {
        ++st.iterations;
        const double ratio = it.y.norm() / (2.0 * l_eta * it.s.norm());
        if (it.s.norm() > 0) st.max_y_ratio = std::max(st.max_y_ratio, ratio);
        if (it.y.norm() > 2.0 * l_eta * it.s.norm()) ++st.y_violations;
        if (it.k % every != 0) return;
        const Matrix h = dense_inverse_hessian(it.memory, n);
        const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (h + h.transpose()), Eigen::EigenvaluesOnly);
        const double lmin = eig.eigenvalues().minCoeff();
        const double lmax = eig.eigenvalues().maxCoeff();
        ++st.matrices;
        st.min_lower_margin = std::min(st.min_lower_margin, lmin / lo);
        st.min_upper_margin = std::min(st.min_upper_margin, hi / lmax);
        if (!(lmin >= lo) || !(lmax <= hi)) ++st.eigen_violations;
      };
      observed_vrsqn(*cfg, seed + p, observer);
    }
  }
  return st;
}

inline CheckResult eigenvalue_bounds(const SpectrumStats& st) {
  constexpr std::uint64_t min_matrices = 500;
  return {5, "eigenvalue bounds of H_k", st.eigen_violations == 0 && st.matrices >= min_matrices,
          std::to_string(st.matrices) + " matrices, " + std::to_string(st.eigen_violations) +
              " violations, min lambda_min/lower = " + fmt(st.min_lower_margin) +
              ", min upper/lambda_max = " + fmt(st.min_upper_margin)};
}

inline CheckResult y_bound(const SpectrumStats& st) {
  return {6, "gradient-difference bound |y| <= 2 L_eta |s|", st.y_violations == 0 && st.iterations > 0,
          std::to_string(st.iterations) + " iterations, " + std::to_string(st.y_violations) +
              " violations, max |y|/(2 L_eta |s|) = " + fmt(st.max_y_ratio)};
}

// ---------------------------------------------------------------------------
// 7. residual mapping inequalities

inline ConvexSet random_set(Eigen::Index n, Rng& rng) {
  std::uniform_int_distribution<int> kind(0, 2);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> width(0.05, 3.0);
  switch (kind(rng)) {
    case 0: return ConvexSet::whole_space(n);
    case 1: {
      Vector lo(n), hi(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        lo[i] = normal(rng);
        hi[i] = lo[i] + width(rng);
      }
      return ConvexSet::box(lo, hi);
    }
    default: {
      Vector c(n);
      for (Eigen::Index i = 0; i < n; ++i) c[i] = normal(rng);
      return ConvexSet::ball(c, width(rng));
    }
  }
}

inline CheckResult residual_inequalities(std::uint64_t seed = 17) {
  constexpr int instances = 10000;
  constexpr double slack = 1e-12;
  Rng rng = make_stream(seed, kOptimizationStream);
  std::uniform_int_distribution<int> dim(1, 10);
  std::uniform_real_distribution<double> log_beta(-2.0, 2.0), log_scale(-2.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_vector = [&](Eigen::Index n, double scale) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = scale * normal(rng);
    return v;
  };
  int bad_inequality = 0, bad_monotone = 0;
  double worst_excess = -INFINITY;
  for (int t = 0; t < instances; ++t) {
    const Eigen::Index n = dim(rng);
    const ConvexSet set = random_set(n, rng);
    const Vector x = random_vector(n, 2.0);
    const Vector g = random_vector(n, std::pow(10.0, log_scale(rng)));
    const Vector e = random_vector(n, std::pow(10.0, log_scale(rng)));
    double b1 = std::pow(10.0, log_beta(rng)), b2 = std::pow(10.0, log_beta(rng));
    if (b1 > b2) std::swap(b1, b2);

    const double lhs = residual(set, x, g, b1).squaredNorm();
    const double rhs = 2.0 * residual(set, x, g + e, b1).squaredNorm() + 2.0 * e.squaredNorm();
    worst_excess = std::max(worst_excess, lhs - rhs);
    if (lhs > rhs + slack * (1.0 + rhs)) ++bad_inequality;

    const double r1 = residual(set, x, g, b1).norm();
    const double r2 = residual(set, x, g, b2).norm();
    if (r1 > r2 + slack * (1.0 + r2)) ++bad_monotone;
  }
  return {7, "residual inequality and monotonicity in beta", bad_inequality == 0 && bad_monotone == 0,
          std::to_string(instances) + " instances each: " + std::to_string(bad_inequality) +
              " inequality violations, " + std::to_string(bad_monotone) + " monotonicity violations"};
}

// ---------------------------------------------------------------------------
// 8-11. reference experiments

inline double least_squares_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

inline Config vrg_rate_config() {
  return Config::parse_string(
      "problem = minquad\nn = 5\nset = box\nbox.lower = -5\nbox.upper = 5\nx0 = 1\n"
      "algo = vrg\neta = 0.1\nstep.kind = theory\nbatch.kind = linear\nbatch.a = 0.02\n"
      "lambda_window = 0.5\nreplications = 20\nseed = 800\n");
}

inline CheckResult vrg_rate(std::size_t jobs = 1) {
  constexpr double slope_lo = -1.4, slope_hi = -0.6;
  std::vector<double> log_k, log_g;
  std::ostringstream detail;
  for (std::uint64_t k : {250u, 500u, 1000u, 2000u}) {
    Config cfg = vrg_rate_config();
    cfg.set("K", std::to_string(k));
    cfg.set("jobs", std::to_string(jobs));
    const AggregateReport agg = run_experiment(ExperimentSpec::from_config(cfg));
    if (agg.failures) return {8, "VRG rate shape", false, "replication failures"};
    log_k.push_back(std::log(static_cast<double>(k)));
    log_g.push_back(std::log(agg.g_output.mean));
    detail << " K=" << k << ":" << fmt(agg.g_output.mean);
  }
  const double slope = least_squares_slope(log_k, log_g);
  return {8, "VRG rate shape", slope >= slope_lo && slope <= slope_hi,
          "slope " + fmt(slope) + " (want [" + fmt(slope_lo) + ", " + fmt(slope_hi) + "]), E|G(x_R)|^2:" +
              detail.str()};
}

inline Config minquad_reproduction_config() {
  return Config::parse_string(
      "problem = minquad\nn = 12\nset = box\nbox.lower = -5\nbox.upper = 5\nx0 = 3\neta = 0.1\n"
      "budget = 5e6\nreplications = 20\n"
      "step.kind = constant\nstep.gamma0 = 0.01\nbatch.kind = affine\nbatch.a = 0.01\n"
      "sqn.p = 5\nsqn.delta = 1\nseed = 900\n");
}

inline CheckResult minquad_reproduction(std::size_t jobs = 1) {
  constexpr double g_max = 1e-4;
  Config base = minquad_reproduction_config();
  base.set("jobs", std::to_string(jobs));
  Config vrg = base, sqn = base;
  vrg.set("algo", "vrg");
  sqn.set("algo", "vrsqn");
  const Comparison c = compare(ExperimentSpec::from_config(vrg), ExperimentSpec::from_config(sqn));
  const double gv = c.first.g_final.mean, gs = c.second.g_final.mean;
  const bool ok = c.first.failures == 0 && c.second.failures == 0 && gv <= g_max && gs <= g_max && gs <= gv;
  return {9, "min-quadratics reproduction", ok,
          "mean G_K vrg = " + fmt(gv) + ", vrsqn = " + fmt(gs) + " (want both <= " + fmt(g_max) +
              " and vrsqn <= vrg)"};
}

inline Config logistic_reproduction_config() {
  return Config::parse_string(
      "problem = logistic\nn = 5\nS = 1000\ntest_S = 1000\nset = rn\neta = 0.1\nbudget = 5e4\n"
      "replications = 20\nstep.kind = constant\nstep.gamma0 = 0.01\nbatch.kind = affine\n"
      "batch.a = 0.01\nsqn.p = 5\nsqn.delta = 1\nseed = 1000\n");
}

inline CheckResult logistic_reproduction(std::size_t jobs = 1) {
  constexpr double min_accuracy = 0.90, min_recall = 0.90;
  bool ok = true;
  std::ostringstream detail;
  for (const char* algo : {"vrg", "vrsqn"}) {
    Config cfg = logistic_reproduction_config();
    cfg.set("algo", algo);
    cfg.set("jobs", std::to_string(jobs));
    const AggregateReport agg = run_experiment(ExperimentSpec::from_config(cfg));
    ok = ok && agg.failures == 0 && agg.accuracy.mean >= min_accuracy && agg.recall.mean >= min_recall;
    detail << algo << ": accuracy " << fmt(agg.accuracy.mean) << ", recall " << fmt(agg.recall.mean) << "; ";
  }
  return {10, "logistic reproduction", ok, detail.str() + "want >= " + fmt(min_accuracy)};
}

inline CheckResult infeasibility_scaling(std::size_t jobs = 1) {
  constexpr double bound_eta = 0.1;
  constexpr double max_spread = 2.0;
  constexpr double se_multiple = 3.0;
  std::vector<double> per_eta;
  std::ostringstream detail;
  bool bound_ok = false;
  for (double eta : {0.05, 0.1, 0.2}) {
    Config cfg = logistic_box_config();
    cfg.set("algo", "vrsqn");
    cfg.set("budget", "5e4");
    cfg.set("replications", "20");
    cfg.set("seed", "1100");
    cfg.set("jobs", std::to_string(jobs));
    cfg.set("eta", format_double(eta));
    const ProblemSetup setup = build_problem(cfg);
    const auto* lr = std::get_if<LogisticL1>(&setup.problem);
    const AggregateReport agg = run_experiment(ExperimentSpec::from_config(cfg));
    if (agg.failures) return {11, "infeasibility bound", false, "replication failures"};
    per_eta.push_back(agg.infeas_final.mean / eta);
    detail << " eta=" << eta << ": infeas " << fmt(agg.infeas_final.mean);
    if (eta == bound_eta) {
      double grad = 0.0;
      for (const auto& r : agg.runs) grad += std::sqrt(r.report.g_final);
      grad /= static_cast<double>(agg.runs.size());
      const double bound = infeasibility_bound(lr->dim(), lr->lipschitz_l0(), eta, grad) +
                           se_multiple * agg.infeas_final.se.value_or(0.0);
      bound_ok = agg.infeas_final.mean <= bound;
      detail << " (bound " << fmt(bound) << ")";
    }
  }
  const auto [lo, hi] = std::minmax_element(per_eta.begin(), per_eta.end());
  const bool linear_ok = *lo > 0 && *hi / *lo <= max_spread;
  return {11, "infeasibility bound and linear scaling in eta", bound_ok && linear_ok,
          "spread of infeas/eta = " + fmt(*lo > 0 ? *hi / *lo : INFINITY) + " (limit " + fmt(max_spread) + ");" +
              detail.str()};
}

// ---------------------------------------------------------------------------
// 12. determinism

/// CSV text with the cpu_s column blanked.
inline std::string csv_without_cpu(const AggregateReport& agg) {
  std::ostringstream os;
  emit_csv({agg}, os);
  std::istringstream is(os.str());
  std::string line, out;
  const auto& cols = table_columns();
  const auto cpu = static_cast<std::size_t>(std::find(cols.begin(), cols.end(), "cpu_s") - cols.begin());
  while (std::getline(is, line)) {
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t i = 0; std::getline(ss, cell, ','); ++i) out += (i == cpu ? std::string("-") : cell) + ',';
    out += '\n';
  }
  return out;
}

inline CheckResult determinism() {
  std::vector<Config> cfgs;
  Config lr = logistic_reproduction_config();
  lr.set("algo", "vrsqn");
  lr.set("replications", "4");
  lr.set("budget", "2e4");
  cfgs.push_back(lr);
  Config mq = minquad_reproduction_config();
  mq.set("algo", "vrg");
  mq.set("replications", "4");
  mq.set("budget", "2e5");
  cfgs.push_back(mq);
  bool ok = true;
  std::ostringstream detail;
  for (Config& cfg : cfgs) {
    cfg.set("jobs", "1");
    const AggregateReport a = run_experiment(ExperimentSpec::from_config(cfg));
    cfg.set("jobs", "3");
    const AggregateReport b = run_experiment(ExperimentSpec::from_config(cfg));
    std::ostringstream pa, pb;
    emit_plot_data({a}, pa);
    emit_plot_data({b}, pb);
    const bool same = csv_without_cpu(a) == csv_without_cpu(b) && pa.str() == pb.str();
    ok = ok && same;
    detail << cfg.get_string("problem", "") << "/" << cfg.get_string("algo", "") << (same ? " identical; " : " DIFFERS; ");
  }
  return {12, "determinism under a fixed seed", ok, detail.str()};
}

// ---------------------------------------------------------------------------

/// Runs the selected criteria (all when empty) and reports each verdict.
inline std::vector<CheckResult> run_checks(const std::vector<int>& ids, std::size_t jobs,
                                           const std::function<void(const CheckResult&)>& on_result = {}) {
  auto wanted = [&](int id) { return ids.empty() || std::find(ids.begin(), ids.end(), id) != ids.end(); };
  std::vector<CheckResult> out;
  auto emit = [&](CheckResult r) {
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  };
  auto guarded = [&](int id, const std::string& name, const std::function<CheckResult()>& fn) {
    if (!wanted(id)) return;
    try {
      emit(fn());
    } catch (const std::exception& e) {
      emit({id, name, false, std::string("aborted: ") + e.what()});
    }
  };
  guarded(1, "estimator unbiasedness", [] { return estimator_unbiasedness(); });
  guarded(2, "second-moment bound and 1/N variance", [] { return moment_bound(); });
  guarded(3, "two-loop equals dense inverse", [] { return two_loop_correctness(); });
  guarded(4, "curvature condition on accepted pairs", [] { return curvature_condition(); });
  if (wanted(5) || wanted(6)) {
    try {
      const SpectrumStats st = instrumented_spectrum();
      if (wanted(5)) emit(eigenvalue_bounds(st));
      if (wanted(6)) emit(y_bound(st));
    } catch (const std::exception& e) {
      if (wanted(5)) emit({5, "eigenvalue bounds of H_k", false, std::string("aborted: ") + e.what()});
      if (wanted(6)) emit({6, "gradient-difference bound", false, std::string("aborted: ") + e.what()});
    }
  }
  guarded(7, "residual inequality and monotonicity in beta", [] { return residual_inequalities(); });
  guarded(8, "VRG rate shape", [&] { return vrg_rate(jobs); });
  guarded(9, "min-quadratics reproduction", [&] { return minquad_reproduction(jobs); });
  guarded(10, "logistic reproduction", [&] { return logistic_reproduction(jobs); });
  guarded(11, "infeasibility bound and linear scaling in eta", [&] { return infeasibility_scaling(jobs); });
  guarded(12, "determinism under a fixed seed", [] { return determinism(); });
  return out;
}

inline std::string format_result(const CheckResult& r) {
  std::ostringstream os;
  os << "criterion " << std::setw(2) << r.id << ": " << (r.passed ? "PASS" : "FAIL") << "  " << r.name << "  -- "
     << r.detail;
  return os.str();
}

}  // namespace zonsnc::verify
