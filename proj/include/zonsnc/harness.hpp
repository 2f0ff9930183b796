#pragma once

// Replication runner, aggregation and CSV emission for the experiment CLI.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <thread>
#include <variant>

#include "config.hpp"
#include "vrg.hpp"
#include "vrsqn.hpp"

namespace zonsnc {

using AnyProblem = std::variant<MinTwoQuadratics, LogisticL1>;

struct ProblemSetup {
  AnyProblem problem;
  ConvexSet set;
  std::optional<LogisticDataset> test_set;
};

inline ConvexSet build_set(const Config& cfg, Eigen::Index n) {
  const std::string kind = cfg.get_string("set", "rn");
  if (kind == "rn") return ConvexSet::whole_space(n);
  if (kind == "box")
    return ConvexSet::box(cfg.get_vector("box.lower", n, -5.0), cfg.get_vector("box.upper", n, 5.0));
  if (kind == "ball")
    return ConvexSet::ball(cfg.get_vector("ball.center", n, 0.0), cfg.get_double("ball.radius", 1.0));
  throw ConfigError("set must be rn, box or ball (got '" + kind + "')");
}

/// Radius of a ball around the origin containing the set plus a unit margin.
inline double enclosing_radius(const ConvexSet& set, double fallback) {
  if (const auto* b = std::get_if<Box>(&set.variant()))
    return b->lower.cwiseAbs().cwiseMax(b->upper.cwiseAbs()).norm() + 1.0;
  if (const auto* b = std::get_if<Ball>(&set.variant())) return b->center.norm() + b->radius + 1.0;
  return fallback;
}

inline LogisticOptions logistic_options(const Config& cfg) {
  LogisticOptions opt;
  opt.samples = cfg.get_uint("S", 1000);
  opt.n = static_cast<Eigen::Index>(cfg.get_uint("n", 5));
  opt.informative_frac = cfg.get_double("informative_frac", 0.2);
  opt.lambda = cfg.get_double("lambda", 0.01);
  opt.class_mean = cfg.get_double("class_mean", 2.0);
  opt.seed = cfg.get_uint("data_seed", 1);
  return opt;
}

inline ProblemSetup build_problem(const Config& cfg) {
  const std::string kind = cfg.get_string("problem", "minquad");
  if (kind == "minquad") {
    const auto n = static_cast<Eigen::Index>(cfg.get_uint("n", 12));
    if (n < 1) throw ConfigError("n must be >= 1");
    ConvexSet set = build_set(cfg, n);
    const double radius =
        cfg.get_double("minquad.radius", enclosing_radius(set, 5.0 * std::sqrt(static_cast<double>(n)) + 1.0));
    return {MinTwoQuadratics(n, radius), std::move(set), std::nullopt};
  }
  if (kind == "logistic") {
    LogisticOptions opt = logistic_options(cfg);
    LogisticDataset train = cfg.has("dataset") ? read_dataset_csv(cfg.get_string("dataset", ""))
                                               : generate_logistic_dataset(opt);
    LogisticOptions test_opt = opt;
    test_opt.samples = cfg.get_uint("test_S", 1000);
    test_opt.seed = opt.seed + 1000003;
    LogisticL1 problem(std::move(train), opt.lambda);
    ConvexSet set = build_set(cfg, problem.dim());
    LogisticDataset test = generate_logistic_dataset(test_opt);
    if (test.feature_dim() != problem.dim() - 1) test = problem.dataset();
    return {std::move(problem), std::move(set), std::move(test)};
  }
  throw ConfigError("problem must be minquad or logistic (got '" + kind + "')");
}

inline StepSchedule build_step(const Config& cfg, double theory_gamma) {
  const std::string kind = cfg.get_string("step.kind", "constant");
  const double gamma0 = cfg.get_double("step.gamma0", kind == "constant" ? 0.01 : 1.0);
  const double scale = cfg.get_double("step.scale", 100.0);
  StepSchedule s;
  if (kind == "constant") s = StepSchedule::constant(gamma0);
  else if (kind == "theory") s = StepSchedule::constant(theory_gamma);
  else if (kind == "diminishing") s = StepSchedule::diminishing(gamma0);
  else if (kind == "sqrt_decay") s = StepSchedule::sqrt_decay(gamma0, scale);
  else if (kind == "linear_decay") s = StepSchedule::linear_decay(gamma0, scale);
  else throw ConfigError("unknown step.kind '" + kind + "'");
  s.validate();
  return s;
}

inline BatchSchedule build_batch(const Config& cfg, Eigen::Index n, double l0, double eta) {
  const std::string kind = cfg.get_string("batch.kind", "affine");
  const double a = cfg.get_double("batch.a", 0.01);
  BatchSchedule s;
  if (kind == "affine") s = BatchSchedule::affine(a);
  else if (kind == "linear") s = BatchSchedule::linear(a, n, l0);
  else if (kind == "sqrt") s = BatchSchedule::sqrt(a, n, l0);
  else if (kind == "poly") s = BatchSchedule::poly(cfg.get_double("batch.c", 1.0), cfg.get_double("batch.b", 0.1));
  else if (kind == "theory") s = BatchSchedule::sqn_theory(cfg.has("batch.a") ? a : 1.0, cfg.get_double("batch.b", 0.1), n, l0, eta);
  else if (kind == "constant") s = BatchSchedule::constant(cfg.get_uint("batch.N", 1));
  else throw ConfigError("unknown batch.kind '" + kind + "'");
  if (cfg.has("batch.max")) s.max_batch = cfg.get_uint("batch.max", 1);
  s.validate();
  return s;
}

inline MetricOptions build_metrics(const Config& cfg) {
  MetricOptions m;
  m.cadence = cfg.get_uint("metric.cadence", 0);
  m.samples = cfg.get_uint("metric.samples", 1000);
  const std::string g = cfg.get_string("metric.gradient", "auto");
  if (g == "auto") m.gradient = MetricGradient::Auto;
  else if (g == "estimate") m.gradient = MetricGradient::Estimate;
  else throw ConfigError("metric.gradient must be auto or estimate");
  if (m.samples < 1) throw ConfigError("metric.samples must be >= 1");
  return m;
}

inline std::optional<Vector> build_x0(const Config& cfg, Eigen::Index n) {
  if (!cfg.has("x0")) return std::nullopt;
  return cfg.get_vector("x0", n, 0.0);
}

inline VrgConfig build_vrg_config(const Config& cfg, Eigen::Index n, double l0, std::uint64_t seed) {
  VrgConfig c;
  c.eta = cfg.get_double("eta", 0.1);
  if (!(c.eta > 0)) throw ConfigError("eta must be > 0");
  c.step = build_step(cfg, vrg_default_step(c.eta, n, l0));
  c.batch = build_batch(cfg, n, l0, c.eta);
  c.budget = cfg.get_uint("budget", 0);
  c.max_iterations = cfg.get_uint("K", 0);
  if (c.budget == 0 && c.max_iterations == 0) throw ConfigError("set budget or K");
  c.lambda_window = cfg.get_double("lambda_window", 0.5);
  if (!(c.lambda_window >= 0 && c.lambda_window < 1)) throw ConfigError("lambda_window must lie in [0, 1)");
  c.seed = seed;
  c.x0 = build_x0(cfg, n);
  c.residual_beta = cfg.get_double("residual.beta", 0.0);
  c.metrics = build_metrics(cfg);
  return c;
}

inline VrsqnConfig build_vrsqn_config(const Config& cfg, Eigen::Index n, double l0, std::uint64_t seed) {
  VrsqnConfig c;
  c.eta = cfg.get_double("eta", 0.1);
  if (!(c.eta > 0)) throw ConfigError("eta must be > 0");
  const std::string delta = cfg.get_string("sqn.delta", "1");
  c.delta = delta == "theory" ? sqn_theory_delta(n, l0, c.eta) : cfg.get_double("sqn.delta", 1.0);
  if (!(c.delta > 0)) throw ConfigError("sqn.delta must be > 0");
  c.memory = cfg.get_uint("sqn.p", 5);
  if (c.memory < 1) throw ConfigError("sqn.p must be >= 1");
  c.step = build_step(cfg, vrg_default_step(c.eta, n, l0));
  c.batch = build_batch(cfg, n, l0, c.eta);
  c.budget = cfg.get_uint("budget", 0);
  c.max_iterations = cfg.get_uint("K", 0);
  if (c.budget == 0 && c.max_iterations == 0) throw ConfigError("set budget or K");
  c.seed = seed;
  c.x0 = build_x0(cfg, n);
  const std::string cold = cfg.get_string("sqn.cold_start", "scaled");
  if (cold == "scaled") c.cold_start = ColdStart::Scaled;
  else if (cold == "raw") c.cold_start = ColdStart::Raw;
  else throw ConfigError("sqn.cold_start must be scaled or raw");
  c.metrics = build_metrics(cfg);
  return c;
}

// ---------------------------------------------------------------------------

struct ExperimentSpec {
  Config config;
  std::string algorithm = "vrg";
  std::uint64_t replications = 20;
  std::uint64_t base_seed = 0;
  std::size_t jobs = 1;

  /// Reads algo / replications / seed / jobs from the config keys of the same name.
  static ExperimentSpec from_config(Config cfg) {
    ExperimentSpec s;
    s.algorithm = cfg.get_string("algo", "vrg");
    if (s.algorithm != "vrg" && s.algorithm != "vrsqn") throw ConfigError("algo must be vrg or vrsqn");
    s.replications = cfg.get_uint("replications", 20);
    if (s.replications < 1) throw ConfigError("replications must be >= 1");
    s.base_seed = cfg.get_uint("seed", 0);
    s.jobs = std::max<std::uint64_t>(1, cfg.get_uint("jobs", 1));
    s.config = std::move(cfg);
    return s;
  }
};

struct ReplicationResult {
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  RunReport report;
  std::optional<ClassificationMetrics> test_metrics;
};

/// Mean and standard error over replications; `se` is empty for R = 1.
struct Stat {
  double mean = 0.0;
  std::optional<double> se;
};

inline Stat summarize(const std::vector<double>& v) {
  Stat s;
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return s;
}

struct AggregateReport {
  std::string algorithm;
  std::string gamma_kind;
  double batch_a = 0.0;
  std::uint64_t budget = 0;
  std::size_t replications = 0;  // successful
  std::size_t failures = 0;
  Stat g_output, g_final, f_final, infeas_final, kdamp, iterations, evals, cpu_s;  // kdamp: damped fraction kdamp / K
  Stat accuracy, precision, recall;
  std::vector<ReplicationResult> runs;  // sorted by replication index
};

template <StochasticProblem P>
RunReport run_algorithm(const std::string& algo, const P& problem, const ConvexSet& set, const Config& cfg,
                        std::uint64_t seed, bool warn = true) {
  if (algo == "vrg") {
    VrgConfig c = build_vrg_config(cfg, problem.dim(), problem.lipschitz_l0(), seed);
    c.warn = warn;
    return vrg_run(problem, set, c);
  }
  if (algo == "vrsqn") {
    VrsqnConfig c = build_vrsqn_config(cfg, problem.dim(), problem.lipschitz_l0(), seed);
    c.warn = warn;
    return vrsqn_run(problem, set, c);
  }
  throw ConfigError("algo must be vrg or vrsqn");
}

/// Builds the aggregate from replication results in index order.
inline AggregateReport aggregate(std::vector<ReplicationResult> runs) {
  std::sort(runs.begin(), runs.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  AggregateReport agg;
  std::vector<double> gr, gk, fk, inf, kd, kk, ev, cpu, acc, prec, rec;
  for (const auto& r : runs) {
    if (r.failed) {
      ++agg.failures;
      continue;
    }
    ++agg.replications;
    gr.push_back(r.report.g_output);
    gk.push_back(r.report.g_final);
    fk.push_back(r.report.f_final);
    inf.push_back(r.report.infeas_final);
    kd.push_back(static_cast<double>(r.report.kdamp) / static_cast<double>(std::max<std::uint64_t>(1, r.report.iterations)));
    kk.push_back(static_cast<double>(r.report.iterations));
    ev.push_back(static_cast<double>(r.report.evals_used));
    cpu.push_back(r.report.cpu_s);
    if (r.test_metrics) {
      acc.push_back(r.test_metrics->accuracy);
      if (r.test_metrics->precision) prec.push_back(*r.test_metrics->precision);
      if (r.test_metrics->recall) rec.push_back(*r.test_metrics->recall);
    }
  }
  agg.g_output = summarize(gr);
  agg.g_final = summarize(gk);
  agg.f_final = summarize(fk);
  agg.infeas_final = summarize(inf);
  agg.kdamp = summarize(kd);
  agg.iterations = summarize(kk);
  agg.evals = summarize(ev);
  agg.cpu_s = summarize(cpu);
  agg.accuracy = summarize(acc);
  agg.precision = summarize(prec);
  agg.recall = summarize(rec);
  agg.runs = std::move(runs);
  return agg;
}

/// Runs R replications (seed = base_seed + r) on up to `jobs` threads.
inline AggregateReport run_experiment(const ExperimentSpec& spec) {
  const ProblemSetup setup = build_problem(spec.config);
  // Validate the algorithm configuration once, up front, so config errors surface as such.
  std::visit(
      [&](const auto& p) {
        if (spec.algorithm == "vrg") (void)build_vrg_config(spec.config, p.dim(), p.lipschitz_l0(), 0);
        else (void)build_vrsqn_config(spec.config, p.dim(), p.lipschitz_l0(), 0);
      },
      setup.problem);

  std::vector<ReplicationResult> runs(spec.replications);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::uint64_t r = next.fetch_add(1);
      if (r >= spec.replications) return;
      ReplicationResult& out = runs[r];
      out.index = r;
      out.seed = spec.base_seed + r;
      try {
        std::visit(
            [&](const auto& p) {
              out.report = run_algorithm(spec.algorithm, p, setup.set, spec.config, out.seed, r == 0);
              if constexpr (std::is_same_v<std::decay_t<decltype(p)>, LogisticL1>) {
                if (setup.test_set) out.test_metrics = classification_metrics(*setup.test_set, out.report.x_output);
              }
            },
            setup.problem);
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        out.failed = true;
        out.error = e.what();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(spec.jobs, spec.replications);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        try {
          worker();
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  AggregateReport agg = aggregate(std::move(runs));
  agg.algorithm = spec.algorithm;
  const auto l0 = std::visit([](const auto& p) { return p.lipschitz_l0(); }, setup.problem);
  const auto n = std::visit([](const auto& p) { return p.dim(); }, setup.problem);
  agg.gamma_kind = build_step(spec.config, vrg_default_step(spec.config.get_double("eta", 0.1), n, l0)).name();
  agg.batch_a = spec.config.get_double("batch.a", 0.01);
  agg.budget = spec.config.get_uint("budget", 0);
  return agg;
}

// ---------------------------------------------------------------------------
// CSV

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline const std::vector<std::string>& table_columns() {
  static const std::vector<std::string> cols{"gamma_kind", "a",       "G_R",     "G_K", "f_K",
                                             "cpu_s",      "infeas_K", "kdamp", "K",   "evals"};
  return cols;
}

inline void write_table_header(std::ostream& os) {
  const auto& cols = table_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
}

inline void write_table_row(std::ostream& os, const AggregateReport& r) {
  os << r.gamma_kind << ',' << format_double(r.batch_a) << ',' << format_double(r.g_output.mean) << ','
     << format_double(r.g_final.mean) << ',' << format_double(r.f_final.mean) << ','
     << format_double(r.cpu_s.mean) << ',' << format_double(r.infeas_final.mean) << ','
     << format_double(r.kdamp.mean) << ',' << format_double(r.iterations.mean) << ','
     << format_double(r.evals.mean) << '\n';
}

/// Header row plus one row per (step schedule, a) cell.
inline void emit_csv(const std::vector<AggregateReport>& rows, std::ostream& os) {
  write_table_header(os);
  for (const auto& r : rows) write_table_row(os, r);
}

inline void emit_csv(const std::vector<AggregateReport>& rows, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  emit_csv(rows, os);
  os.flush();
  if (!os) throw std::runtime_error("failed writing " + path);
}

/// Long-format convergence history: algo,k,evals,metric,value, averaged over
/// successful replications at each checkpoint.
inline void emit_plot_data(const std::vector<AggregateReport>& reports, std::ostream& os) {
  os << "algo,k,evals,metric,value\n";
  for (const auto& agg : reports) {
    std::vector<const RunReport*> ok;
    for (const auto& r : agg.runs)
      if (!r.failed) ok.push_back(&r.report);
    if (ok.empty()) continue;
    const std::size_t points = ok.front()->checkpoints.size();
    for (std::size_t i = 0; i < points; ++i) {
      double stat = 0.0, obj = 0.0, inf = 0.0, evals = 0.0;
      for (const auto* r : ok) {
        const auto& c = r->checkpoints.at(i);
        stat += c.stationarity * c.stationarity;
        obj += c.objective;
        inf += c.infeasibility;
        evals += static_cast<double>(c.evals);
      }
      const double m = static_cast<double>(ok.size());
      const auto k = ok.front()->checkpoints[i].k;
      const std::string prefix = agg.algorithm + ',' + std::to_string(k) + ',' + format_double(evals / m) + ',';
      os << prefix << "stationarity_sq," << format_double(stat / m) << '\n';
      os << prefix << "objective," << format_double(obj / m) << '\n';
      os << prefix << "infeasibility," << format_double(inf / m) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------

struct Comparison {
  AggregateReport first;
  AggregateReport second;
};

/// Runs both specs under a shared evaluation budget; mismatched budgets or
/// problems are refused.
inline Comparison compare(const ExperimentSpec& a, const ExperimentSpec& b) {
  const auto budget_a = a.config.get_uint("budget", 0);
  const auto budget_b = b.config.get_uint("budget", 0);
  if (budget_a != budget_b) throw ConfigError("compare: budgets differ");
  for (const char* key : {"problem", "n", "S", "lambda", "set", "data_seed"})
    if (a.config.get_string(key, "") != b.config.get_string(key, ""))
      throw ConfigError(std::string("compare: problem key '") + key + "' differs");
  return {run_experiment(a), run_experiment(b)};
}

inline double safe_ratio(double a, double b) { return b == 0.0 ? (a == 0.0 ? 1.0 : INFINITY) : a / b; }

/// Joint table: both rows, then a ratio row (first / second).
inline void emit_comparison_csv(const Comparison& c, std::ostream& os) {
  os << "algo,";
  write_table_header(os);
  os << c.first.algorithm << ',';
  write_table_row(os, c.first);
  os << c.second.algorithm << ',';
  write_table_row(os, c.second);
  os << "ratio,-,-," << format_double(safe_ratio(c.first.g_output.mean, c.second.g_output.mean)) << ','
     << format_double(safe_ratio(c.first.g_final.mean, c.second.g_final.mean)) << ','
     << format_double(safe_ratio(c.first.f_final.mean, c.second.f_final.mean)) << ','
     << format_double(safe_ratio(c.first.cpu_s.mean, c.second.cpu_s.mean)) << ','
     << format_double(safe_ratio(c.first.infeas_final.mean, c.second.infeas_final.mean)) << ','
     << format_double(safe_ratio(c.first.kdamp.mean, c.second.kdamp.mean)) << ','
     << format_double(safe_ratio(c.first.iterations.mean, c.second.iterations.mean)) << ','
     << format_double(safe_ratio(c.first.evals.mean, c.second.evals.mean)) << '\n';
}

inline std::string format_stat(const Stat& s) {
  std::ostringstream os;
  os << std::setprecision(4) << s.mean;
  if (s.se) os << " +- " << std::setprecision(2) << *s.se;
  else os << " (se n/a)";
  return os.str();
}

inline void print_summary(const AggregateReport& r, std::ostream& os) {
  os << r.algorithm << " [" << r.gamma_kind << ", a=" << r.batch_a << "] replications=" << r.replications
     << " failures=" << r.failures << '\n'
     << "  G_R      " << format_stat(r.g_output) << '\n'
     << "  G_K      " << format_stat(r.g_final) << '\n'
     << "  f_K      " << format_stat(r.f_final) << '\n'
     << "  infeas_K " << format_stat(r.infeas_final) << '\n'
     << "  kdamp/K  " << format_stat(r.kdamp) << '\n'
     << "  K        " << format_stat(r.iterations) << '\n'
     << "  evals    " << format_stat(r.evals) << '\n'
     << "  cpu_s    " << format_stat(r.cpu_s) << '\n';
  if (!r.runs.empty() && r.runs.front().test_metrics) {
    os << "  accuracy  " << format_stat(r.accuracy) << '\n'
       << "  precision " << format_stat(r.precision) << '\n'
       << "  recall    " << format_stat(r.recall) << '\n';
  }
  for (const auto& run : r.runs)
    if (run.failed) os << "  replication " << run.index << " failed: " << run.error << '\n';
}

}  // namespace zonsnc
