#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "zonsnc/harness.hpp"

using namespace zonsnc;

namespace {

Config small_minquad(const std::string& algo = "vrg") {
  return Config::parse_string(
      "problem = minquad\n"
      "n = 4\n"
      "set = box\n"
      "x0 = 3\n"
      "eta = 0.1\n"
      "step.kind = constant\n"
      "step.gamma0 = 0.01\n"
      "batch.kind = affine\n"
      "batch.a = 0.01\n"
      "budget = 4000\n"
      "algo = " + algo + "\n");
}

ExperimentSpec spec_of(Config cfg, std::uint64_t reps, std::size_t jobs = 1) {
  cfg.set("replications", std::to_string(reps));
  cfg.set("jobs", std::to_string(jobs));
  return ExperimentSpec::from_config(std::move(cfg));
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

ReplicationResult fake_run(std::uint64_t index, double g) {
  ReplicationResult r;
  r.index = index;
  r.report.g_output = g;
  r.report.g_final = 2 * g;
  r.report.iterations = 10 + index;
  return r;
}

}  // namespace

// --- config ----------------------------------------------------------------

TEST(Config, ParsesCommentsQuotesAndOverrides) {
  const auto c = Config::parse_string("# header\n a = 1 # trailing\nb = \"two words\"\na = 5e6\nv = 1, 2 ,3\n");
  EXPECT_EQ(c.get_uint("a", 0), 5000000u);
  EXPECT_EQ(c.get_string("b", ""), "two words");
  EXPECT_EQ(c.get_vector("v", 3, 0.0), (Vector(3) << 1, 2, 3).finished());
  EXPECT_EQ(c.get_vector("missing", 2, 7.0), Vector::Constant(2, 7.0));
  EXPECT_EQ(c.get_double("missing", 0.5), 0.5);
  EXPECT_FALSE(c.has("missing"));
}

TEST(Config, Errors) {
  EXPECT_THROW(Config::parse_string("novalue\n"), ConfigError);
  EXPECT_THROW(Config::parse_string(" = 3\n"), ConfigError);
  const auto c = Config::parse_string("x = abc\ny = 1.5\nz = -2\nv = 1,2\n");
  EXPECT_THROW(c.get_double("x", 0), ConfigError);
  EXPECT_THROW(c.get_uint("y", 0), ConfigError);
  EXPECT_THROW(c.get_uint("z", 0), ConfigError);
  EXPECT_THROW(c.get_vector("v", 3, 0), ConfigError);
  EXPECT_THROW(Config::load("/nonexistent/zonsnc.cfg"), ConfigError);
}

TEST(Builders, SetsAndSchedules) {
  auto c = Config::parse_string("set = ball\nball.radius = 2\nball.center = 1\n");
  const auto ball = build_set(c, 3);
  EXPECT_NEAR(ball.project(Vector::Constant(3, 1.0) + Vector::Unit(3, 0) * 5).norm(), std::sqrt(11.0), 1e-12);
  EXPECT_EQ(build_set(Config::parse_string(""), 2).project(Vector::Constant(2, 9.0)), Vector::Constant(2, 9.0));
  EXPECT_THROW(build_set(Config::parse_string("set = simplex"), 2), ConfigError);

  const auto step = build_step(Config::parse_string("step.kind = sqrt_decay\nstep.gamma0 = 2\nstep.scale = 3"), 0.1);
  EXPECT_DOUBLE_EQ(step.value(8), 2.0 / std::sqrt(1.0 + 9.0 / 3.0));
  EXPECT_DOUBLE_EQ(build_step(Config::parse_string("step.kind = theory"), 0.125).value(100), 0.125);
  EXPECT_THROW(build_step(Config::parse_string("step.kind = wild"), 0.1), ConfigError);

  EXPECT_EQ(build_batch(Config::parse_string("batch.kind = affine\nbatch.a = 0.1"), 4, 1.0, 0.1).value(10), 3u);
  EXPECT_EQ(build_batch(Config::parse_string("batch.kind = constant\nbatch.N = 9"), 4, 1.0, 0.1).value(3), 9u);
  EXPECT_THROW(build_batch(Config::parse_string("batch.kind = nope"), 4, 1.0, 0.1), ConfigError);
}

TEST(Builders, ProblemDefaults) {
  const auto setup = build_problem(Config::parse_string("problem = minquad\nn = 3\nset = box\n"));
  const auto& mq = std::get<MinTwoQuadratics>(setup.problem);
  EXPECT_EQ(mq.dim(), 3);
  EXPECT_NEAR(mq.domain_radius(), 5.0 * std::sqrt(3.0) + 1.0, 1e-12);
  EXPECT_FALSE(setup.test_set.has_value());
  const auto lg = build_problem(Config::parse_string("problem = logistic\nS = 40\nn = 6\ntest_S = 30\n"));
  EXPECT_EQ(std::get<LogisticL1>(lg.problem).dim(), 6);
  ASSERT_TRUE(lg.test_set.has_value());
  EXPECT_THROW(build_problem(Config::parse_string("problem = rosenbrock")), ConfigError);
}

TEST(Builders, AlgorithmConfigs) {
  const auto c = Config::parse_string("eta = 0.2\nK = 50\nsqn.p = 3\nsqn.delta = theory\n");
  const auto v = build_vrg_config(c, 4, 2.0, 11);
  EXPECT_EQ(v.max_iterations, 50u);
  EXPECT_EQ(v.seed, 11u);
  const auto q = build_vrsqn_config(c, 4, 2.0, 11);
  EXPECT_EQ(q.memory, 3u);
  EXPECT_DOUBLE_EQ(q.delta, sqn_theory_delta(4, 2.0, 0.2));
  EXPECT_THROW(build_vrg_config(Config::parse_string("eta = 0.1"), 4, 2.0, 0), ConfigError);
  EXPECT_THROW(ExperimentSpec::from_config(Config::parse_string("algo = adam")), ConfigError);
  EXPECT_THROW(ExperimentSpec::from_config(Config::parse_string("replications = 0")), ConfigError);
}

// --- statistics ---------------------------------------------------------------

TEST(Summarize, SingleReplicationHasNoStandardError) {
  const auto s = summarize({3.5});
  EXPECT_EQ(s.mean, 3.5);
  EXPECT_FALSE(s.se.has_value());
  EXPECT_FALSE(summarize({}).se.has_value());
  const auto t = summarize({1.0, 3.0});
  EXPECT_EQ(t.mean, 2.0);
  EXPECT_DOUBLE_EQ(*t.se, 1.0);
}

TEST(Summarize, StandardErrorShrinksWithReplications) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(0.0, 1.0);
  double ratio_sum = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> small(40), large(80);
    for (auto& x : small) x = normal(rng);
    for (auto& x : large) x = normal(rng);
    ratio_sum += *summarize(large).se / *summarize(small).se;
  }
  EXPECT_NEAR(ratio_sum / 50.0, 1.0 / std::sqrt(2.0), 0.3 / std::sqrt(2.0));
}

TEST(Experiment, SingleReplicationReportsNoSe) {
  const auto agg = run_experiment(spec_of(small_minquad(), 1));
  EXPECT_EQ(agg.replications, 1u);
  EXPECT_FALSE(agg.g_output.se.has_value());
  std::ostringstream os;
  print_summary(agg, os);
  EXPECT_NE(os.str().find("se n/a"), std::string::npos);
}

TEST(Experiment, StandardErrorScalesWithReplications) {
  const auto a = run_experiment(spec_of(small_minquad(), 10));
  const auto b = run_experiment(spec_of(small_minquad(), 40));
  ASSERT_TRUE(a.g_final.se && b.g_final.se);
  EXPECT_NEAR(*b.g_final.se / *a.g_final.se, 0.5, 0.5 * 0.6);
}

TEST(Experiment, ThreadCountDoesNotChangeResults) {
  const auto a = run_experiment(spec_of(small_minquad("vrsqn"), 6, 1));
  const auto b = run_experiment(spec_of(small_minquad("vrsqn"), 6, 3));
  ASSERT_EQ(a.runs.size(), b.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    EXPECT_EQ(a.runs[i].seed, b.runs[i].seed);
    EXPECT_EQ(a.runs[i].report.x_final, b.runs[i].report.x_final);
  }
  EXPECT_EQ(a.g_output.mean, b.g_output.mean);
}

TEST(Aggregate, InvariantToOrderAndMarksFailures) {
  std::vector<ReplicationResult> runs;
  for (std::uint64_t i = 0; i < 7; ++i) runs.push_back(fake_run(i, 0.1 * (i + 1)));
  runs[3].failed = true;
  runs[3].error = "non-finite iterate";
  const auto base = aggregate(runs);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 5; ++t) {
    std::shuffle(runs.begin(), runs.end(), rng);
    const auto agg = aggregate(runs);
    EXPECT_EQ(agg.g_output.mean, base.g_output.mean);
    EXPECT_EQ(*agg.g_output.se, *base.g_output.se);
    EXPECT_EQ(agg.runs.front().index, 0u);
  }
  EXPECT_EQ(base.failures, 1u);
  EXPECT_EQ(base.replications, 6u);
  std::ostringstream os;
  print_summary(base, os);
  EXPECT_NE(os.str().find("replication 3 failed: non-finite iterate"), std::string::npos);
}

// --- CSV -------------------------------------------------------------------------

TEST(Csv, HeaderOnlyWhenEmpty) {
  std::ostringstream os;
  emit_csv({}, os);
  EXPECT_EQ(os.str(), "gamma_kind,a,G_R,G_K,f_K,cpu_s,infeas_K,kdamp,K,evals\n");
}

TEST(Csv, ShortestRoundTripFloats) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1e-300), "1e-300");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(Csv, TableShapedSweep) {
  std::vector<AggregateReport> rows;
  for (const char* kind : {"constant", "sqrt_decay"}) {
    for (const char* a : {"0.01", "0.1"}) {
      auto cfg = small_minquad();
      cfg.set("step.kind", kind);
      cfg.set("step.gamma0", "0.01");
      cfg.set("batch.a", a);
      rows.push_back(run_experiment(spec_of(cfg, 2)));
    }
  }
  std::ostringstream os;
  emit_csv(rows, os);
  const auto lines = lines_of(os.str());
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], "gamma_kind,a,G_R,G_K,f_K,cpu_s,infeas_K,kdamp,K,evals");
  EXPECT_EQ(lines[1].rfind("constant,0.01,", 0), 0u);
  EXPECT_EQ(lines[4].rfind("sqrt_decay,0.1,", 0), 0u);
  for (std::size_t i = 1; i < lines.size(); ++i) EXPECT_EQ(std::count(lines[i].begin(), lines[i].end(), ','), 9);
}

TEST(Csv, PlotDataFormat) {
  auto cfg = small_minquad();
  cfg.set("metric.cadence", "10");
  const auto agg = run_experiment(spec_of(cfg, 2));
  std::ostringstream os;
  emit_plot_data({agg}, os);
  const auto lines = lines_of(os.str());
  ASSERT_GT(lines.size(), 3u);
  EXPECT_EQ(lines[0], "algo,k,evals,metric,value");
  EXPECT_EQ(lines[1].rfind("vrg,0,0,stationarity_sq,", 0), 0u);
  EXPECT_EQ(lines[2].rfind("vrg,0,0,objective,", 0), 0u);
  EXPECT_EQ(lines[3].rfind("vrg,0,0,infeasibility,", 0), 0u);
  EXPECT_EQ((lines.size() - 1) % 3, 0u);
}

TEST(Csv, WriteFailureThrows) {
  EXPECT_THROW(emit_csv({}, std::string("/nonexistent-dir/out.csv")), std::runtime_error);
}

// --- comparison ------------------------------------------------------------------

TEST(Compare, IdenticalSpecsGiveUnitRatio) {
  const auto s = spec_of(small_minquad(), 3);
  const auto c = compare(s, s);
  std::ostringstream os;
  emit_comparison_csv(c, os);
  const auto lines = lines_of(os.str());
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0].rfind("algo,gamma_kind,", 0), 0u);
  EXPECT_EQ(lines[3].rfind("ratio,-,-,1,1,1,", 0), 0u);
}

TEST(Compare, RefusesMismatchedBudgetsOrProblems) {
  auto other = small_minquad();
  other.set("budget", "8000");
  EXPECT_THROW(compare(spec_of(small_minquad(), 1), spec_of(other, 1)), ConfigError);
  auto other_n = small_minquad();
  other_n.set("n", "5");
  EXPECT_THROW(compare(spec_of(small_minquad(), 1), spec_of(other_n, 1)), ConfigError);
}

TEST(Compare, VrgAgainstVrsqnSharesBudget) {
  const auto c = compare(spec_of(small_minquad("vrg"), 2), spec_of(small_minquad("vrsqn"), 2));
  EXPECT_EQ(c.first.algorithm, "vrg");
  EXPECT_EQ(c.second.algorithm, "vrsqn");
  EXPECT_LE(c.first.evals.mean, 4000.0);
  EXPECT_LE(c.second.evals.mean, 4000.0);
  EXPECT_GT(c.first.iterations.mean, c.second.iterations.mean);
}

TEST(Aggregate, DampingReportedAsFractionOfK) {
  std::vector<ReplicationResult> runs(2);
  runs[0].index = 0;
  runs[0].report.iterations = 100;
  runs[0].report.kdamp = 25;
  runs[1].index = 1;
  runs[1].report.iterations = 50;
  runs[1].report.kdamp = 25;
  const auto agg = aggregate(runs);
  EXPECT_DOUBLE_EQ(agg.kdamp.mean, 0.375);
  EXPECT_DOUBLE_EQ(agg.iterations.mean, 75.0);
}
