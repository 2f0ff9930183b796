#include <gtest/gtest.h>

#include "test_problems_fixtures.hpp"
#include "zonsnc/vrsqn.hpp"

using namespace zonsnc;
using zonsnc::testing::ClogCapture;

namespace {

VrsqnConfig minquad_cfg(std::uint64_t seed) {
  VrsqnConfig c;
  c.eta = 0.1;
  c.delta = 1.0;
  c.memory = 5;
  c.step = StepSchedule::constant(0.01);
  c.batch = BatchSchedule::affine(0.01);
  c.budget = 40000;
  c.seed = seed;
  c.x0 = Vector::Constant(4, 3.0);
  c.warn = false;
  return c;
}

}  // namespace

TEST(InfeasibilityBound, Examples) {
  EXPECT_NEAR(infeasibility_bound(5, 1.0, 0.1, 0.0), 1.416, 5e-4);
  EXPECT_NEAR(infeasibility_bound(5, 1.0, 0.1, 2.0) - infeasibility_bound(5, 1.0, 0.1, 0.0), 0.2, 1e-12);
  EXPECT_NEAR(infeasibility_bound(5, 1.0, 0.2, 0.0) / infeasibility_bound(5, 1.0, 0.1, 0.0), 2.0, 1e-12);
  EXPECT_THROW(infeasibility_bound(5, 1.0, 0.0, 0.0), ConfigError);
  EXPECT_THROW(infeasibility_bound(5, 1.0, 0.1, -1.0), ConfigError);
}

TEST(Vrsqn, TheoryDelta) { EXPECT_DOUBLE_EQ(sqn_theory_delta(4, 2.0, 0.5), 64.0); }

TEST(Vrsqn, ConstantObjectiveLeavesStartFixed) {
  const ConstantProblem p(3, 3.0);
  const auto set = ConvexSet::box(3, -1.0, 1.0);
  VrsqnConfig c;
  c.max_iterations = 40;
  c.x0 = Vector::Constant(3, 0.25);
  c.warn = false;
  const auto r = vrsqn_run(p, set, c);
  EXPECT_EQ(r.x_final, *c.x0);
  EXPECT_EQ(r.skipped_pairs, 40u);
  EXPECT_EQ(r.kdamp, 0u);
}

TEST(Vrsqn, DecreasesObjectiveAndStationarity) {
  const MinTwoQuadratics p(4, 6.0);
  const auto set = ConvexSet::box(4, -5.0, 5.0);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto r = vrsqn_run(p, set, minquad_cfg(seed));
    const auto& first = r.checkpoints.front();
    EXPECT_LT(r.f_final, first.objective);
    EXPECT_LT(r.g_final, 0.01 * first.stationarity * first.stationarity);
    EXPECT_LE(r.kdamp, r.iterations);
  }
}

TEST(Vrsqn, BudgetAccounting) {
  const MinTwoQuadratics p(4, 6.0);
  const auto set = ConvexSet::box(4, -5.0, 5.0);
  for (std::uint64_t budget : {1000u, 40000u, 99999u}) {
    auto c = minquad_cfg(1);
    c.budget = budget;
    const auto r = vrsqn_run(p, set, c);
    EXPECT_LE(r.evals_used, budget);
    EXPECT_GT(r.evals_used + 4 * c.batch.value(r.iterations), budget);
    EXPECT_EQ(r.evals_used, 4 * r.batch_total);
  }
}

TEST(Vrsqn, DeterministicPerSeed) {
  const MinTwoQuadratics p(4, 6.0);
  const auto set = ConvexSet::box(4, -5.0, 5.0);
  const auto a = vrsqn_run(p, set, minquad_cfg(9));
  const auto b = vrsqn_run(p, set, minquad_cfg(9));
  const auto c = vrsqn_run(p, set, minquad_cfg(10));
  EXPECT_EQ(a.x_final, b.x_final);
  EXPECT_EQ(a.kdamp, b.kdamp);
  EXPECT_EQ(a.output_index, b.output_index);
  EXPECT_NE(a.x_final, c.x_final);
}

TEST(Vrsqn, ObserverSeesConsistentMemory) {
  const MinTwoQuadratics p(4, 6.0);
  const auto set = ConvexSet::box(4, -5.0, 5.0);
  auto c = minquad_cfg(4);
  c.budget = 0;
  c.max_iterations = 300;
  c.memory = 3;
  std::uint64_t calls = 0, damped = 0;
  const auto r = vrsqn_run(p, set, c, [&](const SqnIteration& it) {
    EXPECT_EQ(it.k, calls);
    ++calls;
    EXPECT_LE(it.memory.size(), 3u);
    EXPECT_GE(it.nu_next, c.delta);
    if (it.triple) {
      EXPECT_GT(it.triple->s.dot(it.triple->ybar), 0.0);
      EXPECT_GE(it.triple->s.dot(it.triple->ybar), 0.25 * it.nu_next * it.s.squaredNorm() * (1 - 1e-12));
      EXPECT_EQ(it.memory.nu(), it.nu_next);
      damped += it.triple->phi < 1.0;
    }
  });
  EXPECT_EQ(calls, 300u);
  EXPECT_EQ(damped, r.kdamp);
}

TEST(Vrsqn, ColdStartScaling) {
  Vector cvec(3);
  cvec << 1.0, 2.0, -1.0;
  const LinearProblem p(cvec);
  const auto set = ConvexSet::whole_space(3);
  VrsqnConfig c;
  c.delta = 50.0;
  c.max_iterations = 1;
  c.x0 = Vector::Zero(3);
  c.warn = false;
  c.cold_start = ColdStart::Raw;
  const double raw = vrsqn_run(p, set, c).x_final.norm();
  c.cold_start = ColdStart::Scaled;
  const double scaled = vrsqn_run(p, set, c).x_final.norm();
  ASSERT_GT(scaled, 0.0);
  EXPECT_NEAR(raw / scaled, 50.0, 1e-9);
}

TEST(Vrsqn, PenaltyPullsTowardSet) {
  // unconstrained iterates: infeasibility shrinks under the Moreau penalty
  const ConstantProblem p(2, 3.0);
  const auto set = ConvexSet::ball(Vector::Zero(2), 1.0);
  VrsqnConfig c;
  c.eta = 0.5;
  c.step = StepSchedule::constant(0.1);
  c.max_iterations = 200;
  c.x0 = Vector::Constant(2, 3.0);
  c.warn = false;
  const auto r = vrsqn_run(p, set, c);
  EXPECT_GT(r.checkpoints.front().infeasibility, 3.0);
  EXPECT_LT(r.infeas_final, 1e-3);
  EXPECT_LE(r.infeas_final, infeasibility_bound(2, p.lipschitz_l0(), c.eta, 0.0));
}

TEST(Vrsqn, DeltaWarning) {
  const ConstantProblem p(2, 3.0);
  const auto set = ConvexSet::whole_space(2);
  VrsqnConfig c;
  c.max_iterations = 2;
  c.delta = 1000.0;
  {
    ClogCapture capture;
    vrsqn_run(p, set, c);
    EXPECT_NE(capture.text().find("delta * eta^2"), std::string::npos);
  }
  {
    ClogCapture capture;
    c.warn = false;
    vrsqn_run(p, set, c);
    EXPECT_TRUE(capture.text().empty());
  }
}

TEST(Vrsqn, ConfigErrors) {
  const MinTwoQuadratics p(4, 6.0);
  const auto set = ConvexSet::box(4, -5.0, 5.0);
  auto c = minquad_cfg(1);
  EXPECT_THROW(vrsqn_run(p, ConvexSet::whole_space(2), c), DimensionError);
  c.delta = 0.0;
  EXPECT_THROW(vrsqn_run(p, set, c), ConfigError);
  c.delta = 1.0;
  c.memory = 0;
  EXPECT_THROW(vrsqn_run(p, set, c), ConfigError);
  c.memory = 2;
  c.budget = 5;
  EXPECT_THROW(vrsqn_run(p, set, c), ConfigError);
}
