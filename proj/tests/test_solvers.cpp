#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "samom/errors.hpp"
#include "samom/kernels.hpp"
#include "samom/solvers.hpp"

using namespace samom;

namespace {

ProblemInstance toy(ProblemKind kind, double a, double b, double lambda = 0.0) {
  ProblemInstance inst;
  inst.kind = kind;
  inst.m = 1;
  inst.n = 1;
  inst.a = {a};
  inst.b = {b};
  inst.lambda = lambda;
  inst.reference = std::vector<double>{b / a};
  return inst;
}

SolverState state_at(double v_prev, double v_curr) {
  return SolverState({v_prev}, {v_curr}, Rng(1));
}

struct BackendGuard {
  kernels::Backend saved = kernels::active_backend();
  ~BackendGuard() { kernels::set_backend(saved); }
};

}  // namespace

TEST(Extrapolate, Examples) {
  const std::vector<double> v = {2.0, -1.0};
  const std::vector<double> w = {1.0, 3.0};
  EXPECT_EQ(extrapolate(v, w, 0.0), v);
  EXPECT_EQ(extrapolate(v, v, 0.7), v);
  EXPECT_EQ(extrapolate(std::vector<double>{2.0}, std::vector<double>{1.0}, 0.5)[0], 2.5);
  EXPECT_THROW(extrapolate(v, std::vector<double>{1.0}, 0.5), ArgumentError);
  EXPECT_THROW(extrapolate(v, w, 1.0), DomainError);
}

TEST(SsgdStep, ToyInstance) {
  const auto inst = toy(ProblemKind::least_squares, 1.0, 0.0);
  auto s = state_at(1.0, 1.0);
  ssgd_step(s, inst, 0.1, 0.5, ConstraintSet::whole_space());
  EXPECT_NEAR(s.v_curr[0], 0.8, 1e-15);
  EXPECT_EQ(s.v_prev[0], 1.0);
  EXPECT_EQ(s.k, 1);
}

TEST(SsgdStep, FixedPointAtOptimum) {
  const auto inst = generate(ProblemKind::least_squares, 20, 3, 1);
  const auto& ref = *inst.reference;
  SolverState s(ref, ref, Rng(2));
  for (int i = 0; i < 10; ++i) ssgd_step(s, inst, 0.01, 0.5, ConstraintSet::whole_space());
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(s.v_curr[j], ref[j], 1e-12);
}

TEST(SsgdStep, DivergenceLeavesStateUnshifted) {
  const auto inst = toy(ProblemKind::least_squares, 1e200, 0.0);
  auto s = state_at(1.0, 1.0);
  try {
    ssgd_step(s, inst, 1.0, 0.0, ConstraintSet::whole_space());
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.step(), 1);
    EXPECT_EQ(e.last_finite_step(), 0);
  }
  EXPECT_EQ(s.k, 0);
  EXPECT_EQ(s.v_curr[0], 1.0);
}

TEST(ProxRmStep, Examples) {
  const auto lad = toy(ProblemKind::least_absolute, 1.0, 0.0);
  auto s = state_at(1.0, 1.0);
  prox_rm_step(s, lad, 10.0, 0.3);
  EXPECT_EQ(s.v_curr[0], 0.0);

  const auto inst = generate(ProblemKind::least_absolute, 20, 3, 1);
  SolverState t(*inst.reference, *inst.reference, Rng(3));
  prox_rm_step(t, inst, 0.5, 0.5);
  EXPECT_EQ(t.v_curr, *inst.reference);
}

TEST(ProxRmStep, NeverWorseThanStaying) {
  const auto inst = generate(ProblemKind::least_squares, 30, 4, 2);
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> a(4), b(4);
    for (auto& e : a) e = rng.normal();
    for (auto& e : b) e = rng.normal();
    SolverState s(a, b, Rng(t));
    Rng peek(t);
    const std::size_t i = sample_index(inst, peek);
    prox_rm_step(s, inst, 0.05, 0.4);
    const auto& x = s.x;
    const double at_next =
        sample_value(inst, s.v_curr, i) + kernels::squared_distance(s.v_curr, x) / 0.1;
    EXPECT_LE(at_next, sample_value(inst, x, i) + 1e-12);
  }
}

TEST(CompositeStep, ToyOrders) {
  const auto inst = toy(ProblemKind::lasso, 1.0, 0.0, 1.0);
  auto s = state_at(1.0, 1.0);
  composite_step(s, inst, 0.1, 0.0, CompositeOrder::explicit_first);
  EXPECT_NEAR(s.v_curr[0], 0.7, 1e-15);
  auto t = state_at(1.0, 1.0);
  composite_step(t, inst, 0.1, 0.0, CompositeOrder::implicit_first);
  EXPECT_NEAR(t.v_curr[0], 5.0 / 6.0 - 0.1, 1e-15);
  EXPECT_THROW(composite_step(t, toy(ProblemKind::least_squares, 1, 0), 0.1, 0.0,
                              CompositeOrder::explicit_first),
               ArgumentError);
}

TEST(CompositeStep, ZeroLambdaReducesToSingleStage) {
  auto inst = generate(ProblemKind::lasso, 20, 3, 3, 0.0);
  auto lsq = inst;
  lsq.kind = ProblemKind::least_squares;
  const std::vector<double> a = {0.3, -1.0, 2.0};
  const std::vector<double> b = {0.1, 0.2, -0.4};
  SolverState c1(a, b, Rng(5)), s1(a, b, Rng(5));
  composite_step(c1, inst, 0.01, 0.5, CompositeOrder::explicit_first);
  ssgd_step(s1, lsq, 0.01, 0.5, ConstraintSet::whole_space());
  EXPECT_EQ(c1.v_curr, s1.v_curr);
  SolverState c2(a, b, Rng(5)), p2(a, b, Rng(5));
  composite_step(c2, inst, 0.01, 0.5, CompositeOrder::implicit_first);
  prox_rm_step(p2, lsq, 0.01, 0.5);
  EXPECT_EQ(c2.v_curr, p2.v_curr);
}

TEST(CheckpointSchedule, Geometric) {
  const auto ks = checkpoint_schedule(1000, 1.1);
  EXPECT_GE(ks.size(), 50u);
  EXPECT_EQ(ks.front(), 1);
  EXPECT_EQ(ks[1], 2);
  EXPECT_EQ(ks.back(), 1000);
  for (std::size_t i = 1; i < ks.size(); ++i) EXPECT_GT(ks[i], ks[i - 1]);
  EXPECT_EQ(checkpoint_schedule(2, 1.1), (std::vector<std::int64_t>{1, 2}));
  EXPECT_THROW(checkpoint_schedule(10, 1.0), ArgumentError);
}

TEST(SolverConfig, Validation) {
  SolverConfig c;
  c.iterations = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c.iterations = 10;
  c.checkpoint_ratio = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.checkpoint_ratio = 1.1;
  c.method = Method::prox_rm;
  c.constraint = ConstraintSet::ball({0.0}, 1.0);
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(parse_method("adam"), ConfigError);
  EXPECT_EQ(parse_method("prox_rm"), Method::prox_rm);
}

TEST(Run, ShortRunAndMetadata) {
  const auto inst = generate(ProblemKind::least_squares, 50, 4, 1);
  SolverConfig c;
  c.step = StepSchedule::power(1.0 / 16, 3, 8.0 / 9);
  c.momentum = MomentumSchedule::constant(0.5);
  c.iterations = 2;
  const auto t = run(c, inst);
  ASSERT_EQ(t.checkpoints.size(), 2u);
  EXPECT_EQ(t.checkpoints.back().k, 2);
  EXPECT_EQ(t.meta("method"), "ssgd");
  EXPECT_EQ(t.meta("rng"), std::string(Rng::kName));
  EXPECT_EQ(t.meta("step_square_summable"), "true");
  EXPECT_EQ(t.meta("momentum_constant"), "true");
  EXPECT_FALSE(t.meta("hypotheses").empty());

  auto noref = inst;
  noref.reference.reset();
  EXPECT_THROW(run(c, noref), ArgumentError);
}

TEST(Run, Deterministic) {
  const auto inst = generate(ProblemKind::least_absolute, 100, 5, 2);
  SolverConfig c;
  c.method = Method::prox_rm;
  c.step = StepSchedule::power(0.25, 3, 8.0 / 9);
  c.momentum = MomentumSchedule::constant(0.9);
  c.iterations = 3000;
  c.seed = 17;
  const auto a = run(c, inst);
  const auto b = run(c, inst);
  ASSERT_EQ(a.checkpoints.size(), b.checkpoints.size());
  for (std::size_t i = 0; i < a.checkpoints.size(); ++i) {
    EXPECT_EQ(a.checkpoints[i].dist, b.checkpoints[i].dist);
    EXPECT_EQ(a.checkpoints[i].obj_gap, b.checkpoints[i].obj_gap);
  }
}

// theta = 0 must reproduce plain SGD v <- v - alpha g(v, i) exactly, with the
// same initial point and index stream.
TEST(Run, ZeroMomentumIsPlainSgd) {
  BackendGuard guard;
  kernels::set_backend(kernels::Backend::scalar);
  const auto inst = generate(ProblemKind::least_squares, 200, 6, 3);
  SolverConfig c;
  c.step = StepSchedule::power(1.0 / 16, 3, 8.0 / 9);
  c.momentum = MomentumSchedule::constant(0.0);
  c.iterations = 500;
  c.seed = 4;
  std::vector<std::vector<double>> seen;
  run(c, inst, [&](const StepEvent& e) { seen.emplace_back(e.v_next.begin(), e.v_next.end()); });

  Rng init = Rng::derive(4, {1});
  std::vector<double> v(6);
  for (double& e : v) e = init.normal();
  Rng sampler = Rng::derive(4, {2});
  std::vector<double> g(6);
  for (std::int64_t k = 1; k <= 500; ++k) {
    const std::size_t i = sample_index(inst, sampler);
    const double r = inst.residual(v, i);
    for (std::size_t j = 0; j < 6; ++j) g[j] = 2.0 * r * inst.a[i * 6 + j];
    const double alpha = step_at(c.step, k);
    for (std::size_t j = 0; j < 6; ++j) v[j] += -alpha * g[j];
    ASSERT_EQ(v, seen[static_cast<std::size_t>(k - 1)]) << "step " << k;
  }
}

TEST(Run, ConstraintFeasibility) {
  const auto inst = generate(ProblemKind::least_squares, 100, 4, 5);
  for (const auto& con : {ConstraintSet::ball(std::vector<double>(4, 0.0), 0.5),
                          ConstraintSet::box(-0.2, 0.3, 4)}) {
    SolverConfig c;
    c.step = StepSchedule::power(1.0 / 16, 3, 8.0 / 9);
    c.momentum = MomentumSchedule::constant(0.9);
    c.constraint = con;
    c.iterations = 2000;
    bool ok = true;
    run(c, inst, [&](const StepEvent& e) { ok = ok && con.contains(e.v_next, 1e-12); });
    EXPECT_TRUE(ok) << con.describe();
  }
}

TEST(Run, DivergenceFlagged) {
  const auto inst = generate(ProblemKind::least_squares, 100, 4, 5);
  SolverConfig c;
  c.step = StepSchedule::constant(5.0);
  c.iterations = 5000;
  const auto t = run(c, inst);
  EXPECT_TRUE(t.diverged);
  EXPECT_GT(t.divergence_step, 0);
  EXPECT_LT(t.last_finite_step, t.divergence_step);
  for (const auto& cp : t.checkpoints) {
    EXPECT_TRUE(std::isfinite(cp.dist));
    EXPECT_LT(cp.k, t.divergence_step);
  }
}

TEST(Run, FiniteTraces) {
  for (auto m : {Method::ssgd, Method::prox_rm}) {
    const auto inst = generate(ProblemKind::least_absolute, 300, 8, 6);
    SolverConfig c;
    c.method = m;
    c.step = StepSchedule::power(0.25, 3, 8.0 / 9);
    c.momentum = MomentumSchedule::harmonic(3);
    c.iterations = 2000;
    const auto t = run(c, inst);
    ASSERT_FALSE(t.diverged);
    for (const auto& cp : t.checkpoints) {
      EXPECT_TRUE(std::isfinite(cp.dist) && std::isfinite(cp.obj_gap) &&
                  std::isfinite(cp.increment));
    }
    EXPECT_EQ(t.meta("momentum_constant"), "false");
    EXPECT_EQ(t.meta("momentum_nonincreasing"), "true");
  }
}

TEST(Run, ExtrapolationIdentity) {
  const auto inst = generate(ProblemKind::least_squares, 100, 5, 1);
  SolverConfig c;
  c.step = StepSchedule::power(1.0 / 16, 3, 8.0 / 9);
  c.momentum = MomentumSchedule::constant(0.9);
  c.iterations = 300;
  double worst = 0.0;
  run(c, inst, [&](const StepEvent& e) {
    const double lhs = kernels::distance(e.x, e.v_curr);
    const double rhs = e.theta * kernels::distance(e.v_curr, e.v_prev);
    if (rhs > 0.0) worst = std::max(worst, std::abs(lhs - rhs) / rhs);
  });
  EXPECT_LT(worst, 1e-10);
}
