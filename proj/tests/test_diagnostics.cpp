#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "samom/diagnostics.hpp"
#include "samom/errors.hpp"

using namespace samom;
using namespace samom::diagnostics;

TEST(PairSeries, FromTrace) {
  ProblemInstance inst;
  inst.n = 1;
  inst.reference = std::vector<double>{0.0};
  SolverTrace t;
  // iterates (0), (1), (1)
  t.checkpoints.push_back({1, 0.0, 0.0, 0.0, 0.1, 0.5});
  t.checkpoints.push_back({2, 1.0, 0.0, 1.0, 0.1, 0.5});
  t.checkpoints.push_back({3, 1.0, 0.0, 0.0, 0.1, 0.5});
  const auto ps = pair_series_from_trace(t, inst);
  EXPECT_EQ(ps.r, (std::vector<double>{0.0, 1.0, 1.0}));
  EXPECT_EQ(ps.z[1], 1.0);
  EXPECT_EQ(ps.z[2], 0.0);
  EXPECT_EQ(ps.thetas.size(), 3u);

  auto noref = inst;
  noref.reference.reset();
  EXPECT_THROW(pair_series_from_trace(t, noref), ConfigError);
  t.diverged = true;
  EXPECT_THROW(pair_series_from_trace(t, inst), ArgumentError);
}

TEST(BetaSequence, Tails) {
  const auto g = BetaSequence::geometric(1.0, 0.5);
  EXPECT_NEAR(g.tail(1), 1.0, 1e-15);
  EXPECT_NEAR(g.tail(3), 0.25, 1e-15);
  const auto p = BetaSequence::power(2.0, 2.5);
  EXPECT_NEAR(p.tail(7), 2.0 * 0.0400817579336607, 1e-14);
  EXPECT_EQ(BetaSequence::none().tail(4), 0.0);
  EXPECT_THROW(BetaSequence::geometric(1.0, 1.0), DomainError);
  EXPECT_THROW(BetaSequence::power(1.0, 1.0), DomainError);
  EXPECT_THROW(BetaSequence::geometric(-1.0, 0.5), DomainError);
}

TEST(HurwitzZeta, AgainstDirectSum) {
  EXPECT_NEAR(hurwitz_zeta(2.5, 7.0), 0.0400817579336607, 1e-15);
  EXPECT_NEAR(hurwitz_zeta(2.0, 1.0), M_PI * M_PI / 6.0, 1e-14);
  for (double s : {1.5, 2.0, 3.7}) {
    for (double a : {1.0, 2.5, 40.0}) {
      const double o = oracle::hurwitz_direct(s, a);
      EXPECT_NEAR(hurwitz_zeta(s, a), o, 1e-10 * o) << s << " " << a;
    }
  }
}

TEST(Lyapunov, Examples) {
  const algebra::TailCoefficients t(MomentumSchedule::constant(0.5), 10);
  const std::vector<double> c(5, 3.0);
  for (double v : lyapunov(c, t).V) EXPECT_NEAR(v, 3.0, 1e-14);
  const std::vector<double> r = {1.0, 0.5};
  EXPECT_NEAR(lyapunov(r, t).V.at(0), 0.0, 1e-15);
  const auto g = lyapunov(c, t, BetaSequence::geometric(1.0, 0.5));
  EXPECT_NEAR(g.V.at(0), 3.0 + 2.0, 1e-14);
  const std::vector<double> longer(12, 1.0);
  EXPECT_THROW(lyapunov(longer, t), ArgumentError);
  EXPECT_THROW(lyapunov(c, t, {0.7, 0.7}, BetaSequence::none()), DomainError);
}

TEST(Lyapunov, MatchesMatrixForm) {
  Rng rng(3);
  const MomentumSchedule s = MomentumSchedule::harmonic(2);
  const algebra::TailCoefficients t(s, 60);
  const auto beta = BetaSequence::power(0.3, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> r(50);
    for (double& e : r) e = rng.uniform(0.0, 5.0);
    const double p1 = rng.uniform(0.05, 0.95);
    const auto L = lyapunov(r, t, {p1, 1.0 - p1}, beta);
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
      const auto n = static_cast<std::int64_t>(i + 1);
      const algebra::Mat2 q = algebra::tail_product(t, n).entries;
      const double rq0 = r[i] * q(0, 0) + r[i + 1] * q(1, 0);
      const double rq1 = r[i] * q(0, 1) + r[i + 1] * q(1, 1);
      const double expect = rq0 * p1 + rq1 * (1.0 - p1) + 2.0 * beta.tail(n);
      EXPECT_NEAR(L.V[i], expect, 1e-10);
    }
  }
}

TEST(Lyapunov, ConstantMomentumClosedForm) {
  Rng rng(4);
  for (double th : {0.2, 0.5, 0.9}) {
    const algebra::TailCoefficients t(MomentumSchedule::constant(th), 40);
    std::vector<double> r(30);
    for (double& e : r) e = rng.uniform(0.0, 2.0);
    const auto L = lyapunov(r, t);
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
      EXPECT_NEAR(L.V[i], (r[i + 1] - th * r[i]) / (1.0 - th), 1e-10);
    }
  }
}

TEST(ProxLyapunov, Examples) {
  const std::vector<double> r = {1.0, 1.0};
  const std::vector<double> a = {0.5, 0.25};
  const std::vector<double> eta = {0.0, 2.0};
  const auto V = prox_lyapunov(r, a, eta);
  EXPECT_EQ(V[0], 1.0);
  EXPECT_EQ(V[1], 2.0);
  EXPECT_EQ(prox_lyapunov(r, a, std::vector<double>(2, 0.0)), r);
  const std::vector<double> z(3, 0.0);
  EXPECT_EQ(prox_lyapunov(z, std::vector<double>{1.0, 1.0, 1.0}, z), z);
  EXPECT_THROW(prox_lyapunov(r, std::vector<double>{0.25, 0.5}, eta), ArgumentError);
  EXPECT_THROW(prox_lyapunov(r, a, std::vector<double>{1.0}), ArgumentError);
}

TEST(Relay, Examples) {
  const std::vector<double> th(60, 0.5);
  std::vector<double> v(60, 4.0);
  const auto r = relay(th, v, 10.0);
  EXPECT_NEAR(r.back(), 4.0, 1e-12);
  const auto flat = relay(std::vector<double>(60, 0.0), v, 7.0);
  for (double x : flat) EXPECT_EQ(x, 7.0);
  for (std::size_t n = 0; n < v.size(); ++n) v[n] = 3.0 + std::ldexp(1.0, -static_cast<int>(n + 1));
  const auto s = relay(th, v, 10.0);
  EXPECT_LT(std::abs(s[39] - 3.0), 1e-6);
}

TEST(Relay, ConvergesToDriverLimit) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> th(5000), v(5000);
    const double vinf = rng.uniform(0.0, 10.0);
    for (std::size_t n = 0; n < th.size(); ++n) {
      th[n] = rng.uniform(0.1, 0.9);
      v[n] = vinf + rng.uniform(-1.0, 1.0) / std::pow(static_cast<double>(n + 1), 2.0);
    }
    const auto r = relay(th, v, rng.uniform(0.0, 100.0));
    EXPECT_TRUE(convergence_check(r, 500, 1e-4));
    EXPECT_NEAR(r.back(), vinf, 1e-4);
  }
}

TEST(ConvergenceCheck, Examples) {
  EXPECT_TRUE(convergence_check(std::vector<double>(10, 2.0), 5, 1e-12));
  std::vector<double> lin(200), geo(200);
  for (std::size_t i = 0; i < 200; ++i) {
    lin[i] = static_cast<double>(i);
    geo[i] = 1.0 + std::pow(0.9, static_cast<double>(i + 1));
  }
  EXPECT_FALSE(convergence_check(lin, 100, 1e-3));
  EXPECT_TRUE(convergence_check(geo, 100, 1e-3));
  EXPECT_THROW(convergence_check(geo, 1, 1e-3), ArgumentError);
  EXPECT_THROW(convergence_check(geo, 201, 1e-3), ArgumentError);
  geo[199] = std::nan("");
  EXPECT_FALSE(convergence_check(geo, 100, 1e-3));
}

TEST(SummabilityCheck, Examples) {
  std::vector<double> half(200), harm(100000);
  for (std::size_t k = 0; k < half.size(); ++k) half[k] = std::ldexp(1.0, -static_cast<int>(k + 1));
  for (std::size_t k = 0; k < harm.size(); ++k) harm[k] = 1.0 / static_cast<double>(k + 1);
  EXPECT_TRUE(summability_check(half, 1e-3));
  EXPECT_FALSE(summability_check(harm, 1e-3));
  EXPECT_TRUE(summability_check(std::vector<double>(100, 0.0), 1e-3));
  // the increase over the last decade is ln 10
  double inc = 0.0;
  for (std::size_t k = 10000; k < harm.size(); ++k) inc += harm[k];
  EXPECT_NEAR(inc, 2.30254, 1e-5);
}

TEST(LemmaNames, RoundTrip) {
  for (LemmaId id : all_lemmas()) EXPECT_EQ(parse_lemma_id(to_string(id)), id);
  EXPECT_EQ(all_lemmas().size(), 7u);
  EXPECT_THROW(parse_lemma_id("lemma99"), ConfigError);
  EXPECT_EQ(parse_control("drift"), Control::drift);
  EXPECT_THROW(parse_control("sideways"), ConfigError);
}

TEST(LemmaModel, HomogeneousPaths) {
  LemmaParams p = default_params(LemmaId::delayed);
  p.momentum = MomentumSchedule::constant(0.5);
  p.sigma = 0.0;
  p.eta0 = 0.0;
  const LemmaModel m(p, 100);
  Rng rng(1);
  PathState s;
  s.n = 1;
  s.r_prev = 3.0;
  s.r_curr = 3.0;
  for (int i = 0; i < 20; ++i) m.step(s, rng);
  EXPECT_NEAR(s.r_curr, 3.0, 1e-12);

  s = PathState{};
  s.n = 1;
  s.r_prev = 0.0;
  s.r_curr = 1.0;
  m.step(s, rng);
  EXPECT_NEAR(s.r_curr, 1.5, 1e-15);
  for (int i = 0; i < 60; ++i) m.step(s, rng);
  EXPECT_NEAR(s.r_curr, 2.0, 1e-12);
}

TEST(LemmaModel, FloorGuard) {
  LemmaParams p = default_params(LemmaId::delayed);
  const LemmaModel m(p, 500);
  EXPECT_GT(m.floor(), m.min_floor());
  p.floor = 0.5 * m.min_floor();
  EXPECT_THROW(LemmaModel(p, 500), ConfigError);
  LemmaParams q = default_params(LemmaId::delayed_perturbed);
  q.momentum = MomentumSchedule::constant(0.8);  // t = 4 > 1 with nonzero beta
  EXPECT_THROW(LemmaModel(q, 500), ConfigError);
}

TEST(LemmaModel, PathsStayNonnegative) {
  for (LemmaId id : all_lemmas()) {
    const LemmaModel m(default_params(id), 400);
    const auto paths = synth_paths(m, 3, 20);
    ASSERT_EQ(paths.size(), 20u);
    for (const auto& path : paths) {
      ASSERT_EQ(path.series.r.size(), 400u);
      for (double r : path.series.r) EXPECT_GE(r, 0.0) << to_string(id);
      for (double z : path.series.z) EXPECT_GE(z, 0.0) << to_string(id);
    }
  }
}

TEST(LemmaModel, CoupledZVanishes) {
  const LemmaModel m(default_params(LemmaId::coupled), 2000);
  const auto paths = synth_paths(m, 1, 200);
  double worst = 0.0;
  for (const auto& p : paths) {
    for (std::size_t k = 1800; k < p.series.z.size(); ++k) worst = std::max(worst, p.series.z[k]);
  }
  EXPECT_LT(worst, 1e-3);
}

TEST(SupermartingaleCheck, DeterministicDecreaseHasNoViolations) {
  LemmaParams p = default_params(LemmaId::delayed);
  p.sigma = 0.0;
  const LemmaModel m(p, 200);
  const auto rep = supermartingale_check(m, 1, 10);
  EXPECT_GT(rep.checks, 0);
  EXPECT_EQ(rep.supermartingale_violations, 0);
}

TEST(SupermartingaleCheck, MartingaleCalibration) {
  LemmaParams p = default_params(LemmaId::constant_momentum);
  p.eta0 = 0.0;
  const LemmaModel m(p, 300);
  const auto rep = supermartingale_check(m, 7, 1100);
  ASSERT_GE(rep.checks, 10000);
  EXPECT_LT(rep.violation_rate(), 0.01);
}

TEST(SupermartingaleCheck, BrokenGeneratorFlagged) {
  LemmaParams p = default_params(LemmaId::delayed);
  p.control = Control::drift;
  const LemmaModel m(p, 300);
  const auto rep = supermartingale_check(m, 2, 50);
  EXPECT_GT(rep.violation_rate(), 0.5);
}

TEST(SupermartingaleCheck, PowerGuard) {
  const LemmaModel m(default_params(LemmaId::delayed), 100);
  CheckOptions o;
  o.branches = 29;
  EXPECT_THROW(supermartingale_check(m, 1, 5, o), StatisticalPowerError);
  EXPECT_THROW(check_lemma(m, 1, 0), ArgumentError);
}

TEST(CheckLemma, DefaultsPassAndControlsFail) {
  for (LemmaId id : all_lemmas()) {
    const LemmaModel good(default_params(id), 2000);
    const auto rep = check_lemma(good, 1, 40);
    EXPECT_TRUE(rep.pass) << to_string(id);
    EXPECT_EQ(rep.paths_tested, 40);
    for (Control c : {Control::theta, Control::drift}) {
      if (c == Control::theta && id == LemmaId::prox_weighted) continue;
      LemmaParams p = default_params(id);
      p.control = c;
      const LemmaModel bad(p, 2000);
      EXPECT_FALSE(check_lemma(bad, 1, 40).pass) << to_string(id) << " " << to_string(c);
    }
  }
}

TEST(CheckSteps, Ladder) {
  const auto s = check_steps(2000);
  EXPECT_EQ(s.front(), 1);
  EXPECT_EQ(s.back(), 1998);
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_GT(s[i], s[i - 1]);
}
