#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "samom/errors.hpp"
#include "samom/momentum_algebra.hpp"
#include "samom/rng.hpp"

using namespace samom;
using namespace samom::algebra;

namespace {

std::vector<double> thetas_for(const MomentumSchedule& s, std::int64_t n) {
  std::vector<double> out;
  for (std::int64_t k = 1; k <= n; ++k) out.push_back(momentum_at(s, k));
  return out;
}

}  // namespace

TEST(CompanionMatrix, Entries) {
  const Mat2 m = companion_matrix(0.5);
  EXPECT_EQ(m(0, 0), 0.0);
  EXPECT_EQ(m(0, 1), -0.5);
  EXPECT_EQ(m(1, 0), 1.0);
  EXPECT_EQ(m(1, 1), 1.5);
  const Mat2 z = companion_matrix(0.0);
  EXPECT_EQ(z(0, 1), 0.0);
  EXPECT_EQ(z(1, 1), 1.0);
}

TEST(CompanionMatrix, TraceDeterminantEigenvalues) {
  const Mat2 m = companion_matrix(0.9);
  EXPECT_NEAR(m.trace(), 1.9, 1e-15);
  EXPECT_NEAR(m.determinant(), 0.9, 1e-15);
  const auto ev = eigenvalues(m);
  EXPECT_NEAR(ev[0], 0.9, 1e-12);
  EXPECT_NEAR(ev[1], 1.0, 1e-12);
}

TEST(CompanionMatrix, RejectsOutOfRange) {
  EXPECT_THROW(companion_matrix(1.0), DomainError);
  EXPECT_THROW(companion_matrix(-0.1), DomainError);
  EXPECT_THROW(companion_matrix(std::nan("")), DomainError);
}

TEST(HeadProduct, ZeroMomentum) {
  const std::vector<double> th(7, 0.0);
  const auto p = head_product(th, 7);
  EXPECT_EQ(p.entries, companion_matrix(0.0));
}

TEST(HeadProduct, HalfMomentumThreeSteps) {
  const std::vector<double> th(3, 0.5);
  const auto p = head_product(th, 3);
  const auto o = oracle::head(th, 3);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(p.entries.e[i], o[i], 1e-12);
  EXPECT_NEAR(p.entries(0, 0), -0.75, 1e-12);
  EXPECT_NEAR(p.entries(0, 1), -0.875, 1e-12);
}

TEST(HeadProduct, MatchesClosedFormAndColumnSums) {
  Rng rng(3);
  std::vector<double> th;
  for (int k = 0; k < 60; ++k) th.push_back(rng.uniform(0.0, 0.95));
  for (std::int64_t n = 1; n <= 60; ++n) {
    const auto p = head_product(th, n).entries;
    const auto cf = head_product_closed_form(th, n);
    const auto o = oracle::head(th, static_cast<std::size_t>(n));
    for (int i = 0; i < 4; ++i) {
      EXPECT_NEAR(p.e[i], cf.e[i], 1e-12);
      EXPECT_NEAR(p.e[i], o[i], 1e-12);
    }
    EXPECT_NEAR(p(0, 0) + p(1, 0), 1.0, 1e-12);
    EXPECT_NEAR(p(0, 1) + p(1, 1), 1.0, 1e-12);
  }
}

TEST(HeadProduct, ArgumentErrors) {
  const std::vector<double> th(3, 0.5);
  EXPECT_THROW(head_product(th, 4), ArgumentError);
  EXPECT_THROW(head_product(th, 0), ArgumentError);
}

TEST(HeadProduct, CauchyBoundHarmonic) {
  const auto th = thetas_for(MomentumSchedule::harmonic(3), 11);
  const auto p10 = head_product(th, 10).entries;
  const auto p11 = head_product(th, 11).entries;
  double prod = 1.0;
  for (int j = 1; j <= 10; ++j) prod /= (j + 3);
  EXPECT_LE((p11 - p10).frobenius(), 2.0 * prod);
}

TEST(HeadProduct, EntriesBounded) {
  for (double d : {0.25, 0.5, 0.9}) {
    const std::vector<double> th(200, d);
    const auto ps = head_products(th, 200);
    for (const auto& p : ps) EXPECT_LE(p.max_abs(), 1.0 + d / (1.0 - d) + 1e-12);
  }
}

TEST(TailCoefficients, ConstantClosedForm) {
  const TailCoefficients t(MomentumSchedule::constant(0.5), 50);
  for (std::int64_t n = 1; n <= 50; ++n) EXPECT_NEAR(t.at(n), 1.0, 1e-12);
  const TailCoefficients z(MomentumSchedule::constant(0.0), 10);
  for (std::int64_t n = 1; n <= 10; ++n) EXPECT_EQ(z.at(n), 0.0);
  const TailCoefficients h(MomentumSchedule::constant(0.9), 10);
  EXPECT_NEAR(h.at(3), 9.0, 1e-12);
}

TEST(TailCoefficients, HarmonicFirstValue) {
  const TailCoefficients t(MomentumSchedule::harmonic(3), 5);
  EXPECT_NEAR(t.at(1), oracle::t1_harmonic3(), 1e-12);
  EXPECT_NEAR(t.at(1), 0.309690970754271412, 1e-12);
}

TEST(TailCoefficients, MatchesForwardSeries) {
  const MomentumSchedule power = MomentumSchedule::power(0.8, 1.0, 0.5);
  const TailCoefficients t(power, 40);
  for (long n : {1L, 2L, 7L, 40L}) {
    const double o = oracle::tail_series([&](long k) { return momentum_at(power, k); }, n);
    EXPECT_NEAR(t.at(n), o, 1e-9 * (1.0 + o));
  }
}

TEST(TailCoefficients, RecursionAndMonotonicity) {
  for (const auto& s : {MomentumSchedule::constant(0.7), MomentumSchedule::harmonic(3),
                        MomentumSchedule::power(0.9, 2.0, 0.3)}) {
    const TailCoefficients t(s, 300);
    for (std::int64_t n = 1; n < 300; ++n) {
      EXPECT_LT(std::abs(t.at(n) - (1.0 + t.at(n + 1)) * momentum_at(s, n)), 1e-10);
      EXPECT_GE(t.at(n), t.at(n + 1) - 1e-15);
      EXPECT_GE(t.at(n), 0.0);
    }
  }
}

TEST(TailCoefficients, QChainIdentity) {
  const MomentumSchedule s = MomentumSchedule::harmonic(2);
  const TailCoefficients t(s, 30);
  for (std::int64_t n = 1; n < 30; ++n) {
    const Mat2 lhs = tail_product(t, n).entries;
    const Mat2 rhs = companion_matrix(momentum_at(s, n)) * tail_product(t, n + 1).entries;
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(lhs.e[i], rhs.e[i], 10 * t.tolerance());
  }
}

TEST(TailCoefficients, Errors) {
  MomentumSchedule bad = MomentumSchedule::constant(0.5);
  bad.c = 1.0;
  EXPECT_THROW(TailCoefficients(bad, 10), SeriesDivergenceError);
  EXPECT_THROW(TailCoefficients(MomentumSchedule::constant(0.5), 0), ArgumentError);
  EXPECT_THROW(TailCoefficients(MomentumSchedule::constant(0.5), 5, 0.0), ArgumentError);
  const TailCoefficients t(MomentumSchedule::constant(0.5), 5);
  EXPECT_THROW(t.at(6), ArgumentError);
  EXPECT_THROW(t.at(0), ArgumentError);
}

TEST(FixedPointResidual, Examples) {
  const auto r = fixed_point_residual({fixed_point_matrix(0.7), 1, ProductState::Kind::head}, 0.3);
  EXPECT_NEAR(r.dist2, 0.0, 1e-15);
  Mat2 p;
  p.e = {-0.3, -0.1, 1.3, 1.1};
  const auto q = fixed_point_residual({p, 1, ProductState::Kind::head}, 0.5);
  EXPECT_NEAR(q.dist2, 0.04, 1e-14);
}

TEST(FixedPointResidual, DecayUnderConstantMomentum) {
  const std::vector<double> th(20, 0.5);
  const auto p = head_product(th, 20);
  const auto r = fixed_point_residual(p, 0.5);
  EXPECT_LE(r.dist2, std::pow(0.25, 20) * (1.0 + 1e-9));
  // direct projection: nearest t to (d, c) is the midpoint
  const double d = -p.entries(0, 0);
  const double c = -p.entries(0, 1);
  EXPECT_NEAR(r.dist2, (d - c) * (d - c), 1e-18);
}

TEST(FixedPointResidual, StructuralError) {
  Mat2 p;
  p.e = {-0.3, -0.1, 1.4, 1.1};
  EXPECT_THROW(fixed_point_residual({p, 1, ProductState::Kind::head}, 0.5), StructuralError);
}

TEST(FixedPointResidual, IdentityOnRandomPairs) {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const double t = rng.uniform(0.0, 50.0);
    const double th = rng.uniform(0.0, 0.999);
    const Mat2 x = fixed_point_matrix(t);
    const Mat2 y = x * companion_matrix(th);
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(y.e[j], x.e[j], 1e-12 * (1.0 + t));
  }
}
