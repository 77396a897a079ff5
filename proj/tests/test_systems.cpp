#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "nillab/params.hpp"
#include "nillab/random.hpp"
#include "nillab/systems.hpp"
#include "oracles.hpp"

using namespace nillab;

namespace {

oracle::Vec3 as_vec(const NilPoint& p) { return {p.c[0], p.c[1], p.c[2]}; }

double coset_gap(const NilPoint& a, const NilPoint& b) {
  double m = 0.0;
  for (int i = 0; i < 3; ++i) m = std::max(m, circle_dist(a.c[i] - b.c[i]));
  return m;
}

}  // namespace

TEST(NilSystem, DefaultParametersAndCertificate) {
  const auto sys = NilSystem::default_heisenberg();
  EXPECT_DOUBLE_EQ(sys.tau.x, defaults::alpha());
  EXPECT_DOUBLE_EQ(sys.tau.y, defaults::beta());
  EXPECT_EQ(sys.tau.z, 0.0);
  ASSERT_EQ(sys.certificate.size(), 3u);
  EXPECT_EQ(sys.certificate[0], 1.0);
  EXPECT_FALSE(sys.is_identity_rotation());
}

TEST(NilSystem, TrivialRotationIsRejected) {
  const auto sys = NilSystem::heisenberg(0, 0, 0);
  EXPECT_TRUE(sys.is_identity_rotation());
  EXPECT_THROW(require_ergodic(sys), std::invalid_argument);
  EXPECT_THROW(birkhoff_avg(sys, observables::character(1), base_point(), 10), std::invalid_argument);
  EXPECT_TRUE(NilSystem::torus({1.0}).is_identity_rotation());
}

TEST(NilRotate, MatchesOracleLeftMultiplication) {
  const auto sys = NilSystem::default_heisenberg();
  const oracle::Vec3 tau{sys.tau.x, sys.tau.y, sys.tau.z};
  for (const auto& p : haar_sample(200, 2)) {
    const auto got = nilrotate(sys, p);
    const auto want = oracle::reduce(oracle::mul(tau, as_vec(p)));
    ASSERT_TRUE(want);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(got.c[i], (*want)[i], 1e-12);
  }
}

TEST(RotatePower, AgreesWithIteratedRotation) {
  const auto sys = NilSystem::default_heisenberg();
  const auto p0 = haar_sample(1, 3).front();
  NilPoint p = p0;
  for (int k = 1; k <= 2000; ++k) {
    p = nilrotate(sys, p);
    if (k % 250 == 0) EXPECT_LT(coset_gap(rotate_power(sys, p0, k), p), 1e-9) << k;
  }
}

TEST(RotatePower, ClosedFormMatchesOraclePowers) {
  const auto sys = NilSystem::default_heisenberg();
  const oracle::Vec3 tau{sys.tau.x, sys.tau.y, sys.tau.z};
  for (long k : {0L, 1L, 2L, 7L, 30L}) {
    const auto g = rotation_power(sys, k);
    const auto w = oracle::power(tau, k);
    EXPECT_NEAR(g.x, w[0], 1e-12);
    EXPECT_NEAR(g.y, w[1], 1e-12);
    EXPECT_NEAR(g.z, w[2], 1e-10);
  }
}

TEST(RotatePower, StaysAccurateForLargeExponents) {
  // Compare the closed form at k with k/2 steps applied twice.
  const auto sys = NilSystem::default_heisenberg();
  const std::int64_t k = 1'000'000'000;
  const auto half = rotate_power(sys, base_point(), k / 2);
  const auto twice = rotate_power(sys, half, k / 2);
  EXPECT_LT(coset_gap(twice, rotate_power(sys, base_point(), k)), 1e-6);
}

TEST(Orbit, StartsAtTheBaseAndHasRequestedLength) {
  const auto sys = NilSystem::torus({defaults::alpha()});
  const auto pts = orbit(sys, base_point(sys.space), 5);
  ASSERT_EQ(pts.size(), 5u);
  EXPECT_EQ(pts[0], base_point(sys.space));
  EXPECT_NEAR(pts[3].c[0], std::fmod(3 * defaults::alpha(), 1.0), 1e-15);
}

TEST(Birkhoff, TorusCharacterMatchesGeometricSum) {
  const double a = defaults::alpha();
  const auto sys = NilSystem::torus({a});
  for (std::size_t n : {10u, 1000u, 100000u}) {
    const double got = std::abs(birkhoff_avg(sys, observables::character(1), base_point(sys.space), n));
    EXPECT_NEAR(got, oracle::geometric_mean_abs(a, n), 1e-9) << n;
  }
  EXPECT_LE(std::abs(birkhoff_avg(sys, observables::character(1), base_point(sys.space), 100000)), 0.01);
}

TEST(Birkhoff, ConstantsAreExact) {
  const auto sys = NilSystem::default_heisenberg();
  const auto v = birkhoff_avg(sys, observables::constant({2.0, -1.0}), base_point(), 123457);
  EXPECT_EQ(v, Complex(2.0, -1.0));
}

TEST(Birkhoff, ZeroLengthIsAnError) {
  const auto sys = NilSystem::default_heisenberg();
  EXPECT_THROW(birkhoff_avg(sys, observables::character(1), base_point(), 0), std::invalid_argument);
}

TEST(Observables, ParseAndEvaluate) {
  const NilPoint p = make_point(Space::heisenberg(), std::vector<double>{0.25, 0.5, 0.125});
  EXPECT_NEAR(std::abs(observables::parse("char:1")(p) - oracle::e(0.25)), 0, 1e-15);
  EXPECT_NEAR(std::abs(observables::parse("char:1,2,-1")(p) - oracle::e(0.25 + 1.0 - 0.125)), 0, 1e-15);
  EXPECT_NEAR(std::abs(observables::parse("vchar")(p) - oracle::e(0.125)), 0, 1e-15);
  EXPECT_NEAR(std::abs(observables::parse("vchar:3")(p) - oracle::e(0.375)), 0, 1e-15);
  EXPECT_NEAR(std::abs(observables::parse("conj:vchar")(p) - oracle::e(-0.125)), 0, 1e-15);
  EXPECT_EQ(observables::parse("const:2,1")(p), Complex(2.0, 1.0));
  EXPECT_EQ(observables::vertical_character().continuity, Continuity::almost_everywhere);
}

TEST(Observables, RejectsUnknownSpecs) {
  for (const char* bad : {"", "chr:1", "char:", "char:1,2,3,4", "vchar:1,2", "const:x"}) {
    EXPECT_THROW(observables::parse(bad), std::invalid_argument) << bad;
  }
}

TEST(Observables, ScaledAndConjugated) {
  const auto f = observables::vertical_character();
  const auto g = observables::scaled(f, {0.0, 2.0});
  const auto h = observables::conjugated(f);
  const auto p = haar_sample(1, 7).front();
  EXPECT_EQ(g(p), Complex(0.0, 2.0) * f(p));
  EXPECT_EQ(h(p), std::conj(f(p)));
  EXPECT_DOUBLE_EQ(g.bound, 2.0);
}

TEST(TorusFactor, ProjectionAndRotation) {
  const auto sys = NilSystem::default_heisenberg();
  const auto s = torus_factor(sys);
  EXPECT_EQ(s.space, Space::torus(2));
  EXPECT_EQ(s.tau.x, sys.tau.x);
  EXPECT_EQ(s.tau.y, sys.tau.y);
  const auto p = make_point(Space::heisenberg(), std::vector<double>{0.1, 0.2, 0.3});
  const auto q = project_torus_factor(p);
  EXPECT_EQ(q.space, Space::torus(2));
  EXPECT_EQ(q.c[0], 0.1);
  EXPECT_EQ(q.c[1], 0.2);
  EXPECT_EQ(q.c[2], 0.0);
}

TEST(VerticalRotation, ShiftsTheCentralCoordinate) {
  const auto p = make_point(Space::heisenberg(), std::vector<double>{0.1, 0.2, 0.9});
  const auto q = vertical_rotate(p, 0.25);
  EXPECT_EQ(q.c[0], 0.1);
  EXPECT_EQ(q.c[1], 0.2);
  EXPECT_NEAR(q.c[2], 0.15, 1e-15);
  EXPECT_NEAR(dist(p, q), 0.5, 1e-12);  // sqrt(1/4), constant in p
}

TEST(VerticalAverage, KillsVerticalCharactersAndKeepsTorusOnes) {
  const auto pts = haar_sample(100, 12);
  for (const auto& p : pts) {
    EXPECT_LE(std::abs(vertical_average(observables::vertical_character(), p, 16)), 1e-10);
    const auto f = observables::character(1, 2);
    EXPECT_NEAR(std::abs(vertical_average(f, p, 16) - f(p)), 0.0, 1e-12);
  }
  EXPECT_THROW(vertical_average(observables::vertical_character(), pts[0], 0), std::invalid_argument);
}
