#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "nillab/errors.hpp"
#include "nillab/joinings.hpp"
#include "nillab/params.hpp"
#include "nillab/rigidity.hpp"
#include "oracles.hpp"

using namespace nillab;

namespace {

// Weak-* distance straight from the definition: every frequency pair (m, m')
// over the full lattice box, integrals by direct summation.
double oracle_weakstar(const EmpiricalMeasure& a, const EmpiricalMeasure& b, int F) {
  const int dim = a.space().dim;
  const int coords = a.on_product() ? 2 * dim : dim;
  std::vector<int> m(coords, -F);
  std::map<int, double> shell_max;
  auto integral = [&](const EmpiricalMeasure& mu) {
    Complex s{};
    for (std::size_t i = 0; i < mu.size(); ++i) {
      double phase = 0.0;
      for (int c = 0; c < dim; ++c) {
        phase += m[c] * mu.first()[i].c[c];
        if (mu.on_product()) phase += m[dim + c] * mu.second()[i].c[c];
      }
      s += oracle::e(phase);
    }
    return s / static_cast<double>(mu.size());
  };
  for (;;) {
    int level = 0;
    for (int v : m) level = std::max(level, std::abs(v));
    shell_max[level] = std::max(shell_max[level], std::abs(integral(a) - integral(b)));
    int i = 0;
    while (i < coords && m[i] == F) m[i++] = -F;
    if (i == coords) break;
    ++m[i];
  }
  double d = 0.0;
  for (const auto& [level, v] : shell_max) d += std::ldexp(1.0, -(level + 1)) * v;
  return d;
}

NilSystem heis() { return NilSystem::default_heisenberg(); }

}  // namespace

TEST(EmpiricalMeasure, ValidatesConstruction) {
  const auto pts = haar_sample(10, 1);
  EXPECT_THROW(EmpiricalMeasure(Space::heisenberg(), {}, Provenance::direct_haar, 0), std::invalid_argument);
  EXPECT_THROW(EmpiricalMeasure(Space::heisenberg(), pts, std::vector<NilPoint>(pts.begin(), pts.begin() + 3),
                                Provenance::direct_haar, 0),
               std::invalid_argument);
  auto bad = pts;
  bad[4].c[0] = 1.5;
  EXPECT_THROW(EmpiricalMeasure(Space::heisenberg(), bad, Provenance::direct_haar, 0), std::invalid_argument);
  EXPECT_THROW(EmpiricalMeasure(Space::torus(2), pts, Provenance::direct_haar, 0), std::invalid_argument);
}

TEST(EmpiricalMeasure, UnitMassAndMarginals) {
  const auto m = diagonal_joining(heis(), 1001, Provenance::direct_haar, 5);
  EXPECT_EQ(m.integrate([](const NilPoint&, const NilPoint&) { return Complex(1.0, 0.0); }), Complex(1.0, 0.0));
  EXPECT_DOUBLE_EQ(m.weight() * static_cast<double>(m.size()), 1.0);
  EXPECT_TRUE(m.on_product());
  const auto m1 = m.marginal(1);
  EXPECT_FALSE(m1.on_product());
  EXPECT_EQ(m1.size(), 1001u);
  EXPECT_THROW(m.marginal(3), std::invalid_argument);
  EXPECT_THROW(m1.marginal(1), std::invalid_argument);
}

TEST(EmpiricalMeasure, PushForwardAppliesTheRotationToBothCoordinates) {
  const auto sys = heis();
  const auto m = vertical_graph_joining(sys, 0.25, 50, Provenance::direct_haar, 3);
  const auto pm = m.pushed_forward(sys);
  for (std::size_t i = 0; i < m.size(); ++i) {
    EXPECT_EQ(pm.first()[i], nilrotate(sys, m.first()[i]));
    EXPECT_EQ(pm.second()[i], nilrotate(sys, m.second()[i]));
  }
  EXPECT_THROW(m.pushed_forward(NilSystem::torus({0.3})), std::invalid_argument);
}

TEST(TestFamily, EnumerationAndWeights) {
  TestFunctionFamily fam{2};
  const auto freqs = fam.enumerate(2);
  ASSERT_EQ(freqs.size(), 25u);
  EXPECT_EQ(freqs[0], (std::vector<int>{0, 0}));
  EXPECT_EQ(TestFunctionFamily::shell_weight(0), 0.5);
  EXPECT_EQ(TestFunctionFamily::shell_weight(3), 1.0 / 16.0);
}

TEST(WeakStar, MatchesDefinitionOnProductMeasures) {
  const auto sys = heis();
  const auto a = vertical_graph_joining(sys, 0.3, 40, Provenance::direct_haar, 1);
  const auto b = counterexample_joining(sys, defaults::shift(), 40, Provenance::direct_haar, 2);
  const TestFunctionFamily fam{2};
  EXPECT_NEAR(weakstar_dist(a, b, fam), oracle_weakstar(a, b, 2), 1e-12);
}

TEST(WeakStar, MatchesDefinitionOnMeasuresOnX) {
  const auto a = diagonal_joining(heis(), 64, Provenance::direct_haar, 1).marginal(1);
  const auto b = diagonal_joining(heis(), 80, Provenance::orbit_pushforward, 2).marginal(2);
  EXPECT_NEAR(weakstar_dist(a, b, TestFunctionFamily{3}), oracle_weakstar(a, b, 3), 1e-12);
}

TEST(WeakStar, MetricPropertiesAndRange) {
  const auto sys = heis();
  const auto a = diagonal_joining(sys, 2000, Provenance::direct_haar, 1);
  const auto b = vertical_graph_joining(sys, 0.5, 2000, Provenance::direct_haar, 2);
  const TestFunctionFamily fam;
  EXPECT_EQ(weakstar_dist(a, a, fam), 0.0);
  const double ab = weakstar_dist(a, b, fam);
  EXPECT_EQ(ab, weakstar_dist(b, a, fam));
  EXPECT_GT(ab, 0.0);
  EXPECT_LT(ab, 2.0);
  EXPECT_THROW(weakstar_dist(a, a.marginal(1), fam), std::invalid_argument);
  EXPECT_GE(max_moment_difference(integrate_family(a, fam), integrate_family(b, fam)), 0.0);
}

TEST(WeakStar, MaxFrequencyIsValidated) {
  const auto a = diagonal_joining(heis(), 10, Provenance::direct_haar, 1);
  EXPECT_THROW(integrate_family(a, TestFunctionFamily{-1}), std::invalid_argument);
  EXPECT_THROW(integrate_family(a, TestFunctionFamily{8}), std::invalid_argument);
}

TEST(Joinings, DiagonalAndGraphConstructions) {
  const auto sys = heis();
  const auto d = diagonal_joining(sys, 100, Provenance::orbit_pushforward, 0);
  EXPECT_EQ(d.first()[0], base_point());
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(d.first()[i], d.second()[i]);
  const auto g = vertical_graph_joining(sys, 0.125, 100, Provenance::direct_haar, 4);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(g.second()[i], vertical_rotate(g.first()[i], 0.125));
  EXPECT_THROW(vertical_graph_joining(NilSystem::torus({0.3}), 0.1, 10, Provenance::direct_haar, 0),
               std::invalid_argument);
}

TEST(Joinings, TranslationGraphOnTorus) {
  const auto sys = NilSystem::torus({defaults::alpha(), defaults::beta()});
  const std::vector<double> v{0.25, 0.5};
  const auto m = translation_graph_joining(sys, v, 100, Provenance::direct_haar, 1);
  for (std::size_t i = 0; i < m.size(); ++i) {
    EXPECT_NEAR(circle_dist(m.second()[i].c[0] - m.first()[i].c[0] - 0.25), 0.0, 1e-15);
    EXPECT_NEAR(circle_dist(m.second()[i].c[1] - m.first()[i].c[1] - 0.5), 0.0, 1e-15);
  }
  EXPECT_THROW(translation_graph_joining(sys, std::vector<double>{0.1}, 10, Provenance::direct_haar, 0),
               std::invalid_argument);
  EXPECT_THROW(translation_graph_joining(heis(), std::vector<double>{0.1, 0.1, 0.1}, 10, Provenance::direct_haar, 0),
               std::invalid_argument);
}

TEST(Counterexample, PairsAreShiftedByTheFiberElement) {
  const auto sys = heis();
  const double s = defaults::shift();
  const auto m = counterexample_joining(sys, s, 500, Provenance::direct_haar, 8);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto& p = m.first()[i];
    const auto& q = m.second()[i];
    EXPECT_EQ(q.c[0], p.c[0]);
    EXPECT_NEAR(circle_dist(q.c[1] - p.c[1] - s), 0.0, 1e-12);
  }
  const auto o = counterexample_joining(sys, s, 500, Provenance::orbit_pushforward, 8);
  EXPECT_EQ(o.first()[0], base_point());
}

TEST(Counterexample, RequiresCertifiedShift) {
  const auto sys = heis();
  EXPECT_THROW(counterexample_joining(sys, 0.5, 10, Provenance::direct_haar, 0), UncertifiedParameter);
  EXPECT_NO_THROW(counterexample_joining(sys, 0.5, 10, Provenance::direct_haar, 0, false));
  EXPECT_THROW(certify_shift(sys, 0.0), UncertifiedParameter);
  EXPECT_NO_THROW(certify_shift(sys, defaults::shift()));
  EXPECT_THROW(certify_shift(NilSystem::torus({0.3}), defaults::shift()), std::invalid_argument);
}

TEST(Graphness, SeparatesGraphsFromFiberedJoinings) {
  const auto sys = heis();
  const double cw = central_fiber_diameter({});
  const auto d = graphness(diagonal_joining(sys, 40000, Provenance::direct_haar, 1), 0.05, 20);
  const auto v = graphness(vertical_graph_joining(sys, 0.3, 40000, Provenance::direct_haar, 2), 0.05, 20);
  const auto c = graphness(counterexample_joining(sys, defaults::shift(), 40000, Provenance::direct_haar, 3), 0.05, 20);
  ASSERT_TRUE(d.determinate && v.determinate && c.determinate);
  EXPECT_LE(d.value, 0.05 + 1e-12);
  EXPECT_LE(v.value, 0.15);
  EXPECT_GE(c.value, 0.8 * cw);
  EXPECT_GE(c.value / std::max(d.value, 1e-12), 10.0);
}

TEST(Graphness, IndeterminateAndInvalidInputs) {
  const auto sys = heis();
  const auto small = diagonal_joining(sys, 50, Provenance::direct_haar, 1);
  const auto r = graphness(small, 0.05, 20);
  EXPECT_FALSE(r.determinate);
  EXPECT_EQ(classify(r, ClassificationThresholds{}), Classification::indeterminate);
  EXPECT_THROW(graphness(small, 0.0, 20), std::invalid_argument);
  EXPECT_THROW(graphness(small, 1.5, 20), std::invalid_argument);
  EXPECT_THROW(graphness(small.marginal(1), 0.05, 20), std::invalid_argument);
}

TEST(Classify, FollowsTheThresholds) {
  ClassificationThresholds t;
  t.fiber_diameter = 0.7;
  EXPECT_EQ(classify({0.15, 10, true}, t), Classification::graph_like);
  EXPECT_EQ(classify({0.35, 10, true}, t), Classification::non_graph);
  EXPECT_EQ(classify({0.2, 10, true}, t), Classification::indeterminate);
  t.fiber_diameter = 0.0;
  EXPECT_EQ(classify({0.9, 10, true}, t), Classification::indeterminate);
  EXPECT_EQ(to_string(Classification::graph_like), "graph-like");
  EXPECT_EQ(to_string(Classification::non_graph), "non-graph");
}

TEST(Provenance, RoundTripsThroughText) {
  for (auto p : {Provenance::direct_haar, Provenance::orbit_pushforward}) EXPECT_EQ(parse_provenance(to_string(p)), p);
  EXPECT_THROW(parse_provenance("monte-carlo"), std::invalid_argument);
}

TEST(Report, DiagonalJoiningIsCloseToItselfAndGraphLike) {
  const auto sys = heis();
  ReportOptions opts;
  opts.thresholds = default_thresholds(sys);
  opts.n_ref = 20000;
  opts.ref_seed = 77;
  const auto ref = integrate_family(diagonal_joining(sys, 20000, Provenance::direct_haar, 10), opts.family);
  const auto r = analyze_joining(diagonal_joining(sys, 20000, Provenance::direct_haar, 11), ref, opts);
  EXPECT_LE(r.dist_to_diagonal, 0.03);
  EXPECT_LE(r.marginal_error_1, 0.03);
  EXPECT_EQ(r.marginal_error_1, r.marginal_error_2);
  EXPECT_EQ(r.classification, Classification::graph_like);
  EXPECT_EQ(r.thresholds.fiber_diameter, opts.thresholds.fiber_diameter);
}

TEST(Report, MarginalErrorAndDriftAreSmallForHaarJoinings) {
  const auto sys = heis();
  const auto m = counterexample_joining(sys, defaults::shift(), 20000, Provenance::direct_haar, 4);
  const TestFunctionFamily fam;
  EXPECT_LE(marginal_error(m, 1, fam, 20000, 9), 0.03);
  EXPECT_LE(marginal_error(m, 2, fam, 20000, 9), 0.03);
  EXPECT_LE(invariance_drift(m, sys, fam), 0.05);
}
