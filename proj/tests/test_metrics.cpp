#include <gtest/gtest.h>

#include "collab/metrics.hpp"
#include "scenario_gen.hpp"

using namespace collab;
using testsupport::Gen;
using testsupport::rel_diff;

namespace {

HomogeneousSpec section_spec(Index N) {
  HomogeneousSpec spec;
  spec.N = N;
  spec.eta2 = 0.5;
  spec.sigma2 = 1.0;
  spec.rho = 0.1;
  spec.g0 = spec.h0 = 1.0;
  spec.alpha_h = spec.alpha_g = 0.9;
  spec.xi2 = 1.0;
  return spec;
}

HomogeneousSpec random_spec(Gen& gen, Index N) {
  HomogeneousSpec spec;
  spec.N = N;
  spec.h0 = gen.uniform(0.5, 1.5);
  spec.g0 = gen.uniform(0.5, 1.5);
  spec.alpha_h = gen.uniform(0.5, 1.0);
  spec.alpha_g = gen.uniform(0.5, 0.99);
  spec.sigma2 = gen.uniform(0.5, 2.0);
  spec.rho = gen.uniform(0.0, 0.5);
  spec.eta2 = gen.uniform(0.1, 2.0);
  spec.xi2 = gen.uniform(0.5, 2.0);
  return spec;
}

PowerConstraint individual(const Vector& p) { return PowerConstraint::individual({p.data(), p.data() + p.size()}); }

}  // namespace

TEST(Skewness, Endpoints) {
  Vector one = Vector::Zero(5);
  one(2) = 3.0;
  EXPECT_DOUBLE_EQ(skewness(one).kappa, 1.0);
  EXPECT_DOUBLE_EQ(skewness(one).kappa_M, 0.0);
  const auto eq = skewness(Vector::Constant(5, 0.7));
  EXPECT_NEAR(eq.kappa, 5.0, 1e-14);
  EXPECT_NEAR(eq.kappa_M, 1.0, 1e-14);
  EXPECT_THROW(skewness(Vector::Zero(3)), Error);
}

TEST(Skewness, GeometricHalf) {
  Vector p(4);
  p << 1.0, 0.5, 0.25, 0.125;
  const double s = 1.0 + std::sqrt(0.5) + 0.5 + std::sqrt(0.125);
  EXPECT_NEAR(skewness(p).kappa, s * s / 1.875, 1e-14);
  EXPECT_NEAR(geometric_kappa(4, 0.5), s * s / 1.875, 1e-14);
}

TEST(Skewness, StrictlyIncreasingInRatio) {
  for (Index M : {2, 5, 20}) {
    double prev = geometric_kappa(M, 0.0);
    EXPECT_DOUBLE_EQ(prev, 1.0);
    for (int i = 1; i <= 1000; ++i) {
      const double cur = geometric_kappa(M, i * 1e-3);
      EXPECT_GT(cur, prev) << M << " " << i;
      prev = cur;
    }
    EXPECT_NEAR(prev, static_cast<double>(M), 1e-12);
  }
}

TEST(BudgetsForSkewness, EndpointsAndRoundTrip) {
  const Vector eq = budgets_for_skewness(4, 4.0, 8.0);
  EXPECT_LT((eq - Vector::Constant(4, 2.0)).norm(), 1e-14);
  const Vector single = budgets_for_skewness(4, 1.0, 8.0);
  EXPECT_DOUBLE_EQ(single(0), 8.0);
  EXPECT_EQ(single.tail(3).norm(), 0.0);
  const Vector mid = budgets_for_skewness(4, 2.5, 3.0);
  EXPECT_NEAR(skewness(mid).kappa, 2.5, 1e-9);
  EXPECT_NEAR(mid.sum(), 3.0, 1e-14);
  Gen gen(1);
  for (int i = 0; i < 50; ++i) {
    const Index M = gen.integer(2, 40);
    const double k = gen.uniform(1.0, static_cast<double>(M));
    EXPECT_NEAR(skewness(budgets_for_skewness(M, k, 1.0)).kappa, k, 1e-9);
  }
  EXPECT_THROW(budgets_for_skewness(4, 0.5, 1.0), Error);
  EXPECT_THROW(budgets_for_skewness(4, 4.5, 1.0), Error);
}

TEST(ClosedFormGain, SectionAlphaX) {
  // paper: alpha_x is about 0.37 for these parameters
  EXPECT_NEAR(section_spec(10).alpha_x(), 0.37, 0.005);
  EXPECT_NEAR(section_spec(10).alpha_x(), (0.1 + 0.5 * 0.9) / 1.5, 1e-15);
}

TEST(ClosedFormGain, AsymptotesAtSectionParameters) {
  const auto spec = section_spec(10);
  const auto a = cg_asymptotes(spec, 1.0, 1.0);
  const double ax = spec.alpha_x();
  EXPECT_NEAR(a.regime1_limit, (1.0 - ax) * 0.9, 1e-15);
  EXPECT_NEAR(a.regime1_limit, 0.57, 0.01);  // paper: about 0.57
  EXPECT_NEAR(a.regime2_max, 0.24, 0.01);    // paper: about 0.24
  EXPECT_NEAR(a.P_M_star, 1.0 / (0.9 * std::sqrt(ax)), 1e-14);
}

TEST(ClosedFormGain, NoHeterogeneityNoGain) {
  auto spec = section_spec(10);
  spec.alpha_h = 1.0;
  spec.rho = 0.999999;
  const auto a = cg_asymptotes(spec, 3.0, 0.5);
  EXPECT_LT(a.regime1_limit, 1e-5);
  EXPECT_LT(a.regime2_max, 1e-5);
}

TEST(ClosedFormGain, MatchesHomogeneousEvaluatorsWhereActive) {
  for (Index M : {2, 5, 12, 30}) {
    const auto spec = section_spec(M);
    for (double pg : {0.01, 0.1, 1.0, 10.0, 100.0})
      for (double km : {0.25, 0.5, 0.75, 1.0}) {
        const Vector p = budgets_for_skewness(M, kappa_from_normalized(M, km), pg);
        const auto cf = cg_closed_form(spec, p);
        const auto num = homogeneous_gain(spec, individual(p));
        if (!cf.active) {
          EXPECT_EQ(num.regime_tags.back(), "inactive-constraint");
          continue;
        }
        EXPECT_LE(rel_diff(cf.CG, num.CG), 1e-4) << M << " " << pg << " " << km;
      }
  }
}

TEST(ClosedFormGain, CumulativeCaseUsesKappaM) {
  Gen gen(2);
  for (int i = 0; i < 20; ++i) {
    const Index M = gen.integer(2, 30);
    const auto spec = random_spec(gen, M);
    const double P = std::pow(10.0, gen.uniform(-2.0, 2.0));
    EXPECT_LE(rel_diff(cg_formula(spec, P, static_cast<double>(M)),
                       homogeneous_gain(spec, PowerConstraint::cumulative(P)).CG),
              1e-10);
  }
}

TEST(ClosedFormGain, MatchesMatrixSolvers) {
  Gen gen(3);
  for (int i = 0; i < 4; ++i) {
    const auto spec = random_spec(gen, 3);
    const Vector p = gen.vec(3, 0.2, 2.0);
    const auto s = expand(spec);
    const auto cf = cg_closed_form(spec, p);
    const auto solved = collaboration_gain(s, individual(p), IndividualMethod::Sdr);
    if (cf.active) EXPECT_LE(rel_diff(cf.CG, solved.CG), 1e-4) << i;
    EXPECT_LE(rel_diff(homogeneous_gain(spec, individual(p)).CG, solved.CG), 1e-4) << i;
    const double P = p.sum();
    EXPECT_LE(rel_diff(cg_formula(spec, P, 3.0), collaboration_gain(s, PowerConstraint::cumulative(P)).CG), 1e-8);
  }
}

TEST(ClosedFormGain, RegimeOneConvergence) {
  const auto spec = section_spec(200);
  Vector p = Vector::Zero(200);
  p(0) = 1e6 * spec.xi2 / (spec.g0 * spec.g0);
  const double numeric = homogeneous_gain(spec, individual(p)).CG;
  EXPECT_NEAR(numeric, cg_asymptotes(spec, 1.0, 1.0).regime1_limit, 0.01);
  EXPECT_NEAR(cg_formula(spec, p.sum(), 1.0), numeric, 1e-10);
}

TEST(ActivityCondition, TrivialCases) {
  const auto spec = section_spec(6);
  for (double p : {1e-3, 1.0, 1e6}) {
    EXPECT_TRUE(activity_condition(spec, Vector::Constant(6, p)));
    Vector single = Vector::Zero(6);
    single(3) = p;
    EXPECT_TRUE(activity_condition(spec, single));
  }
  Vector skewed = Vector::Constant(6, 1e-4);
  skewed(0) = 1e3;
  EXPECT_FALSE(activity_condition(spec, skewed));
  EXPECT_FALSE(cg_closed_form(spec, skewed).active);
}

TEST(ActivityCondition, SolversSpendEveryBudget) {
  Gen gen(4);
  int checked = 0;
  for (int i = 0; i < 12 && checked < 5; ++i) {
    const auto spec = random_spec(gen, 4);
    const Vector p = gen.vec(4, 0.05, 3.0);
    if (!activity_condition(spec, p)) continue;
    ++checked;
    const auto s = expand(spec);
    for (const auto& topo : {distributed_topology(4, 4), connected_topology(4, 4)}) {
      const auto r = solve_individual_sdr(assemble(s, topo), p, s.xi2);
      for (Index m = 0; m < 4; ++m) EXPECT_LE(rel_diff(r.per_node_power(m), p(m)), 1e-6) << i << " " << m;
    }
  }
  EXPECT_GE(checked, 3);
}

TEST(GainReport, OrderingAndRange) {
  Gen gen(5);
  for (int i = 0; i < 30; ++i) {
    const int n = gen.integer(2, 5);
    const int m = gen.integer(1, n);
    const auto s = testsupport::random_scenario(gen, n, m);
    const double P = std::pow(10.0, gen.uniform(-2.0, 3.0));
    const auto c = i % 2 == 0 ? PowerConstraint::cumulative(P) : individual(gen.vec(m, 0.0, P) + Vector::Constant(m, 1e-3));
    const auto r = collaboration_gain(s, c);
    EXPECT_LE(r.D0, r.D_conn * (1 + 1e-9));
    EXPECT_LE(r.D_conn, r.D_dist * (1 + 1e-9));
    EXPECT_LE(r.D_dist, r.eta2);
    EXPECT_GE(r.CG, -1e-9);
    EXPECT_LE(r.CG, 1.0);
    EXPECT_GE(r.kappa, 1.0);
    EXPECT_LE(r.kappa, static_cast<double>(m) + 1e-12);
  }
}

TEST(GainReport, VanishesAtZeroPower) {
  Gen gen(6);
  const auto s = testsupport::random_scenario(gen, 4, 4);
  const auto r = collaboration_gain(s, PowerConstraint::cumulative(1e-9));
  EXPECT_LT(r.CG, 1e-7);
  EXPECT_NEAR(r.D_dist, s.eta2, 1e-7);
}

TEST(GainReport, InfinitePowerPerfectGains) {
  Gen gen(7);
  testsupport::ScenarioFlags f;
  f.perfect_csi = f.perfect_ogi = f.diagonal_sigma = true;
  const auto s = testsupport::random_scenario(gen, 4, 4, f);
  const auto r = collaboration_gain(s, PowerConstraint::cumulative(1e10));
  const double centralized = (s.h.array().square() / s.Sigma.mat().diagonal().array()).sum();
  const double d_inf = distortion_from_J(centralized, s.eta2);
  EXPECT_NEAR(r.D_dist, d_inf, 1e-8);
  EXPECT_NEAR(r.CG, (d_inf - r.D0) / (s.eta2 - r.D0), 1e-7);
}

TEST(GainReport, NormalizedDistortion) {
  EXPECT_DOUBLE_EQ(normalized_distortion(0.5, 0.1, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(normalized_distortion(0.1, 0.1, 0.5), 0.0);
}
