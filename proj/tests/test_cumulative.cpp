#include <gtest/gtest.h>

#include "collab/cumulative.hpp"
#include "scenario_gen.hpp"

using namespace collab;
using testsupport::Gen;
using testsupport::rel_diff;

namespace {

// Independent cycle oracle: J = phi / (nu + mu / P_xi - eta2 phi).
double cycle_oracle(const HomogeneousSpec& s, double P) {
  const double m = static_cast<double>(s.N);
  const double k = static_cast<double>(s.K);
  const double gamma = s.eta2 * s.h0 * s.h0 / s.sigma2;
  const double ax = (s.rho + gamma * s.alpha_h) / (1.0 + gamma);
  const double sx2 = s.sigma2 + s.eta2 * s.h0 * s.h0;
  const double g2 = s.g0 * s.g0;
  const double phi = g2 * s.h0 * s.h0 * s.alpha_g * s.alpha_h * m * k;
  const double mu = sx2 * (1.0 + (k - 1.0) * ax);
  const double nu = sx2 * g2 * (1.0 + (k - 1.0) * (ax + s.alpha_g) + (m * k - 2.0 * k + 1.0) * ax * s.alpha_g);
  return phi / (nu + mu * s.xi2 / P - s.eta2 * phi);
}

HomogeneousSpec random_spec(Gen& gen, int n) {
  HomogeneousSpec s;
  s.N = n;
  s.K = gen.integer(1, n);
  s.h0 = gen.uniform(0.5, 2.0);
  s.g0 = gen.uniform(0.5, 2.0);
  s.alpha_h = gen.uniform(0.3, 1.0);
  s.alpha_g = gen.uniform(0.3, 1.0);
  s.sigma2 = gen.uniform(0.3, 2.0);
  s.rho = gen.uniform(0.0, 0.6);
  s.eta2 = gen.uniform(0.2, 2.0);
  s.xi2 = gen.uniform(0.5, 2.0);
  return s;
}

}  // namespace

TEST(Cumulative, SingleNodeOneThird) {
  const auto s = make_scenario(Vector::Ones(1), Matrix::Identity(1, 1), Vector::Ones(1), 1.0, 1.0);
  const auto ops = assemble(s, distributed_topology(1, 1));
  EXPECT_NEAR(solve_cumulative(ops, 1.0, 1.0).J, 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(solve_cumulative_rank1(ops, 1.0, 1.0).J, 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(closed_form_distributed(s, 1.0).J, 1.0 / 3.0, 1e-14);
}

TEST(Cumulative, InfinitePowerApproachesCentralized) {
  Gen gen(11);
  testsupport::ScenarioFlags f;
  f.perfect_csi = f.perfect_ogi = true;
  const auto s = testsupport::random_scenario(gen, 4, 4, f);
  const double j_cent = s.h.dot(s.Sigma.mat().llt().solve(s.h));
  const auto ops = assemble(s, connected_topology(4, 4));
  EXPECT_LT(rel_diff(solve_cumulative(ops, 1e12, s.xi2).J, j_cent), 1e-4);
  EXPECT_LT(rel_diff(closed_form_connected(s, 1e12).J, j_cent), 1e-4);
}

TEST(Cumulative, ConstraintActiveAndResultConsistent) {
  Gen gen(12);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = gen.integer(1, 5);
    const int m = gen.integer(1, n);
    const auto s = testsupport::random_scenario(gen, n, m);
    const auto ops = assemble(s, testsupport::random_topology(gen, m, n, 0.4));
    const double P = gen.uniform(0.1, 10.0);
    const auto r = solve_cumulative(ops, P, s.xi2);
    EXPECT_LT(rel_diff(r.total_power, P), 1e-8);
    EXPECT_LT(rel_diff(ops.total_power(r.w), P), 1e-8);
    EXPECT_LT(rel_diff(ops.fisher_information(r.w, s.xi2), r.J), 1e-8);
    EXPECT_LT(rel_diff(r.D, 1.0 / (1.0 / s.eta2 + r.J)), 1e-14);
    for (Index node = 0; node < m; ++node)
      EXPECT_NEAR(r.per_node_power(node), ops.node_power(r.w, node), 1e-12 * P);
  }
}

TEST(Cumulative, PencilMatchesRankOne) {
  Gen gen(13);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = gen.integer(1, 6);
    const int m = gen.integer(1, n);
    const auto s = testsupport::random_scenario(gen, n, m);
    const auto ops = assemble(s, testsupport::random_topology(gen, m, n, 0.5));
    const double P = std::pow(10.0, gen.uniform(-2.0, 3.0));
    const auto a = solve_cumulative(ops, P, s.xi2);
    const auto b = solve_cumulative_rank1(ops, P, s.xi2);
    EXPECT_LT(rel_diff(a.J, b.J), 1e-8);
    EXPECT_LT((a.w - b.w).norm(), 1e-6 * a.w.norm());
  }
}

TEST(Cumulative, NoRandomFeasibleWeightBeatsOptimum) {
  Gen gen(14);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = gen.integer(2, 4);
    const auto s = testsupport::random_scenario(gen, n, n);
    const auto ops = assemble(s, testsupport::random_topology(gen, n, n, 0.5));
    const double P = gen.uniform(0.2, 5.0);
    const double best = solve_cumulative(ops, P, s.xi2).J;
    for (int k = 0; k < 500; ++k) {
      Vector w = gen.gaussian(static_cast<int>(ops.L));
      w *= std::sqrt(P / ops.total_power(w));
      EXPECT_LE(ops.fisher_information(w, s.xi2), best * (1.0 + 1e-10));
    }
  }
}

TEST(Cumulative, MonotoneInPower) {
  Gen gen(15);
  const auto s = testsupport::random_scenario(gen, 4, 3);
  const auto ops = assemble(s, testsupport::random_topology(gen, 3, 4, 0.5));
  double prev = 0.0;
  for (double P = 1e-3; P < 1e4; P *= 2.0) {
    const double J = solve_cumulative(ops, P, s.xi2).J;
    EXPECT_GT(J, prev);
    prev = J;
  }
  EXPECT_LE(prev, topology_limit(ops) * (1.0 + 1e-9));
}

TEST(PowerForTarget, RoundTrip) {
  Gen gen(16);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = testsupport::random_scenario(gen, 3, 3);
    const auto ops = assemble(s, testsupport::random_topology(gen, 3, 3, 0.5));
    const double j1 = solve_cumulative(ops, 1.0, s.xi2).J;
    EXPECT_LT(rel_diff(power_for_target(ops, j1, s.xi2), 1.0), 1e-6);
    for (double P : {0.05, 3.0, 40.0}) {
      const double J = solve_cumulative(ops, P, s.xi2).J;
      const double back = power_for_target(ops, J, s.xi2);
      EXPECT_LT(rel_diff(back, P), 1e-6);
      EXPECT_LT(rel_diff(solve_cumulative(ops, back, s.xi2).J, J), 1e-6);
    }
  }
}

TEST(PowerForTarget, UnreachableTarget) {
  Gen gen(17);
  const auto s = testsupport::random_scenario(gen, 3, 3);
  const auto ops = assemble(s, connected_topology(3, 3));
  const double j0 = infinite_power_limit(s);
  EXPECT_LT(rel_diff(topology_limit(ops), j0), 1e-8);
  try {
    power_for_target(ops, j0 * 1.01, s.xi2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TargetUnreachable);
  }
}

TEST(ClosedForms, ConnectedMatchesPencil) {
  Gen gen(18);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = gen.integer(1, 6);
    const int m = gen.integer(1, n);
    const auto s = testsupport::random_scenario(gen, n, m);
    const auto ops = assemble(s, connected_topology(m, n));
    const double P = std::pow(10.0, gen.uniform(-2.0, 3.0));
    const auto cf = closed_form_connected(s, P);
    const auto num = solve_cumulative(ops, P, s.xi2);
    EXPECT_LT(rel_diff(cf.J, num.J), 1e-8);
    EXPECT_LT(rel_diff(cf.total_power, P), 1e-10);
    EXPECT_LT(rel_diff(ops.fisher_information(cf.w, s.xi2), cf.J), 1e-8);
  }
}

TEST(ClosedForms, CycleMatchesOracleAndPencil) {
  Gen gen(19);
  for (int trial = 0; trial < 40; ++trial) {
    const auto spec = random_spec(gen, gen.integer(1, 7));
    const double P = std::pow(10.0, gen.uniform(-2.0, 3.0));
    const auto cf = closed_form_cycle(spec, P);
    EXPECT_LT(rel_diff(cf.J, cycle_oracle(spec, P)), 1e-10);
    const auto s = expand(spec);
    const auto ops = assemble(s, make_cycle_topology(spec.N, spec.K));
    EXPECT_LT(rel_diff(cf.J, solve_cumulative(ops, P, s.xi2).J), 1e-8);
    EXPECT_LT(rel_diff(ops.fisher_information(cf.w, s.xi2), cf.J), 1e-8);
    EXPECT_LT(rel_diff(ops.total_power(cf.w), P), 1e-10);
  }
}

TEST(ClosedForms, CycleAtFullConnectivityMatchesConnected) {
  Gen gen(20);
  for (int trial = 0; trial < 20; ++trial) {
    auto spec = random_spec(gen, gen.integer(1, 6));
    spec.K = spec.N;
    const double P = gen.uniform(0.1, 50.0);
    EXPECT_LT(rel_diff(closed_form_cycle(spec, P).J, closed_form_connected(expand(spec), P).J), 1e-10);
  }
}

TEST(ClosedForms, DistributedMatchesPencil) {
  Gen gen(21);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = gen.integer(1, 8);
    testsupport::ScenarioFlags f;
    f.perfect_csi = f.perfect_ogi = f.diagonal_sigma = true;
    const auto s = testsupport::random_scenario(gen, n, n, f);
    const double P = std::pow(10.0, gen.uniform(-2.0, 3.0));
    const auto cf = closed_form_distributed(s, P);
    const auto ops = assemble(s, distributed_topology(n, n));
    EXPECT_LT(rel_diff(cf.J, solve_cumulative(ops, P, s.xi2).J), 1e-8);
    EXPECT_LT(rel_diff(ops.fisher_information(cf.w, s.xi2), cf.J), 1e-8);
  }
}

TEST(ClosedForms, DistributedPreconditions) {
  Gen gen(22);
  const auto s = testsupport::random_scenario(gen, 3, 3);
  try {
    closed_form_distributed(s, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PreconditionViolated);
  }
}

TEST(ClosedForms, PerfectCsiMatchesPencil) {
  Gen gen(23);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = gen.integer(1, 6);
    testsupport::ScenarioFlags f;
    f.perfect_csi = true;
    const auto s = testsupport::random_scenario(gen, n, n, f);
    const auto topo = testsupport::random_topology(gen, n, n, 0.4);
    const double P = std::pow(10.0, gen.uniform(-2.0, 3.0));
    EXPECT_LT(rel_diff(closed_form_perfect_csi(s, topo, P), solve_cumulative(assemble(s, topo), P, s.xi2).J), 1e-8);
  }
}

TEST(ClosedForms, HomogeneousJTildeMatchesMatrix) {
  Gen gen(24);
  for (int trial = 0; trial < 20; ++trial) {
    const auto spec = random_spec(gen, gen.integer(1, 8));
    const auto s = expand(spec);
    EXPECT_LT(rel_diff(homogeneous_j_tilde(spec, spec.N), detail::j_tilde(s)), 1e-12);
    EXPECT_LT(rel_diff(homogeneous_infinite_power_limit(spec), infinite_power_limit(s)), 1e-12);
  }
}

TEST(Limits, InfinitePowerLimitIsSupremum) {
  Gen gen(25);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = testsupport::random_scenario(gen, 4, 3);
    const double j0 = infinite_power_limit(s);
    const auto ops = assemble(s, connected_topology(3, 4));
    EXPECT_LT(solve_cumulative(ops, 1e3, s.xi2).J, j0);
    EXPECT_LT(rel_diff(solve_cumulative(ops, 1e10, s.xi2).J, j0), 1e-6);
  }
}

TEST(Degradation, ChannelUncertaintyNeverHelps) {
  Gen gen(26);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = gen.integer(1, 5);
    const auto s = testsupport::random_scenario(gen, n, n);
    auto perfect = s;
    perfect.Sigma_g = SymMatrix::zero(n);
    const auto topo = testsupport::random_topology(gen, n, n, 0.5);
    const double P = std::pow(10.0, gen.uniform(-2.0, 3.0));
    const double j_noisy = solve_cumulative(assemble(s, topo), P, s.xi2).J;
    const double j_perfect = solve_cumulative(assemble(perfect, topo), P, s.xi2).J;
    EXPECT_LE(j_noisy, j_perfect * (1.0 + 1e-10));
  }
}

TEST(PowerSavings, CycleVersusDistributed) {
  for (auto [gamma, k, m, expected] : {std::tuple{1.0, 2, 4, 0.25}, std::tuple{100.0, 50, 50, 0.0097}}) {
    HomogeneousSpec spec;
    spec.N = m;
    spec.K = k;
    spec.eta2 = gamma;  // h0 = sigma2 = 1
    const auto s = expand(spec);
    const auto dist = assemble(s, distributed_topology(m, m));
    const auto cyc = assemble(s, make_cycle_topology(m, k));
    const double P = 1e4;
    const double J = solve_cumulative(dist, P, s.xi2).J;
    const double saving = 1.0 - power_for_target(cyc, J, s.xi2) / P;
    EXPECT_NEAR(saving, (1.0 - 1.0 / k) / (gamma + 1.0), 1e-6);
    EXPECT_NEAR(saving, expected, 2e-4);
  }
}

TEST(Inputs, RejectsBadPower) {
  const auto s = make_scenario(Vector::Ones(1), Matrix::Identity(1, 1), Vector::Ones(1), 1.0, 1.0);
  const auto ops = assemble(s, distributed_topology(1, 1));
  EXPECT_THROW(solve_cumulative(ops, 0.0, 1.0), Error);
  EXPECT_THROW(solve_cumulative(ops, -1.0, 1.0), Error);
  EXPECT_THROW(power_for_target(ops, -1.0, 1.0), Error);
}
