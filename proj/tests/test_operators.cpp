#include <gtest/gtest.h>

#include "collab/operators.hpp"
#include "scenario_gen.hpp"

using namespace collab;
using testsupport::Gen;

namespace {

// Matrix-form objective: (g'Wh)^2 / (Tr[Eg W Ex W'] - eta2 (g'Wh)^2 + xi2).
double matrix_form_J(const NetworkScenario& s, const Matrix& W) {
  const Matrix ex = s.Sigma.mat() + s.eta2 * (s.h * s.h.transpose() + s.Sigma_h.mat());
  const Matrix eg = s.g * s.g.transpose() + s.Sigma_g.mat();
  const double gwh = s.g.dot(W * s.h);
  return gwh * gwh / ((eg * W * ex * W.transpose()).trace() - s.eta2 * gwh * gwh + s.xi2);
}

}  // namespace

TEST(Assemble, DistributedDiagonalPower) {
  Vector h(3), d(3), g(3);
  h << 1.0, 2.0, 0.5;
  d << 0.5, 1.0, 2.0;
  g << 1.0, 1.0, 1.0;
  const auto s = make_scenario(h, Matrix(d.asDiagonal()), g, 0.7, 1.0);
  const auto ops = assemble(s, distributed_topology(3, 3));
  ASSERT_EQ(ops.L, 3);
  for (Index m = 0; m < 3; ++m) {
    EXPECT_NEAR(ops.Omega_P(m, m), d(m) + 0.7 * h(m) * h(m), 1e-14);
    for (Index k = 0; k < 3; ++k)
      if (k != m) EXPECT_EQ(ops.Omega_P(m, k), 0.0);
  }
}

TEST(Assemble, FourSensorsThreeNodesSixWeights) {
  // Three communicating nodes, one auxiliary sensor, three extra links.
  Eigen::MatrixXi a = Eigen::MatrixXi::Zero(3, 4);
  a(0, 0) = a(1, 1) = a(2, 2) = 1;
  a(0, 1) = 1;  // sensor 2 -> node 1
  a(1, 3) = 1;  // sensor 4 -> node 2
  a(2, 3) = 1;  // sensor 4 -> node 3
  Gen gen(1);
  const auto s = testsupport::random_scenario(gen, 4, 3);
  const auto ops = assemble(s, CollaborationTopology(a));
  ASSERT_EQ(ops.L, 6);
  // column-major: (0,0) (0,1) (1,1) (2,2) (1,3) (2,3)
  const std::vector<std::vector<Index>> rows{{0, 1}, {2, 4}, {3, 5}};
  const std::vector<std::vector<Index>> sensors{{0, 1}, {1, 3}, {2, 3}};
  for (Index m = 0; m < 3; ++m) {
    EXPECT_EQ(ops.node_rows[m], rows[m]);
    const Matrix op = ops.Omega_P_node(m).mat();
    for (Index k = 0; k < 6; ++k)
      for (Index l = 0; l < 6; ++l) {
        const bool in_block = ops.index_map[k].first == m && ops.index_map[l].first == m;
        const double expected = in_block ? ops.E_x(ops.index_map[k].second, ops.index_map[l].second) : 0.0;
        EXPECT_DOUBLE_EQ(op(k, l), expected);
      }
  }
  Matrix sum = Matrix::Zero(6, 6);
  for (Index m = 0; m < 3; ++m) sum += ops.Omega_P_node(m).mat();
  EXPECT_LT((sum - ops.Omega_P.mat()).norm(), 1e-14);
  EXPECT_TRUE(is_positive_definite(ops.Omega_P));
}

TEST(Assemble, DenominatorMatchesMatrixForm) {
  Gen gen(2);
  const auto s = testsupport::random_scenario(gen, 2, 2);
  const auto ops = assemble(s, connected_topology(2, 2));
  const Matrix ex = ops.E_x.mat();
  const Matrix eg = ops.E_g.mat();
  for (int trial = 0; trial < 100; ++trial) {
    const Vector w = gen.gaussian(4);
    const Matrix W = ops.weight_matrix(w);
    const double gwh = s.g.dot(W * s.h);
    const double lhs = w.dot(ops.Omega_JD.mat() * w) + s.eta2 * gwh * gwh;
    const double rhs = (eg * W * ex * W.transpose()).trace();
    EXPECT_NEAR(lhs, rhs, 1e-11 * std::max(1.0, std::abs(rhs)));
  }
}

TEST(Assemble, ExAndEgDefinitions) {
  Gen gen(3);
  const auto s = testsupport::random_scenario(gen, 3, 2);
  const auto ops = assemble(s, distributed_topology(2, 3));
  const Matrix ex = s.Sigma.mat() + s.eta2 * (s.h * s.h.transpose() + s.Sigma_h.mat());
  const Matrix eg = s.g * s.g.transpose() + s.Sigma_g.mat();
  EXPECT_LT((ops.E_x.mat() - ex).norm(), 1e-14);
  EXPECT_LT((ops.E_g.mat() - eg).norm(), 1e-14);
}

TEST(Assemble, RejectsMismatchedTopology) {
  Gen gen(4);
  const auto s = testsupport::random_scenario(gen, 3, 3);
  try {
    assemble(s, connected_topology(2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(PerfectCsi, ShortcutMatchesGeneralAssembly) {
  Gen gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3;
    testsupport::ScenarioFlags f;
    f.perfect_csi = true;
    f.perfect_ogi = trial % 2 == 0;
    const auto s = testsupport::random_scenario(gen, n, n, f);
    const auto topo = testsupport::random_topology(gen, n, n, 0.5);
    const auto general = assemble(s, topo);
    const auto shortcut = assemble_perfect_csi(s, topo);
    EXPECT_LE((general.Omega_JD.mat() - shortcut.Omega_JD.mat()).norm(), 1e-12 * general.Omega_JD.mat().norm());
  }
}

TEST(PerfectCsi, RejectsChannelUncertainty) {
  Gen gen(6);
  const auto s = testsupport::random_scenario(gen, 3, 3);
  try {
    assemble_perfect_csi(s, connected_topology(3, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SigmaGNotZero);
  }
}

TEST(Identities, PowerAndObjectiveOnRandomWeights) {
  Gen gen(7);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = gen.integer(2, 5);
    const int m = gen.integer(1, n);
    const auto s = testsupport::random_scenario(gen, n, m);
    const auto topo = testsupport::random_topology(gen, m, n, 0.4);
    const auto ops = assemble(s, topo);
    const Matrix ex = s.Sigma.mat() + s.eta2 * (s.h * s.h.transpose() + s.Sigma_h.mat());
    for (int k = 0; k < 5; ++k) {
      const Vector w = gen.gaussian(static_cast<int>(ops.L));
      const Matrix W = ops.weight_matrix(w);
      const Matrix pw = W * ex * W.transpose();
      EXPECT_NEAR(ops.total_power(w), pw.trace(), 1e-10 * pw.trace());
      for (Index node = 0; node < m; ++node) {
        EXPECT_NEAR(ops.node_power(w, node), pw(node, node), 1e-10 * std::max(1e-12, pw(node, node)));
        EXPECT_NEAR(w.dot(ops.Omega_P_node(node).mat() * w), pw(node, node), 1e-10 * std::max(1e-12, pw(node, node)));
      }
      const double j_ops = ops.fisher_information(w, s.xi2);
      const double j_mat = matrix_form_J(s, W);
      EXPECT_NEAR(j_ops, j_mat, 1e-10 * j_mat);
    }
  }
}

TEST(Identities, NumeratorIsRankOne) {
  Gen gen(8);
  const auto s = testsupport::random_scenario(gen, 4, 4);
  const auto ops = assemble(s, connected_topology(4, 4));
  Eigen::JacobiSVD<Matrix> svd(ops.Omega_JN.mat());
  EXPECT_LE(svd.singularValues()(1), 1e-10 * svd.singularValues()(0));
  EXPECT_LT((ops.Omega_JN.mat() - (ops.G * s.h) * (ops.G * s.h).transpose()).norm(), 1e-14);
}

TEST(Identities, DenominatorIsPositiveSemidefinite) {
  Gen gen(9);
  for (int trial = 0; trial < 30; ++trial) {
    const auto s = testsupport::random_scenario(gen, 4, 3);
    const auto ops = assemble(s, testsupport::random_topology(gen, 3, 4, 0.5));
    EXPECT_TRUE(is_positive_semidefinite(ops.Omega_JD, 1e-10));
  }
}

TEST(Restrict, DropsNodeRows) {
  Gen gen(10);
  const auto s = testsupport::random_scenario(gen, 3, 3);
  const auto ops = assemble(s, connected_topology(3, 3));
  const auto sub = restrict_to_nodes(ops, {true, false, true});
  EXPECT_EQ(sub.L, 6);
  const Vector w = gen.gaussian(6);
  const Vector full = expand_weights(ops, sub, w);
  EXPECT_NEAR(ops.fisher_information(full, 1.0), sub.fisher_information(w, 1.0), 1e-12);
  EXPECT_NEAR(ops.node_power(full, 2), sub.node_power(w, 2), 1e-12);
  EXPECT_EQ(ops.node_power(full, 1), 0.0);
}
