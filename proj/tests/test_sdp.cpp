#include <gtest/gtest.h>

#include <vector>

#include "collab/sdp.hpp"
#include "test_support.hpp"

using namespace collab;
using testsupport::Gen;

namespace {

double trace_product(const SymMatrix& a, const SymMatrix& x) { return (a.mat().array() * x.mat().array()).sum(); }

}  // namespace

TEST(Sdp, TraceBoundFeasible) {
  std::vector<TraceConstraint> cons{{SymMatrix::identity(2), 1.0}};
  auto cert = sdp_feasible(cons, 2);
  ASSERT_EQ(cert.status, SdpStatus::Feasible);
  ASSERT_TRUE(cert.witness.has_value());
  EXPECT_LE(trace_product(cons[0].lhs, *cert.witness), 1.0 + 1e-7);
  // Minimizing the trace drives the witness toward X = 0.
  EXPECT_LT(cert.witness->mat().norm(), 1e-6);
}

TEST(Sdp, NegativeTraceInfeasible) {
  std::vector<TraceConstraint> cons{{SymMatrix::identity(2), -1.0}};
  auto cert = sdp_feasible(cons, 2);
  EXPECT_EQ(cert.status, SdpStatus::Infeasible);
  ASSERT_TRUE(cert.dual.has_value());
  EXPECT_GE(cert.dual->alpha, 0.0);
}

TEST(Sdp, ZeroMatrixWithNegativeBoundInfeasible) {
  std::vector<TraceConstraint> cons{{SymMatrix::zero(3), -1.0}, {SymMatrix::identity(3), 5.0}};
  EXPECT_EQ(sdp_feasible(cons, 3).status, SdpStatus::Infeasible);
}

TEST(Sdp, RankOneOptimum) {
  // minimize Tr[X] subject to X_11 >= 1, X_22 <= 3: optimum X = e1 e1^T.
  Matrix a0 = Matrix::Zero(3, 3);
  a0(0, 0) = -1.0;
  Matrix a1 = Matrix::Zero(3, 3);
  a1(1, 1) = 1.0;
  std::vector<TraceConstraint> cons{{SymMatrix(a0), -1.0}, {SymMatrix(a1), 3.0}};
  auto cert = sdp_feasible(cons, 3);
  ASSERT_EQ(cert.status, SdpStatus::Feasible);
  const Matrix& x = cert.witness->mat();
  EXPECT_NEAR(x(0, 0), 1.0, 1e-6);
  Eigen::SelfAdjointEigenSolver<Matrix> es(x);
  EXPECT_LE(es.eigenvalues()(1), 1e-6 * es.eigenvalues()(2));
  EXPECT_NEAR(cert.objective_value, 1.0, 1e-6);
  EXPECT_NEAR(cert.dual_objective, 1.0, 1e-6);
}

TEST(Sdp, InfeasibleWithKnownObjectiveBound) {
  // X_11 >= 2 and X_11 <= 1 cannot both hold.
  Matrix a0 = Matrix::Zero(2, 2);
  a0(0, 0) = -1.0;
  Matrix a1 = Matrix::Zero(2, 2);
  a1(0, 0) = 1.0;
  a1(1, 1) = 1.0;
  std::vector<TraceConstraint> cons{{SymMatrix(a0), -2.0}, {SymMatrix(a1), 1.0}};
  SdpOptions opt;
  opt.objective_bound = 1.0;  // Tr[X] <= 1 on the feasible set
  auto cert = sdp_feasible(cons, 2, opt);
  EXPECT_EQ(cert.status, SdpStatus::Infeasible);
  EXPECT_GT(cert.dual_objective, 1.0);
}

TEST(Sdp, WitnessSatisfiesConstraintsOnRandomInstances) {
  Gen gen(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = gen.integer(2, 6);
    std::vector<TraceConstraint> cons;
    // One indefinite constraint with a feasible rank-1 point, plus PSD budget constraints.
    Vector u = gen.gaussian(n);
    Matrix a0 = gen.gaussian(n, n);
    a0 = (a0 + a0.transpose()).eval();
    const double b0 = u.dot(a0 * u) + 0.5;
    cons.push_back({SymMatrix(a0), b0});
    for (int k = 0; k < 3; ++k) {
      Matrix p = gen.pd(n);
      cons.push_back({SymMatrix(p), u.dot(p * u) + 1.0});
    }
    auto cert = sdp_feasible(cons, n);
    ASSERT_EQ(cert.status, SdpStatus::Feasible);
    double bmax = 0.0;
    for (const auto& c : cons) bmax = std::max(bmax, std::abs(c.bound));
    // Violation is bounded relative to ||A_i||_F * max_j |b_j|.
    for (const auto& c : cons) {
      const double lhs = trace_product(c.lhs, *cert.witness);
      EXPECT_LE(lhs - c.bound, 1.01e-7 * c.lhs.mat().norm() * bmax);
    }
    EXPECT_TRUE(is_positive_semidefinite(*cert.witness, 1e-9));
  }
}

TEST(Sdp, MonotoneInBounds) {
  Gen gen(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3;
    Vector u = gen.gaussian(n);
    Matrix a0 = -u * u.transpose() + 0.3 * gen.pd(n);
    Matrix p = gen.pd(n);
    const double b1 = gen.uniform(0.5, 2.0);
    const double b0 = gen.uniform(-2.0, 0.5);
    std::vector<TraceConstraint> cons{{SymMatrix(a0), b0}, {SymMatrix(p), b1}};
    SdpOptions opt;
    opt.decision_only = true;
    const auto s1 = sdp_feasible(cons, n, opt).status;
    cons[0].bound += 0.3;
    cons[1].bound += 0.2;
    const auto s2 = sdp_feasible(cons, n, opt).status;
    if (s1 == SdpStatus::Feasible) EXPECT_EQ(s2, SdpStatus::Feasible);
  }
}

TEST(Sdp, RejectsEmptyConstraintList) {
  std::vector<TraceConstraint> cons;
  EXPECT_THROW(sdp_feasible(cons, 2), Error);
}
