#pragma once

// Random scenarios and topologies for property tests.

#include "collab/model.hpp"
#include "test_support.hpp"

namespace testsupport {

struct ScenarioFlags {
  bool perfect_ogi = false;     // Sigma_h = 0
  bool perfect_csi = false;     // Sigma_g = 0
  bool diagonal_sigma = false;  // uncorrelated measurement noise
  bool diagonal_sigma_g = false;
};

inline collab::NetworkScenario random_scenario(Gen& gen, int N, int M, ScenarioFlags f = {}) {
  collab::NetworkScenario s;
  s.N = N;
  s.M = M;
  s.eta2 = gen.uniform(0.2, 2.0);
  s.xi2 = gen.uniform(0.3, 2.0);
  s.h = gen.vec(N, 0.3, 1.5);
  s.g = gen.vec(M, 0.3, 1.5);
  Matrix sigma = f.diagonal_sigma ? Matrix(gen.vec(N, 0.3, 1.5).asDiagonal()) : gen.pd(N, 0.2, 0.8);
  s.Sigma = collab::SymMatrix(sigma);
  s.Sigma_h = f.perfect_ogi ? collab::SymMatrix::zero(N) : collab::SymMatrix(gen.psd(N, 2, 0.1));
  if (f.perfect_csi) {
    s.Sigma_g = collab::SymMatrix::zero(M);
  } else if (f.diagonal_sigma_g) {
    s.Sigma_g = collab::SymMatrix(Matrix(gen.vec(M, 0.02, 0.3).asDiagonal()));
  } else {
    s.Sigma_g = collab::SymMatrix(gen.pd(M, 0.02, 0.1));
  }
  collab::validate(s);
  return s;
}

// Random adjacency with self-links; each off-diagonal link present with probability p.
inline collab::CollaborationTopology random_topology(Gen& gen, int M, int N, double p) {
  Eigen::MatrixXi a = Eigen::MatrixXi::Zero(M, N);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < N; ++j) a(i, j) = (i == j || gen.coin(p)) ? 1 : 0;
  return collab::CollaborationTopology(a);
}

}  // namespace testsupport
