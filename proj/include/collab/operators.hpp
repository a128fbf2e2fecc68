#pragma once

// Quadratic-form matrices over the nonzero collaboration weights w (column-major
// flattening of W): J(w) = w' Ojn w / (w' Ojd w + xi2), power = w' Op w.

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "collab/model.hpp"
#include "collab/numerics.hpp"

namespace collab {

struct OperatorSet {
  Index L = 0;
  Index M = 0;
  Index N = 0;
  double eta2 = 1.0;
  std::vector<CollaborationTopology::IndexPair> index_map;
  Matrix G;            // L x N, [G]_{l,n} = g_{m_l} 1[n = n_l]
  Vector t;            // G h
  SymMatrix Omega_JN;  // t t'
  SymMatrix Omega_JD;
  SymMatrix Omega_P;
  SymMatrix E_x;
  SymMatrix E_g;
  // Rows of w owned by node m and the matching block of E_x: Op_m = E_x[sensors, sensors] on those rows.
  std::vector<std::vector<Index>> node_rows;
  std::vector<Matrix> node_blocks;

  // Dense Op_m.
  SymMatrix Omega_P_node(Index m) const {
    Matrix out = Matrix::Zero(L, L);
    const auto& rows = node_rows[static_cast<std::size_t>(m)];
    out(rows, rows) = node_blocks[static_cast<std::size_t>(m)];
    return SymMatrix::from_trusted(std::move(out));
  }

  // w' Op_m w.
  double node_power(const Vector& w, Index m) const {
    const auto& rows = node_rows[static_cast<std::size_t>(m)];
    if (rows.empty()) return 0.0;
    const Vector wm = w(rows);
    return wm.dot(node_blocks[static_cast<std::size_t>(m)] * wm);
  }

  Vector node_powers(const Vector& w) const {
    Vector p(M);
    for (Index m = 0; m < M; ++m) p(m) = node_power(w, m);
    return p;
  }

  double total_power(const Vector& w) const { return w.dot(Omega_P.mat() * w); }

  // J(w) = (t'w)^2 / (w' Ojd w + xi2).
  double fisher_information(const Vector& w, double xi2) const {
    const double num = t.dot(w);
    return num * num / (w.dot(Omega_JD.mat() * w) + xi2);
  }

  // M x N weight matrix from the flattened vector.
  Matrix weight_matrix(const Vector& w) const {
    Matrix W = Matrix::Zero(M, N);
    for (Index l = 0; l < L; ++l) W(index_map[l].first, index_map[l].second) = w(l);
    return W;
  }
};

namespace detail {

inline void check_pair(const NetworkScenario& s, const CollaborationTopology& topo) {
  validate(s);
  require(topo.M() == s.M && topo.N() == s.N, ErrorCode::DimensionMismatch,
          "topology is " + std::to_string(topo.M()) + "x" + std::to_string(topo.N()) + " but scenario has M=" +
              std::to_string(s.M) + ", N=" + std::to_string(s.N));
}

inline OperatorSet assemble_common(const NetworkScenario& s, const CollaborationTopology& topo) {
  check_pair(s, topo);
  OperatorSet ops;
  ops.L = topo.L();
  ops.M = s.M;
  ops.N = s.N;
  ops.eta2 = s.eta2;
  ops.index_map = topo.index_map();
  const Matrix hh = s.h * s.h.transpose();
  ops.E_x = SymMatrix::from_trusted(s.Sigma.mat() + s.eta2 * (hh + s.Sigma_h.mat()));
  ops.E_g = SymMatrix::from_trusted(s.g * s.g.transpose() + s.Sigma_g.mat());

  const Index L = ops.L;
  ops.G = Matrix::Zero(L, s.N);
  for (Index l = 0; l < L; ++l) ops.G(l, ops.index_map[l].second) = s.g(ops.index_map[l].first);
  ops.t = ops.G * s.h;
  ops.Omega_JN = SymMatrix::from_trusted(ops.t * ops.t.transpose());

  ops.node_rows.assign(static_cast<std::size_t>(s.M), {});
  for (Index l = 0; l < L; ++l) ops.node_rows[static_cast<std::size_t>(ops.index_map[l].first)].push_back(l);
  ops.node_blocks.resize(static_cast<std::size_t>(s.M));
  Matrix op = Matrix::Zero(L, L);
  for (Index m = 0; m < s.M; ++m) {
    const auto& rows = ops.node_rows[static_cast<std::size_t>(m)];
    std::vector<Index> sensors;
    sensors.reserve(rows.size());
    for (Index l : rows) sensors.push_back(ops.index_map[l].second);
    ops.node_blocks[static_cast<std::size_t>(m)] = ops.E_x.mat()(sensors, sensors);
    op(rows, rows) = ops.node_blocks[static_cast<std::size_t>(m)];
  }
  ops.Omega_P = SymMatrix::from_trusted(std::move(op));
  return ops;
}

}  // namespace detail

inline OperatorSet assemble(const NetworkScenario& s, const CollaborationTopology& topo) {
  OperatorSet ops = detail::assemble_common(s, topo);
  const Index L = ops.L;
  Matrix jd(L, L);
  for (Index l = 0; l < L; ++l) {
    const auto [ml, nl] = ops.index_map[l];
    for (Index k = 0; k < L; ++k) {
      const auto [mk_, nk_] = ops.index_map[k];
      jd(k, l) = ops.E_g(mk_, ml) * ops.E_x(nk_, nl) - s.eta2 * ops.t(k) * ops.t(l);
    }
  }
  ops.Omega_JD = SymMatrix::from_trusted(0.5 * (jd + jd.transpose()));
  return ops;
}

// Ojd = G (Sigma + eta2 Sigma_h) G', valid only with perfect channel knowledge.
inline OperatorSet assemble_perfect_csi(const NetworkScenario& s, const CollaborationTopology& topo) {
  detail::check_pair(s, topo);
  require(s.Sigma_g.mat().cwiseAbs().maxCoeff() == 0.0, ErrorCode::SigmaGNotZero,
          "perfect-CSI assembly requires Sigma_g = 0");
  OperatorSet ops = detail::assemble_common(s, topo);
  const Matrix sigma_tilde = s.Sigma.mat() + s.eta2 * s.Sigma_h.mat();
  Matrix jd = ops.G * sigma_tilde * ops.G.transpose();
  ops.Omega_JD = SymMatrix::from_trusted(0.5 * (jd + jd.transpose()));
  return ops;
}

// Operators restricted to the links of a subset of nodes; rows of other nodes are dropped.
inline OperatorSet restrict_to_nodes(const OperatorSet& ops, const std::vector<bool>& keep_node) {
  std::vector<Index> rows;
  for (Index l = 0; l < ops.L; ++l)
    if (keep_node[static_cast<std::size_t>(ops.index_map[l].first)]) rows.push_back(l);
  std::vector<Index> new_index(static_cast<std::size_t>(ops.L), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) new_index[static_cast<std::size_t>(rows[i])] = static_cast<Index>(i);

  OperatorSet out;
  out.L = static_cast<Index>(rows.size());
  out.M = ops.M;
  out.N = ops.N;
  out.eta2 = ops.eta2;
  out.E_x = ops.E_x;
  out.E_g = ops.E_g;
  for (Index l : rows) out.index_map.push_back(ops.index_map[l]);
  out.G = ops.G(rows, Eigen::all);
  out.t = ops.t(rows);
  out.Omega_JN = SymMatrix::from_trusted(out.t * out.t.transpose());
  out.Omega_JD = SymMatrix::from_trusted(ops.Omega_JD.mat()(rows, rows));
  out.Omega_P = SymMatrix::from_trusted(ops.Omega_P.mat()(rows, rows));
  out.node_rows.resize(ops.node_rows.size());
  out.node_blocks.resize(ops.node_blocks.size());
  for (std::size_t m = 0; m < ops.node_rows.size(); ++m) {
    if (!keep_node[m]) {
      out.node_blocks[m] = Matrix(0, 0);
      continue;
    }
    for (Index l : ops.node_rows[m]) out.node_rows[m].push_back(new_index[static_cast<std::size_t>(l)]);
    out.node_blocks[m] = ops.node_blocks[m];
  }
  return out;
}

// Embed a weight vector of restricted operators back into the full index space.
inline Vector expand_weights(const OperatorSet& full, const OperatorSet& restricted, const Vector& w) {
  Vector out = Vector::Zero(full.L);
  std::size_t r = 0;
  for (Index l = 0; l < full.L && r < restricted.index_map.size(); ++l) {
    if (full.index_map[l] == restricted.index_map[r]) out(l) = w(static_cast<Index>(r++));
  }
  return out;
}

}  // namespace collab
