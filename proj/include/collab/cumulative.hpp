#pragma once

// Cumulative power constraint: maximize J(w) subject to w' Op w <= P.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>

#include "collab/model.hpp"
#include "collab/numerics.hpp"
#include "collab/operators.hpp"

namespace collab {

struct SolveDiagnostics {
  int iterations = 0;      // bisection or Newton iterations
  int inner_steps = 0;     // inner Newton steps (barrier solvers)
  double rank_ratio = 0;   // second / first eigenvalue of the relaxed witness
  double gap = 0;          // certified relative optimality gap
  std::string note;
};

struct SolveResult {
  double J = 0.0;
  double D = 0.0;
  Vector w;                // flattened weights, column-major over the topology
  Matrix W;                // M x N
  Vector per_node_power;   // w' Op_m w
  double total_power = 0.0;
  std::string method;
  SolveDiagnostics diag;
};

inline SolveResult make_result(const OperatorSet& ops, Vector w, double J, std::string method) {
  SolveResult r;
  r.J = J;
  r.D = distortion_from_J(J, ops.eta2);
  r.W = ops.weight_matrix(w);
  r.per_node_power = ops.node_powers(w);
  r.total_power = r.per_node_power.sum();
  r.w = std::move(w);
  r.method = std::move(method);
  return r;
}

namespace detail {

inline void require_power(double P) {
  require(std::isfinite(P) && P > 0.0, ErrorCode::InvalidArgument, "power must be positive and finite");
}

inline void require_xi2(double xi2) {
  require(std::isfinite(xi2) && xi2 > 0.0, ErrorCode::InvalidArgument, "xi2 must be positive");
}

// Ojd + Op * xi2 / P.
inline SymMatrix cumulative_denominator(const OperatorSet& ops, double P, double xi2) {
  return SymMatrix::from_trusted(ops.Omega_JD.mat() + ops.Omega_P.mat() * (xi2 / P));
}

inline Vector scale_to_power(const OperatorSet& ops, Vector v, double P) {
  const double p = ops.total_power(v);
  require(p > 0.0, ErrorCode::NumericalFailure, "weight direction carries no power");
  canonical_sign(v);
  return v * std::sqrt(P / p);
}

}  // namespace detail

// Largest generalized eigenvalue of (Ojn, Ojd + Op / P_xi) with P_xi = P / xi2.
inline SolveResult solve_cumulative(const OperatorSet& ops, double P, double xi2) {
  detail::require_power(P);
  detail::require_xi2(xi2);
  require(is_positive_definite(ops.Omega_P), ErrorCode::NotPositiveDefinite, "Omega_P is not positive definite");
  const auto sol = max_generalized_eig(ops.Omega_JN, detail::cumulative_denominator(ops, P, xi2));
  Vector w = detail::scale_to_power(ops, sol.eigenvector, P);
  return make_result(ops, std::move(w), std::max(0.0, sol.eigenvalue), "pencil");
}

// J = t' B^{-1} t, w ∝ B^{-1} t with B = Ojd + Op / P_xi.
inline SolveResult solve_cumulative_rank1(const OperatorSet& ops, double P, double xi2) {
  detail::require_power(P);
  detail::require_xi2(xi2);
  const auto llt = try_cholesky(detail::cumulative_denominator(ops, P, xi2).mat());
  if (!llt) fail(ErrorCode::SingularSystem, "Ojd + Op/P_xi is not invertible");
  Vector u = llt->solve(ops.t);
  const double J = ops.t.dot(u);
  Vector w = detail::scale_to_power(ops, std::move(u), P);
  return make_result(ops, std::move(w), J, "rank1");
}

// Minimum power reaching J_target. With Op = L L' and L^{-1} Ojd L^{-T} = Q diag(lambda) Q',
// J(P) = sum_i u_i^2 / (lambda_i + xi2 / P) where u = Q' L^{-1} t; the scalar equation is solved by
// bisection in log(xi2 / P).
inline double power_for_target(const OperatorSet& ops, double J_target, double xi2) {
  require(std::isfinite(J_target) && J_target > 0.0, ErrorCode::InvalidArgument, "target J must be positive");
  detail::require_xi2(xi2);
  const auto red = detail::reduce_pencil(ops.Omega_JD, ops.Omega_P, "Omega_P");
  const Vector lam = red.eig.values.cwiseMax(0.0);
  const Vector u = red.eig.vectors.transpose() * red.llt.matrixL().solve(ops.t);
  const Vector u2 = u.cwiseAbs2();
  const auto J_at = [&](double x) { return (u2.array() / (lam.array() + x)).sum(); };

  // J(x) <= sum(u2) / x, so J(hi) < J_target.
  double hi = 2.0 * u2.sum() / J_target;
  require(hi > 0.0, ErrorCode::TargetUnreachable, "topology carries no signal");
  const double floor = 1e-14 * std::max(hi, lam.maxCoeff());
  double lo = hi;
  while (J_at(lo) < J_target) {
    lo *= 0.5;
    if (lo < floor) {
      fail(ErrorCode::TargetUnreachable, "target J=" + std::to_string(J_target) +
                                             " is at or above the topology's infinite-power limit");
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = std::sqrt(lo * hi);
    (J_at(mid) < J_target ? hi : lo) = mid;
  }
  return xi2 / (0.5 * (lo + hi));
}

// sup_w J(w) as P -> infinity: t' Ojd^+ t, or +inf when t leaves the range of Ojd.
inline double topology_limit(const OperatorSet& ops) {
  const auto es = symmetric_eig(ops.Omega_JD.mat());
  const Vector& lam = es.values;
  const double top = std::max(lam.cwiseAbs().maxCoeff(), 1e-300);
  const Vector proj = es.vectors.transpose() * ops.t;
  double J = 0.0;
  for (Index i = 0; i < lam.size(); ++i) {
    if (lam(i) <= 1e-12 * top) {
      if (std::abs(proj(i)) > 1e-9 * ops.t.norm()) return std::numeric_limits<double>::infinity();
      continue;
    }
    J += proj(i) * proj(i) / lam(i);
  }
  return J;
}

namespace detail {

inline Matrix sigma_tilde(const NetworkScenario& s) { return s.Sigma.mat() + s.eta2 * s.Sigma_h.mat(); }

// h' Sigma~^{-1} h.
inline double j_tilde(const NetworkScenario& s) {
  const auto llt = try_cholesky(sigma_tilde(s));
  if (!llt) fail(ErrorCode::SingularSystem, "Sigma + eta2 Sigma_h is singular");
  return s.h.dot(llt->solve(s.h));
}

inline bool is_zero(const SymMatrix& m) { return m.mat().cwiseAbs().maxCoeff() == 0.0; }

inline bool is_diagonal(const SymMatrix& m) {
  Matrix off = m.mat();
  off.diagonal().setZero();
  return off.cwiseAbs().maxCoeff() == 0.0;
}

}  // namespace detail

// Fully connected topology: J = J~ / (1 + (1 + eta2 J~) / Gc), W ∝ u v'.
inline SolveResult closed_form_connected(const NetworkScenario& s, double P) {
  validate(s);
  detail::require_power(P);
  const Matrix st = detail::sigma_tilde(s);
  const auto llt = try_cholesky(st);
  if (!llt) fail(ErrorCode::SingularSystem, "Sigma + eta2 Sigma_h is singular");
  const Vector v = llt->solve(s.h);
  const double jt = s.h.dot(v);
  const Matrix sg = s.Sigma_g.mat() + Matrix::Identity(s.M, s.M) * (s.xi2 / P);
  const Vector u = sg.llt().solve(s.g);
  const double gc = s.g.dot(u);
  const double J = jt / (1.0 + (1.0 + s.eta2 * jt) / gc);

  const Matrix ex = s.Sigma.mat() + s.eta2 * (s.h * s.h.transpose() + s.Sigma_h.mat());
  Matrix W = u * v.transpose();
  const double scale = std::sqrt(P / (u.squaredNorm() * v.dot(ex * v)));
  W *= scale;
  if (W.cwiseAbs().maxCoeff() > 0.0) {
    Index r, c;
    W.cwiseAbs().maxCoeff(&r, &c);
    if (W(r, c) < 0.0) W = -W;
  }
  SolveResult res;
  res.J = J;
  res.D = distortion_from_J(J, s.eta2);
  res.W = W;
  res.w = Eigen::Map<const Vector>(W.data(), W.size());
  res.per_node_power = (W * ex * W.transpose()).diagonal();
  res.total_power = res.per_node_power.sum();
  res.method = "closed_form_connected";
  return res;
}

// Homogeneous equicorrelated network on the cycle topology with connectivity spec.K (J only).
inline double homogeneous_cycle_J(const HomogeneousSpec& spec, double P) {
  validate(spec);
  detail::require_power(P);
  const double n = static_cast<double>(spec.N);
  const double k = static_cast<double>(spec.K);
  const double gamma = spec.gamma();
  const auto rho_t = [&](double t) { return spec.rho + (1.0 - spec.rho) / t; };
  const double ah = 1.0 / spec.alpha_h - 1.0;
  const double ag = 1.0 / spec.alpha_g - 1.0;
  const double p_xi = P / spec.xi2;
  const double inner = rho_t(n) + ah * (rho_t(n) + gamma / n) +
                       (1.0 / n) * (ag + 1.0 / (p_xi * spec.g0 * spec.g0 * spec.alpha_g)) *
                           (gamma + rho_t(k) + ah * (rho_t(k) + gamma / k));
  return (spec.h0 * spec.h0 / spec.sigma2) / inner;
}

inline SolveResult closed_form_cycle(const HomogeneousSpec& spec, double P) {
  const double J = homogeneous_cycle_J(spec, P);
  const double n = static_cast<double>(spec.N);
  const double k = static_cast<double>(spec.K);

  // w ∝ 1 over the M*K links; each node carries P / M.
  const double mu = spec.sigma_x2() * (1.0 + (k - 1.0) * spec.alpha_x());
  const double c = std::sqrt(P / (n * k * mu));
  const CollaborationTopology topo = make_cycle_topology(spec.N, spec.K);
  SolveResult res;
  res.J = J;
  res.D = distortion_from_J(J, spec.eta2);
  res.w = Vector::Constant(topo.L(), c);
  res.W = Matrix::Zero(spec.N, spec.N);
  for (const auto& [m, j] : topo.index_map()) res.W(m, j) = c;
  res.per_node_power = Vector::Constant(spec.N, P / n);
  res.total_power = P;
  res.method = "closed_form_cycle";
  return res;
}

// Distributed topology with perfect gains and uncorrelated noise.
inline SolveResult closed_form_distributed(const NetworkScenario& s, double P) {
  validate(s);
  detail::require_power(P);
  require(detail::is_diagonal(s.Sigma), ErrorCode::PreconditionViolated, "closed_form_distributed needs diagonal Sigma");
  require(detail::is_zero(s.Sigma_h) && detail::is_zero(s.Sigma_g), ErrorCode::PreconditionViolated,
          "closed_form_distributed needs Sigma_h = Sigma_g = 0");
  const double p_xi = P / s.xi2;
  double J = 0.0;
  Vector w(s.M);
  Vector sx2(s.M);
  for (Index m = 0; m < s.M; ++m) {
    const double s2 = s.Sigma(m, m);
    const double hm = s.h(m);
    const double gm = s.g(m);
    const double gam = s.eta2 * hm * hm / s2;
    J += (hm * hm / s2) / (1.0 + (1.0 + gam) / (p_xi * gm * gm));
    sx2(m) = s2 + s.eta2 * hm * hm;
    // w ∝ (Ojd + Op / P_xi)^{-1} t, all diagonal.
    w(m) = gm * hm / (gm * gm * s2 + sx2(m) / p_xi);
  }
  const double p = (w.array().square() * sx2.array()).sum();
  if (p > 0.0) w *= std::sqrt(P / p);
  canonical_sign(w);
  SolveResult res;
  res.J = J;
  res.D = distortion_from_J(J, s.eta2);
  res.w = w;
  res.W = Matrix::Zero(s.M, s.N);
  for (Index m = 0; m < s.M; ++m) res.W(m, m) = w(m);
  res.per_node_power = w.array().square() * sx2.array();
  res.total_power = res.per_node_power.sum();
  res.method = "closed_form_distributed";
  return res;
}

// Perfect channel knowledge on any topology: J = h' (Sigma~ + Gamma_P / P_xi)^{-1} h
// with Gamma_P = (G' Op^{-1} G)^{-1}.
inline double closed_form_perfect_csi(const NetworkScenario& s, const CollaborationTopology& topo, double P) {
  detail::require_power(P);
  const OperatorSet ops = assemble_perfect_csi(s, topo);
  const auto lop = try_cholesky(ops.Omega_P.mat());
  require(lop.has_value(), ErrorCode::NotPositiveDefinite, "Omega_P is not positive definite");
  const Matrix inv_gamma = ops.G.transpose() * lop->solve(ops.G);
  const auto lg = try_cholesky(inv_gamma);
  if (!lg) fail(ErrorCode::SingularSystem, "G' Op^{-1} G is singular (some sensor reaches no node)");
  const Matrix gamma = lg->solve(Matrix::Identity(s.N, s.N));
  const Matrix a = detail::sigma_tilde(s) + gamma * (s.xi2 / P);
  return s.h.dot(a.llt().solve(s.h));
}

// J0: fully connected, infinite power. Gc0 = g' Sigma_g^{-1} g, +inf when g leaves the
// range of Sigma_g (then J0 = J~).
inline double infinite_power_limit(const NetworkScenario& s) {
  validate(s);
  const double jt = detail::j_tilde(s);
  const auto es = symmetric_eig(s.Sigma_g.mat());
  const Vector& lam = es.values;
  const double top = lam.cwiseAbs().maxCoeff();
  const Vector proj = es.vectors.transpose() * s.g;
  double gc0 = 0.0;
  for (Index i = 0; i < lam.size(); ++i) {
    if (top == 0.0 || lam(i) <= 1e-12 * top) {
      if (std::abs(proj(i)) > 1e-12 * std::max(1.0, s.g.norm())) return jt;
      continue;
    }
    gc0 += proj(i) * proj(i) / lam(i);
  }
  return jt / (1.0 + (1.0 + s.eta2 * jt) / gc0);
}

inline double infinite_power_distortion(const NetworkScenario& s) {
  return distortion_from_J(infinite_power_limit(s), s.eta2);
}

// Homogeneous J~ = h' Sigma~^{-1} h in closed form (Sigma~ = a I + b 1 1').
inline double homogeneous_j_tilde(const HomogeneousSpec& spec, Index M) {
  const double n = static_cast<double>(M);
  const double a = spec.sigma2 * (1.0 - spec.rho) + spec.eta2 * spec.h0 * spec.h0 * (1.0 - spec.alpha_h);
  const double b = spec.sigma2 * spec.rho;
  return spec.h0 * spec.h0 * spec.alpha_h * n / (a + b * n);
}

// Homogeneous J0 without forming N x N matrices.
inline double homogeneous_infinite_power_limit(const HomogeneousSpec& spec) {
  validate(spec);
  const double jt = homogeneous_j_tilde(spec, spec.N);
  if (spec.alpha_g >= 1.0) return jt;
  const double gc0 = static_cast<double>(spec.N) * spec.alpha_g / (1.0 - spec.alpha_g);
  return jt / (1.0 + (1.0 + spec.eta2 * jt) / gc0);
}

}  // namespace collab
