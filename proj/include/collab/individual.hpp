#pragma once

// Per-node power constraints: maximize J(w) subject to w' Op_m w <= P_m for every node.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "collab/cumulative.hpp"
#include "collab/model.hpp"
#include "collab/numerics.hpp"
#include "collab/operators.hpp"
#include "collab/sdp.hpp"

namespace collab {

struct IndividualConstraints {
  Vector P;  // per-node budgets, nonnegative, at least one positive
};

inline void validate(const IndividualConstraints& c, Index M) {
  require(c.P.size() == M, ErrorCode::DimensionMismatch,
          "expected " + std::to_string(M) + " budgets, got " + std::to_string(c.P.size()));
  require(c.P.allFinite() && c.P.minCoeff() >= 0.0, ErrorCode::InvalidArgument, "budgets must be nonnegative");
  require(c.P.sum() > 0.0, ErrorCode::InvalidArgument, "at least one budget must be positive");
}

// maximize (a't)^2 / (sum b t^2 + xi2) over 0 <= t <= c.
struct OrderedFractionalProblem {
  Vector a;
  Vector b;
  Vector c;
  double xi2 = 1.0;
};

struct OrderedFractionalSolution {
  double F = 0.0;
  Vector t;                 // original order
  Index m_tilde = 0;        // number of saturated entries
  std::vector<Index> order; // indices by descending a / (b c)
};

inline OrderedFractionalSolution solve_ordered_fractional(const OrderedFractionalProblem& p) {
  const Index M = p.a.size();
  require(M > 0 && p.b.size() == M && p.c.size() == M, ErrorCode::DimensionMismatch,
          "a, b, c must have equal nonzero length");
  require(p.a.minCoeff() > 0.0 && p.b.minCoeff() >= 0.0 && p.c.minCoeff() >= 0.0 && p.c.allFinite(),
          ErrorCode::InvalidArgument, "need a > 0, b >= 0, c >= 0");
  require(p.xi2 > 0.0, ErrorCode::InvalidArgument, "xi2 must be positive");

  const auto ratio = [&](Index m) {
    const double den = p.b(m) * p.c(m);
    return den == 0.0 ? std::numeric_limits<double>::infinity() : p.a(m) / den;
  };
  OrderedFractionalSolution sol;
  sol.order.resize(static_cast<std::size_t>(M));
  std::iota(sol.order.begin(), sol.order.end(), Index{0});
  std::stable_sort(sol.order.begin(), sol.order.end(), [&](Index x, Index y) { return ratio(x) > ratio(y); });

  // Prefix sums in sorted order: num_k = sum a c, den_k = sum b c^2 + xi2.
  Vector num(M + 1), den(M + 1);
  num(0) = 0.0;
  den(0) = p.xi2;
  for (Index k = 0; k < M; ++k) {
    const Index m = sol.order[static_cast<std::size_t>(k)];
    num(k + 1) = num(k) + p.a(m) * p.c(m);
    den(k + 1) = den(k) + p.b(m) * p.c(m) * p.c(m);
  }
  const auto phi = [&](Index k) { return num(k) == 0.0 ? std::numeric_limits<double>::infinity() : den(k) / num(k); };

  Index mt = 1;
  for (Index k = M; k >= 2; --k) {
    const Index m = sol.order[static_cast<std::size_t>(k - 1)];
    const double free_t = p.b(m) == 0.0 ? std::numeric_limits<double>::infinity() : phi(k - 1) * p.a(m) / p.b(m);
    if (free_t >= p.c(m)) {
      mt = k;
      break;
    }
  }
  sol.m_tilde = mt;

  sol.t = Vector::Zero(M);
  double tail = 0.0;
  for (Index k = 0; k < M; ++k) {
    const Index m = sol.order[static_cast<std::size_t>(k)];
    if (k < mt) {
      sol.t(m) = p.c(m);
    } else {
      sol.t(m) = phi(mt) * p.a(m) / p.b(m);
      tail += p.a(m) * p.a(m) / p.b(m);
    }
  }
  sol.F = num(mt) * num(mt) / den(mt) + tail;
  return sol;
}

inline double ordered_fractional_objective(const OrderedFractionalProblem& p, const Vector& t) {
  const double n = p.a.dot(t);
  return n * n / ((p.b.array() * t.array().square()).sum() + p.xi2);
}

struct IndividualOptions {
  int max_bisection = 60;
  double bisection_tolerance = 1e-9;  // relative bracket width
  double rank_threshold = 1e-6;       // second / first eigenvalue of the witness
  double dual_gap_tolerance = 1e-10;  // relative gap for the dual solver
  int max_dual_newton = 400;
};

namespace detail {

inline std::vector<bool> positive_budget_nodes(const Vector& budgets) {
  std::vector<bool> keep(static_cast<std::size_t>(budgets.size()));
  for (Index m = 0; m < budgets.size(); ++m) keep[static_cast<std::size_t>(m)] = budgets(m) > 0.0;
  return keep;
}

inline std::vector<Index> active_nodes(const OperatorSet& ops) {
  std::vector<Index> nodes;
  for (Index m = 0; m < ops.M; ++m)
    if (!ops.node_rows[static_cast<std::size_t>(m)].empty()) nodes.push_back(m);
  return nodes;
}

// Largest multiple of v meeting every budget; 0 if v carries no power on any active node.
inline Vector scale_to_budgets(const OperatorSet& ops, const Vector& v, const Vector& budgets) {
  double c2 = std::numeric_limits<double>::infinity();
  for (Index m : active_nodes(ops)) {
    const double p = ops.node_power(v, m);
    if (p > 0.0) c2 = std::min(c2, budgets(m) / p);
  }
  if (!std::isfinite(c2)) return Vector::Zero(v.size());
  Vector w = v * std::sqrt(c2);
  canonical_sign(w);
  return w;
}

inline SolveResult finish_individual(const OperatorSet& full, const OperatorSet& sub, const Vector& w_sub,
                                     double xi2, std::string method, SolveDiagnostics diag) {
  Vector w = expand_weights(full, sub, w_sub);
  const double J = full.fisher_information(w, xi2);
  SolveResult r = make_result(full, std::move(w), J, std::move(method));
  r.diag = std::move(diag);
  return r;
}

}  // namespace detail

// Exact solver through the Lagrangian dual
//   min_{lambda >= 0, P' lambda = 1}  t' (Ojd + xi2 sum_m lambda_m Op_m)^{-1} t,
// whose value equals the primal optimum. Each iterate gives an upper bound; the
// maximizer direction u = B^{-1} t scaled onto the budgets gives a lower bound.
inline SolveResult solve_individual_dual(const OperatorSet& ops, const Vector& budgets, double xi2,
                                         const IndividualOptions& opt = {}) {
  validate(IndividualConstraints{budgets}, ops.M);
  detail::require_xi2(xi2);
  const OperatorSet sub = restrict_to_nodes(ops, detail::positive_budget_nodes(budgets));
  const std::vector<Index> nodes = detail::active_nodes(sub);
  const Index K = static_cast<Index>(nodes.size());
  const Index L = sub.L;

  Vector inv_p(K);
  for (Index k = 0; k < K; ++k) inv_p(k) = 1.0 / budgets(nodes[static_cast<std::size_t>(k)]);

  struct Eval {
    double f = 0.0;
    Vector grad;
    Matrix hess;
    Vector u;
    bool ok = false;
  };
  const auto evaluate = [&](const Vector& s, bool with_hessian) {
    Eval e;
    Matrix B = sub.Omega_JD.mat();
    for (Index k = 0; k < K; ++k) {
      const auto& rows = sub.node_rows[static_cast<std::size_t>(nodes[static_cast<std::size_t>(k)])];
      B(rows, rows) += (xi2 * s(k) * inv_p(k)) * sub.node_blocks[static_cast<std::size_t>(nodes[static_cast<std::size_t>(k)])];
    }
    Eigen::LLT<Matrix> llt(B);
    if (llt.info() != Eigen::Success) return e;
    e.u = llt.solve(sub.t);
    e.f = sub.t.dot(e.u);
    e.grad.resize(K);
    Matrix V = Matrix::Zero(L, K);
    for (Index k = 0; k < K; ++k) {
      const Index m = nodes[static_cast<std::size_t>(k)];
      const auto& rows = sub.node_rows[static_cast<std::size_t>(m)];
      const Vector um = e.u(rows);
      const Vector vm = sub.node_blocks[static_cast<std::size_t>(m)] * um;
      V(rows, k) = vm;
      e.grad(k) = -xi2 * inv_p(k) * um.dot(vm);
    }
    if (with_hessian) {
      const Matrix Y = llt.solve(V);
      e.hess = 2.0 * xi2 * xi2 * inv_p.asDiagonal() * (V.transpose() * Y) * inv_p.asDiagonal();
      e.hess = 0.5 * (e.hess + e.hess.transpose());
    }
    e.ok = std::isfinite(e.f);
    return e;
  };

  const auto lower_bound = [&](const Vector& u, Vector& w_out) {
    w_out = detail::scale_to_budgets(sub, u, budgets);
    return sub.fisher_information(w_out, xi2);
  };

  Vector s = Vector::Constant(K, 1.0 / static_cast<double>(K));
  Eval cur = evaluate(s, true);
  require(cur.ok, ErrorCode::NumericalFailure, "dual solver: initial system is singular");
  Vector best_w;
  double best_lo = lower_bound(cur.u, best_w);
  double best_hi = cur.f;

  SolveDiagnostics diag;
  double mu = 0.1 * cur.f / static_cast<double>(K);
  const double mu_final = 1e-14 * cur.f / static_cast<double>(K);
  int steps = 0;
  const auto gap = [&] { return (best_hi - best_lo) / best_hi; };
  while (steps < opt.max_dual_newton && gap() > opt.dual_gap_tolerance) {
    // Centre for the current mu.
    for (int inner = 0; inner < 50 && steps < opt.max_dual_newton; ++inner, ++steps) {
      const Vector g = cur.grad - mu * s.cwiseInverse();
      Matrix kkt = Matrix::Zero(K + 1, K + 1);
      kkt.topLeftCorner(K, K) = cur.hess;
      kkt.topLeftCorner(K, K).diagonal() += mu * s.array().square().inverse().matrix();
      kkt.block(0, K, K, 1).setOnes();
      kkt.block(K, 0, 1, K).setOnes();
      Vector rhs = Vector::Zero(K + 1);
      rhs.head(K) = -g;
      const Vector sol = kkt.partialPivLu().solve(rhs);
      const Vector ds = sol.head(K);
      const double dec2 = -g.dot(ds);
      if (!std::isfinite(dec2) || dec2 <= 1e-14 * std::max(cur.f, mu)) break;

      double step = 1.0;
      for (Index k = 0; k < K; ++k)
        if (ds(k) < 0.0) step = std::min(step, -0.99 * s(k) / ds(k));
      const double phi0 = cur.f - mu * s.array().log().sum();
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls) {
        const Vector trial = s + step * ds;
        Eval e = evaluate(trial, true);
        if (e.ok) {
          const double phi = e.f - mu * trial.array().log().sum();
          if (phi <= phi0 - 0.25 * step * dec2 || (ls > 40 && phi <= phi0)) {
            s = trial;
            cur = std::move(e);
            moved = true;
            break;
          }
        }
        step *= 0.5;
      }
      best_hi = std::min(best_hi, cur.f);
      Vector w;
      const double lo = lower_bound(cur.u, w);
      if (lo > best_lo) {
        best_lo = lo;
        best_w = std::move(w);
      }
      if (!moved || gap() <= opt.dual_gap_tolerance) break;
    }
    if (mu <= mu_final) break;
    mu = std::max(mu * 0.1, mu_final);
  }
  diag.iterations = steps;
  diag.gap = gap();
  diag.note = "dual";
  require(diag.gap <= 1e-6, ErrorCode::DidNotConverge,
          "dual solver stalled with relative gap " + std::to_string(diag.gap));
  return detail::finish_individual(ops, sub, best_w, xi2, "dual", std::move(diag));
}

namespace detail {

inline std::vector<TraceConstraint> sdr_constraints(const OperatorSet& sub, const std::vector<Index>& nodes,
                                                    const Vector& budgets, double J, double xi2) {
  std::vector<TraceConstraint> cons;
  cons.reserve(nodes.size() + 1);
  cons.push_back({SymMatrix::from_trusted(J * sub.Omega_JD.mat() - sub.Omega_JN.mat()), -J * xi2});
  for (Index m : nodes) cons.push_back({sub.Omega_P_node(m), budgets(m)});
  return cons;
}

}  // namespace detail

// Semidefinite relaxation with bisection over J. Feasibility of
//   { X >= 0 : Tr[(J Ojd - Ojn) X] <= -J xi2, Tr[Op_m X] <= P_m }
// is monotone in J; the last feasible set is solved for minimum total power and
// w is recovered from the null space of the dual matrix.
inline SolveResult solve_individual_sdr(const OperatorSet& ops, const Vector& budgets, double xi2,
                                        const IndividualOptions& opt = {}) {
  validate(IndividualConstraints{budgets}, ops.M);
  detail::require_xi2(xi2);
  require(is_positive_definite(ops.Omega_P), ErrorCode::NotPositiveDefinite, "Omega_P is not positive definite");
  const OperatorSet sub = restrict_to_nodes(ops, detail::positive_budget_nodes(budgets));
  const std::vector<Index> nodes = detail::active_nodes(sub);
  const double total = budgets.sum();

  // Bracket: a scaled cumulative direction is feasible; the cumulative optimum bounds from above.
  const auto cum = solve_cumulative_rank1(sub, total, xi2);
  const Vector w_lo = detail::scale_to_budgets(sub, cum.w, budgets);
  double lo = sub.fisher_information(w_lo, xi2);
  double hi = cum.J * (1.0 + 1e-9);

  SdpOptions sdp;
  sdp.decision_only = true;
  sdp.objective_bound = total;
  SolveDiagnostics diag;
  std::vector<double> warm;
  std::optional<SdpFeasibilityCertificate> last_feasible;
  for (int it = 0; it < opt.max_bisection && (hi - lo) > opt.bisection_tolerance * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const auto cons = detail::sdr_constraints(sub, nodes, budgets, mid, xi2);
    sdp.warm_start = warm;
    SdpFeasibilityCertificate cert;
    try {
      cert = sdp_feasible(cons, sub.L, sdp, &sub.Omega_P);
    } catch (const Error& e) {
      // Near the optimum the feasible set shrinks to a point; stop once the bracket is tight enough.
      if (e.code() != ErrorCode::NumericalFailure) throw;
      if ((hi - lo) > 1e-6 * hi) fail(ErrorCode::SdpFailure, std::string("bisection step failed: ") + e.what());
      diag.note = "bisection stopped on an ill-conditioned midpoint; ";
      break;
    }
    diag.inner_steps += cert.newton_steps;
    ++diag.iterations;
    if (cert.status == SdpStatus::Feasible) {
      lo = mid;
      warm = cert.multipliers;
      last_feasible = std::move(cert);
    } else {
      hi = mid;
    }
  }

  // Witness eigenvalue ratio and the null vector of Z: (Z + alpha t t') x = alpha t (t'x).
  const auto recover_from = [&](const SdpFeasibilityCertificate& cert) -> std::optional<std::pair<Vector, double>> {
    if (cert.status != SdpStatus::Feasible || !cert.witness || !cert.dual) return std::nullopt;
    const auto es = symmetric_eig(cert.witness->mat());
    const Vector& ev = es.values;
    const double top = ev(ev.size() - 1);
    const double ratio = ev.size() > 1 && top > 0.0 ? std::max(0.0, ev(ev.size() - 2)) / top : 0.0;
    const double alpha = cert.dual->alpha;
    const auto llt = try_cholesky(cert.dual->Z.mat() + alpha * sub.Omega_JN.mat());
    Vector v = alpha > 0.0 && llt ? Vector(llt->solve(sub.t)) : Vector(es.vectors.col(ev.size() - 1));
    return std::make_pair(std::move(v), ratio);
  };
  SdpOptions final_opt;
  final_opt.objective_bound = total;
  final_opt.warm_start = warm;
  const auto solve_at = [&](double J) -> std::optional<std::pair<Vector, double>> {
    const auto cons = detail::sdr_constraints(sub, nodes, budgets, J, xi2);
    try {
      const auto cert = sdp_feasible(cons, sub.L, final_opt, &sub.Omega_P);
      diag.inner_steps += cert.newton_steps;
      return recover_from(cert);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NumericalFailure) throw;
      return std::nullopt;
    }
  };
  const auto acceptable = [&](const auto& r) { return r && r->second <= opt.rank_threshold; };

  // Full solve at the lower bound, then the last bisection certificate, then a slightly lower target.
  auto rec = solve_at(lo);
  if (!acceptable(rec) && last_feasible) {
    auto alt = recover_from(*last_feasible);
    if (acceptable(alt) || !rec) rec = std::move(alt);
  }
  if (!acceptable(rec)) {
    auto alt = solve_at(lo * (1.0 - 1e-6));
    if (alt) rec = std::move(alt);
  }
  if (!rec) fail(ErrorCode::SdpFailure, "final relaxation at the bisection lower bound was not certified feasible");
  diag.rank_ratio = rec->second;
  if (rec->second > opt.rank_threshold)
    fail(ErrorCode::RecoveryNotRank1, "relaxed witness eigenvalue ratio " + std::to_string(rec->second) +
                                          " exceeds " + std::to_string(opt.rank_threshold));
  Vector w = detail::scale_to_budgets(sub, rec->first, budgets);
  const double J_rec = sub.fisher_information(w, xi2);
  // Keep the bracket's feasible direction if recovery lost accuracy.
  if (J_rec < sub.fisher_information(w_lo, xi2)) w = w_lo;
  diag.gap = (hi - sub.fisher_information(w, xi2)) / hi;
  diag.note += "sdr";
  return detail::finish_individual(ops, sub, w, xi2, "sdr", std::move(diag));
}

enum class IndividualMethod { Sdr, Dual, Auto };

inline constexpr Index kAutoSdrMaxLinks = 64;

// Auto: the relaxation by bisection for small link counts, otherwise (or if the
// barrier loses precision) its dual function minimized directly.
inline SolveResult solve_individual(const OperatorSet& ops, const Vector& budgets, double xi2,
                                    IndividualMethod method = IndividualMethod::Auto,
                                    const IndividualOptions& opt = {}) {
  switch (method) {
    case IndividualMethod::Sdr:
      return solve_individual_sdr(ops, budgets, xi2, opt);
    case IndividualMethod::Dual:
      return solve_individual_dual(ops, budgets, xi2, opt);
    case IndividualMethod::Auto:
      break;
  }
  if (ops.L > kAutoSdrMaxLinks) return solve_individual_dual(ops, budgets, xi2, opt);
  try {
    return solve_individual_sdr(ops, budgets, xi2, opt);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SdpFailure && e.code() != ErrorCode::NumericalFailure) throw;
    SolveResult r = solve_individual_dual(ops, budgets, xi2, opt);
    r.diag.note = std::string("sdr failed (") + e.what() + "); " + r.diag.note;
    return r;
  }
}

// Distributed topology, perfect gains, uncorrelated noise: J = F_opt with
// a = g h, b = g^2 sigma^2, c = sqrt(P / (sigma^2 + eta2 h^2)); w = t_opt.
inline SolveResult closed_form_indiv_distributed_perfect(const NetworkScenario& s, const Vector& budgets) {
  validate(s);
  validate(IndividualConstraints{budgets}, s.M);
  require(s.M == s.N, ErrorCode::PreconditionViolated, "distributed closed form needs M = N");
  require(detail::is_diagonal(s.Sigma), ErrorCode::PreconditionViolated, "needs diagonal Sigma");
  require(detail::is_zero(s.Sigma_h) && detail::is_zero(s.Sigma_g), ErrorCode::PreconditionViolated,
          "needs Sigma_h = Sigma_g = 0");
  require(s.h.minCoeff() > 0.0 && s.g.minCoeff() > 0.0, ErrorCode::PreconditionViolated, "needs positive h and g");
  OrderedFractionalProblem p;
  const Vector s2 = s.Sigma.mat().diagonal();
  p.a = s.g.cwiseProduct(s.h);
  p.b = s.g.array().square() * s2.array();
  p.c = (budgets.array() / (s2.array() + s.eta2 * s.h.array().square())).sqrt();
  p.xi2 = s.xi2;
  const auto sol = solve_ordered_fractional(p);
  const OperatorSet ops = assemble(s, distributed_topology(s.M, s.N));
  SolveResult r = make_result(ops, sol.t, sol.F, "closed_form_indiv_distributed");
  r.diag.iterations = static_cast<int>(sol.m_tilde);
  return r;
}

namespace detail {

inline OrderedFractionalSolution homog_distributed_fractional(const HomogeneousSpec& spec, const Vector& budgets) {
  const double sx2 = spec.sigma_x2();
  OrderedFractionalProblem p;
  const Index M = budgets.size();
  p.a = Vector::Constant(M, std::sqrt(spec.alpha_g * spec.alpha_h) * spec.g0 * spec.h0);
  p.b = Vector::Constant(M, sx2 * spec.g0 * spec.g0 * (1.0 - spec.alpha_g * spec.alpha_x()));
  p.c = (budgets.array() / sx2).sqrt();
  p.xi2 = spec.xi2;
  return solve_ordered_fractional(p);
}

inline double homog_distributed_J(const HomogeneousSpec& spec, double F) {
  return 1.0 / (1.0 / F + spec.rho * spec.sigma2 / (spec.alpha_h * spec.h0 * spec.h0));
}

}  // namespace detail

// Homogeneous equicorrelated network, distributed topology, per-node budgets.
inline SolveResult closed_form_homog_distributed(const HomogeneousSpec& spec, const Vector& budgets) {
  validate(spec);
  validate(IndividualConstraints{budgets}, spec.N);
  const auto sol = detail::homog_distributed_fractional(spec, budgets);
  const double J = detail::homog_distributed_J(spec, sol.F);
  const OperatorSet ops = assemble(expand(spec), distributed_topology(spec.N, spec.N));
  SolveResult r = make_result(ops, sol.t, J, "closed_form_homog_distributed");
  r.diag.iterations = static_cast<int>(sol.m_tilde);
  return r;
}

// J only, for networks too large to assemble (no N x N matrices).
inline double homogeneous_indiv_distributed_J(const HomogeneousSpec& spec, const Vector& budgets) {
  validate(spec);
  return detail::homog_distributed_J(spec, detail::homog_distributed_fractional(spec, budgets).F);
}

namespace detail {

inline OrderedFractionalSolution connected_fractional(const Vector& g, const Vector& sg_diag, const Vector& budgets,
                                                      double xi2) {
  OrderedFractionalProblem p;
  p.a = g;
  p.b = sg_diag;
  p.c = budgets.cwiseSqrt();
  p.xi2 = xi2;
  return solve_ordered_fractional(p);
}

inline double connected_indiv_J(double jt, double eta2, double F) { return jt / (1.0 + (1.0 + eta2 * jt) / F); }

}  // namespace detail

// Fully connected topology, diagonal Sigma_g: J = J~ / (1 + (1 + eta2 J~) / F_opt(g, diag Sigma_g, sqrt P)),
// W = kappa t_opt v' with v = Sigma~^{-1} h.
inline SolveResult closed_form_indiv_connected(const NetworkScenario& s, const Vector& budgets) {
  validate(s);
  validate(IndividualConstraints{budgets}, s.M);
  require(detail::is_diagonal(s.Sigma_g), ErrorCode::PreconditionViolated, "needs diagonal Sigma_g");
  require(s.g.minCoeff() > 0.0, ErrorCode::PreconditionViolated, "needs positive channel gains");
  const auto sol = detail::connected_fractional(s.g, s.Sigma_g.mat().diagonal(), budgets, s.xi2);
  const Vector v = solve_pd(SymMatrix::from_trusted(detail::sigma_tilde(s)), s.h, "Sigma + eta2 Sigma_h");
  const double jt = s.h.dot(v);
  const double J = detail::connected_indiv_J(jt, s.eta2, sol.F);
  const double kappa = 1.0 / std::sqrt(jt * (1.0 + s.eta2 * jt));
  const Matrix W = kappa * sol.t * v.transpose();
  const OperatorSet ops = assemble(s, connected_topology(s.M, s.N));
  Vector w = Eigen::Map<const Vector>(W.data(), W.size());
  SolveResult r = make_result(ops, std::move(w), J, "closed_form_indiv_connected");
  r.diag.iterations = static_cast<int>(sol.m_tilde);
  return r;
}

// J only, homogeneous spec, fully connected.
inline double homogeneous_indiv_connected_J(const HomogeneousSpec& spec, const Vector& budgets) {
  validate(spec);
  const Index M = budgets.size();
  const double jt = homogeneous_j_tilde(spec, M);
  const auto sol = detail::connected_fractional(Vector::Constant(M, spec.g0 * std::sqrt(spec.alpha_g)),
                                                Vector::Constant(M, spec.g0 * spec.g0 * (1.0 - spec.alpha_g)),
                                                budgets, spec.xi2);
  return detail::connected_indiv_J(jt, spec.eta2, sol.F);
}

}  // namespace collab
