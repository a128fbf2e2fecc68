#pragma once

// Collaboration gain, power skewness and the homogeneous-network gain formulas.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "collab/cumulative.hpp"
#include "collab/individual.hpp"
#include "collab/model.hpp"
#include "collab/operators.hpp"

namespace collab {

struct Skewness {
  double kappa = 1.0;    // (sum sqrt P_m)^2 / sum P_m, in [1, M]
  double kappa_M = 0.0;  // (kappa - 1) / (M - 1), in [0, 1]
};

inline Skewness skewness(const Vector& budgets) {
  validate(IndividualConstraints{budgets}, budgets.size());
  const double total = budgets.sum();
  const double root_sum = budgets.cwiseSqrt().sum();
  Skewness k;
  k.kappa = std::clamp(root_sum * root_sum / total, 1.0, static_cast<double>(budgets.size()));
  k.kappa_M = budgets.size() > 1 ? (k.kappa - 1.0) / static_cast<double>(budgets.size() - 1) : 1.0;
  return k;
}

// kappa of the geometric allocation P_m = ratio^(m-1) P_0.
inline double geometric_kappa(Index M, double ratio) {
  require(M >= 1, ErrorCode::InvalidArgument, "need at least one node");
  require(ratio >= 0.0 && ratio <= 1.0, ErrorCode::InvalidArgument, "ratio must lie in [0, 1]");
  double root = 0.0, sum = 0.0, r = 1.0, q = 1.0;
  for (Index m = 0; m < M; ++m) {
    root += q;
    sum += r;
    r *= ratio;
    q *= std::sqrt(ratio);
  }
  return root * root / sum;
}

inline Vector geometric_budgets(Index M, double ratio, double P_total) {
  Vector p(M);
  double r = 1.0;
  for (Index m = 0; m < M; ++m) {
    p(m) = r;
    r *= ratio;
  }
  return p * (P_total / p.sum());
}

// Geometric budgets (largest first) whose skewness equals kappa_target; the ratio is found by bisection.
inline Vector budgets_for_skewness(Index M, double kappa_target, double P_total) {
  require(M >= 1, ErrorCode::InvalidArgument, "need at least one node");
  require(std::isfinite(P_total) && P_total > 0.0, ErrorCode::InvalidArgument, "total power must be positive");
  const double m = static_cast<double>(M);
  require(kappa_target >= 1.0 - 1e-12 && kappa_target <= m * (1.0 + 1e-12), ErrorCode::InvalidArgument,
          "skewness target must lie in [1, M]");
  if (kappa_target >= m) return geometric_budgets(M, 1.0, P_total);
  if (kappa_target <= 1.0) return geometric_budgets(M, 0.0, P_total);
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    (geometric_kappa(M, mid) < kappa_target ? lo : hi) = mid;
  }
  return geometric_budgets(M, 0.5 * (lo + hi), P_total);
}

inline double kappa_from_normalized(Index M, double kappa_M) {
  require(kappa_M >= 0.0 && kappa_M <= 1.0, ErrorCode::InvalidArgument, "normalized skewness must lie in [0, 1]");
  return 1.0 + kappa_M * static_cast<double>(M - 1);
}

// Condition under which every per-node budget is spent at optimality on a homogeneous network
// (distributed and connected): the largest budget is not too far above the others.
inline bool activity_condition(const HomogeneousSpec& spec, const Vector& budgets) {
  validate(spec);
  if (budgets.size() <= 1) return true;
  Vector p = budgets;
  std::sort(p.data(), p.data() + p.size());
  const Index M = p.size();
  const double rest_sum = p.head(M - 1).sum();
  const double rest_root = p.head(M - 1).cwiseSqrt().sum();
  if (rest_root == 0.0) return true;
  const double slack = spec.xi2 / (spec.g0 * spec.g0 * (1.0 - spec.alpha_g * spec.alpha_x()));
  const double bound = (rest_sum + slack) / rest_root;
  return p(M - 1) <= bound * bound * (1.0 + 1e-12);
}

struct ClosedFormGain {
  double CG = 0.0;
  bool active = true;  // activity condition holds, so the formula is exact
  std::vector<std::string> tags;
};

inline double normalized_power(const HomogeneousSpec& spec, double P_total) {
  return P_total * spec.g0 * spec.g0 / spec.xi2;
}

// Homogeneous-network gain with all constraints active; kappa = N gives the cumulative case.
inline double cg_formula(const HomogeneousSpec& spec, double P_total, double kappa) {
  validate(spec);
  require(std::isfinite(P_total) && P_total > 0.0, ErrorCode::InvalidArgument, "total power must be positive");
  const double m = static_cast<double>(spec.N);
  require(kappa >= 1.0 - 1e-12 && kappa <= m * (1.0 + 1e-12), ErrorCode::InvalidArgument, "kappa must lie in [1, M]");
  const double ag = spec.alpha_g;
  const double ax = spec.alpha_x();
  const double pg = normalized_power(spec, P_total);
  const double damp = 1.0 / (1.0 + 1.0 / pg);
  const double kappa_m = m > 1.0 ? (kappa - 1.0) / (m - 1.0) : 0.0;
  const double num = (1.0 - 1.0 / m) * (kappa / m * (1.0 + (m - 1.0) * ag) / (1.0 + (kappa - 1.0) * ag)) *
                     (1.0 - kappa_m * ag * damp) * (1.0 - ax);
  const double den = (1.0 + 1.0 / (pg * (1.0 + (kappa - 1.0) * ag))) * (1.0 + (kappa - 1.0) * ag * damp * ax);
  return num / den;
}

// Closed-form gain for the given budgets; flags budgets that violate the activity condition.
inline ClosedFormGain cg_closed_form(const HomogeneousSpec& spec, const Vector& budgets) {
  require(budgets.size() == spec.N, ErrorCode::DimensionMismatch, "need one budget per node");
  ClosedFormGain g;
  g.CG = cg_formula(spec, budgets.sum(), skewness(budgets).kappa);
  g.active = activity_condition(spec, budgets);
  if (!g.active) g.tags.push_back("inactive-constraint");
  return g;
}

// Same, with geometric budgets of the requested skewness.
inline ClosedFormGain cg_closed_form(const HomogeneousSpec& spec, double P_total, double kappa) {
  ClosedFormGain g = cg_closed_form(spec, budgets_for_skewness(spec.N, kappa, P_total));
  g.CG = cg_formula(spec, P_total, kappa);
  return g;
}

struct GainAsymptotes {
  double regime1_limit = 0.0;  // fixed kappa, M and P to infinity
  double regime2_max = 0.0;    // fixed kappa_M, M to infinity with P * M fixed: best over P * M
  double P_M_star = 0.0;       // normalized P * M at which regime2_max is attained
};

inline GainAsymptotes cg_asymptotes(const HomogeneousSpec& spec, double kappa, double kappa_M) {
  validate(spec);
  require(kappa >= 1.0, ErrorCode::InvalidArgument, "kappa must be at least 1");
  require(kappa_M > 0.0 && kappa_M <= 1.0, ErrorCode::InvalidArgument, "normalized skewness must lie in (0, 1]");
  const double ag = spec.alpha_g;
  const double ax = spec.alpha_x();
  GainAsymptotes a;
  a.regime1_limit = (1.0 - ax) * ag * kappa / ((1.0 + ag * (kappa - 1.0)) * (1.0 + ax * ag * (kappa - 1.0)));
  a.regime2_max = (1.0 - std::sqrt(ax)) / (1.0 + std::sqrt(ax));
  a.P_M_star = 1.0 / (kappa_M * ag * std::sqrt(ax));
  return a;
}

struct GainReport {
  double D_dist = 0.0;
  double D_conn = 0.0;
  double D0 = 0.0;
  double eta2 = 0.0;
  double CG = 0.0;
  double kappa = 1.0;
  double kappa_M = 0.0;
  std::vector<std::string> regime_tags;
};

inline double normalized_distortion(double D, double D0, double eta2) { return (D - D0) / (eta2 - D0); }

namespace detail {

inline GainReport make_report(double J_dist, double J_conn, double J0, double eta2, Skewness k) {
  GainReport r;
  r.eta2 = eta2;
  r.D_dist = distortion_from_J(J_dist, eta2);
  r.D_conn = distortion_from_J(J_conn, eta2);
  r.D0 = distortion_from_J(J0, eta2);
  r.CG = (r.D_dist - r.D_conn) / (eta2 - r.D0);
  r.kappa = k.kappa;
  r.kappa_M = k.kappa_M;
  return r;
}

inline Skewness constraint_skewness(const PowerConstraint& c, Index M) {
  if (c.is_cumulative()) return {static_cast<double>(M), 1.0};
  return skewness(Eigen::Map<const Vector>(c.budgets.data(), static_cast<Index>(c.budgets.size())));
}

}  // namespace detail

// Distributed vs fully connected optimum at the same constraint, normalized by the infinite-power floor.
inline GainReport collaboration_gain(const NetworkScenario& s, const PowerConstraint& c,
                                     IndividualMethod method = IndividualMethod::Auto) {
  validate(s);
  const auto dist = assemble(s, distributed_topology(s.M, s.N));
  const auto conn = assemble(s, connected_topology(s.M, s.N));
  double j_dist = 0.0, j_conn = 0.0;
  if (c.is_cumulative()) {
    j_dist = solve_cumulative(dist, c.total, s.xi2).J;
    j_conn = solve_cumulative(conn, c.total, s.xi2).J;
  } else {
    require(static_cast<Index>(c.budgets.size()) == s.M, ErrorCode::DimensionMismatch, "need one budget per node");
    const Vector p = Eigen::Map<const Vector>(c.budgets.data(), s.M);
    j_dist = solve_individual(dist, p, s.xi2, method).J;
    j_conn = solve_individual(conn, p, s.xi2, method).J;
  }
  GainReport r =
      detail::make_report(j_dist, j_conn, infinite_power_limit(s), s.eta2, detail::constraint_skewness(c, s.M));
  r.regime_tags.push_back(c.is_cumulative() ? "cumulative" : "individual");
  return r;
}

// Homogeneous network evaluated without forming N x N matrices (exact for any budgets).
inline GainReport homogeneous_gain(const HomogeneousSpec& spec, const PowerConstraint& c) {
  validate(spec);
  auto dist = spec;
  dist.K = 1;
  auto conn = spec;
  conn.K = spec.N;
  double j_dist = 0.0, j_conn = 0.0;
  if (c.is_cumulative()) {
    j_dist = homogeneous_cycle_J(dist, c.total);
    j_conn = homogeneous_cycle_J(conn, c.total);
  } else {
    require(static_cast<Index>(c.budgets.size()) == spec.N, ErrorCode::DimensionMismatch,
            "need one budget per node");
    const Vector p = Eigen::Map<const Vector>(c.budgets.data(), spec.N);
    j_dist = homogeneous_indiv_distributed_J(spec, p);
    j_conn = homogeneous_indiv_connected_J(spec, p);
  }
  GainReport r = detail::make_report(j_dist, j_conn, homogeneous_infinite_power_limit(spec), spec.eta2,
                                     detail::constraint_skewness(c, spec.N));
  r.regime_tags.push_back(c.is_cumulative() ? "cumulative" : "individual");
  if (!c.is_cumulative() &&
      !activity_condition(spec, Eigen::Map<const Vector>(c.budgets.data(), static_cast<Index>(c.budgets.size()))))
    r.regime_tags.push_back("inactive-constraint");
  return r;
}

}  // namespace collab
