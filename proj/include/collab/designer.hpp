#pragma once

// Greedy topology design with finite link costs: starting from A = [I_M | 0], repeatedly add
// the affordable link whose ideal-collaboration optimum has the lowest distortion.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "collab/cumulative.hpp"
#include "collab/individual.hpp"
#include "collab/model.hpp"
#include "collab/operators.hpp"
#include "collab/parallel.hpp"

namespace collab {

enum class DesignTermination { NoFeasibleLink, MaxIterations, DeltaThreshold };

inline std::string termination_name(DesignTermination t) {
  switch (t) {
    case DesignTermination::NoFeasibleLink: return "NoFeasibleLink";
    case DesignTermination::MaxIterations: return "MaxIterations";
    case DesignTermination::DeltaThreshold: return "DeltaThreshold";
  }
  return "Unknown";
}

struct DesignStep {
  Index m = -1;  // receiving node
  Index n = -1;  // sensor whose observation is shared
  double cost = 0.0;
  double J = 0.0;
  double D = 0.0;
  Vector remaining;  // transmit budget per node (length N), or the pooled budget (length 1)
};

struct DesignTrace {
  double J_initial = 0.0;
  double D_initial = 0.0;
  std::vector<DesignStep> steps;
  CollaborationTopology final_topology;
  SolveResult final_result;
  DesignTermination termination = DesignTermination::NoFeasibleLink;
  double D0 = 0.0;
  double eta2 = 0.0;
  int evaluations = 0;
  std::vector<std::string> failures;  // candidate solves that threw, with the link and the reason

  double D_final() const { return steps.empty() ? D_initial : steps.back().D; }
  double J_final() const { return steps.empty() ? J_initial : steps.back().J; }
};

struct DesignOptions {
  double delta = 1e-4;  // minimum normalized improvement per committed link
  int max_iters = -1;   // -1: M * N
  IndividualMethod method = IndividualMethod::Dual;
  unsigned threads = 0;  // 0: worker_count()
};

struct EffectiveBudgets {
  Vector transmit;       // length M: available for transmission to the fusion center
  Vector collaboration;  // length N: spendable on outgoing links
};

// Every node may spend its budget on links; only the first M nodes transmit, so auxiliary
// sensors devote their whole budget to collaboration.
inline EffectiveBudgets auxiliary_budget_policy(const NetworkScenario& s, const Vector& budgets) {
  validate(s);
  require(budgets.size() == s.N, ErrorCode::DimensionMismatch, "need one budget per sensor");
  require(budgets.allFinite() && budgets.minCoeff() >= 0.0, ErrorCode::InvalidArgument,
          "budgets must be nonnegative");
  return {budgets.head(s.M), budgets};
}

namespace detail {

struct Pool {
  bool pooled = false;
  Vector funds;  // per sensor (length N) or pooled (length 1)

  double available(Index n) const { return pooled ? funds(0) : funds(n); }
  void spend(Index n, double c) { (pooled ? funds(0) : funds(n)) -= c; }
};

inline bool affordable(const Pool& pool, Index n, double cost) {
  if (!std::isfinite(cost)) return false;
  const double have = pool.available(n);
  return have > 0.0 && cost <= have;
}

inline SolveResult zero_power_result(const OperatorSet& ops) {
  return make_result(ops, Vector::Zero(ops.L), 0.0, "zero_power");
}

inline SolveResult evaluate_design(const NetworkScenario& s, const CollaborationTopology& topo, const Pool& pool,
                                   IndividualMethod method) {
  const OperatorSet ops = assemble(s, topo);
  if (pool.pooled) {
    if (!(pool.funds(0) > 0.0)) return zero_power_result(ops);
    return solve_cumulative(ops, pool.funds(0), s.xi2);
  }
  const Vector transmit = pool.funds.head(s.M).cwiseMax(0.0);
  if (!(transmit.sum() > 0.0)) return zero_power_result(ops);
  return solve_individual(ops, transmit, s.xi2, method);
}

struct Candidate {
  Index m = 0, n = 0;
  double cost = 0.0;
  std::optional<SolveResult> result;
  std::string error;
};

// True when a beats b: lower distortion, then lower cost, then lexicographic (m, n).
inline bool better(const Candidate& a, const Candidate& b) {
  const double da = a.result->D, db = b.result->D;
  const double tol = 1e-12 * std::max(da, db);
  if (da < db - tol) return true;
  if (db < da - tol) return false;
  if (a.cost != b.cost) return a.cost < b.cost;
  return a.m != b.m ? a.m < b.m : a.n < b.n;
}

inline DesignTrace run_greedy(const NetworkScenario& s, const Matrix& cost, Pool pool, const DesignOptions& opt) {
  validate(s);
  require(cost.rows() == s.M && cost.cols() == s.N, ErrorCode::DimensionMismatch, "cost matrix must be M x N");
  require(opt.delta >= 0.0, ErrorCode::InvalidArgument, "delta must be nonnegative");
  for (Index i = 0; i < cost.size(); ++i)
    require(!std::isnan(cost.data()[i]) && cost.data()[i] >= 0.0, ErrorCode::InvalidArgument,
            "link costs must be nonnegative");

  DesignTrace trace;
  trace.eta2 = s.eta2;
  trace.D0 = infinite_power_distortion(s);
  const double range = s.eta2 - trace.D0;
  const int max_iters = opt.max_iters < 0 ? static_cast<int>(s.M * s.N) : opt.max_iters;
  const unsigned threads = opt.threads == 0 ? worker_count() : opt.threads;

  CollaborationTopology topo = distributed_topology(s.M, s.N).with_cost(cost);
  SolveResult current = evaluate_design(s, topo, pool, opt.method);
  ++trace.evaluations;
  trace.J_initial = current.J;
  trace.D_initial = current.D;

  for (int iter = 0;; ++iter) {
    if (iter >= max_iters) {
      trace.termination = DesignTermination::MaxIterations;
      break;
    }
    std::vector<Candidate> cands;
    for (Index n = 0; n < s.N; ++n)
      for (Index m = 0; m < s.M; ++m)
        if (!topo.has_link(m, n) && affordable(pool, n, cost(m, n))) cands.push_back({m, n, cost(m, n), {}, {}});
    if (cands.empty()) {
      trace.termination = DesignTermination::NoFeasibleLink;
      break;
    }
    parallel_for(
        cands.size(),
        [&](std::size_t i) {
          Candidate& c = cands[i];
          Pool next = pool;
          next.spend(c.n, c.cost);
          try {
            c.result = evaluate_design(s, topo.with_link(c.m, c.n), next, opt.method);
          } catch (const Error& e) {
            c.error = e.what();
          }
        },
        threads);
    trace.evaluations += static_cast<int>(cands.size());
    const Candidate* best = nullptr;
    for (const auto& c : cands) {
      if (!c.result) {
        trace.failures.push_back("link (" + std::to_string(c.m) + ", " + std::to_string(c.n) + "): " + c.error);
        continue;
      }
      if (!best || better(c, *best)) best = &c;
    }
    if (!best) {
      trace.termination = DesignTermination::NoFeasibleLink;
      break;
    }
    const double gain = (current.D - best->result->D) / range;
    if (!(gain > opt.delta) || !(best->result->D < current.D)) {
      trace.termination = DesignTermination::DeltaThreshold;
      break;
    }
    topo = topo.with_link(best->m, best->n);
    pool.spend(best->n, best->cost);
    current = *best->result;
    trace.steps.push_back({best->m, best->n, best->cost, current.J, current.D, pool.funds});
  }
  trace.final_topology = topo;
  trace.final_result = std::move(current);
  return trace;
}

}  // namespace detail

// Per-node budgets (length N); node n pays for its outgoing links n -> m.
inline DesignTrace design_individual(const NetworkScenario& s, const Matrix& cost, const Vector& budgets,
                                     const DesignOptions& opt = {}) {
  const auto eff = auxiliary_budget_policy(s, budgets);
  require(eff.transmit.sum() > 0.0, ErrorCode::InvalidArgument, "at least one transmitting node needs a budget");
  return detail::run_greedy(s, cost, detail::Pool{false, eff.collaboration}, opt);
}

// One pooled budget shared by transmission and every link.
inline DesignTrace design_cumulative(const NetworkScenario& s, const Matrix& cost, double P_total,
                                     const DesignOptions& opt = {}) {
  require(std::isfinite(P_total) && P_total > 0.0, ErrorCode::InvalidArgument, "total power must be positive");
  return detail::run_greedy(s, cost, detail::Pool{true, Vector::Constant(1, P_total)}, opt);
}

// Distortion of a fixed topology after paying for its links, as the designer scores it.
inline SolveResult evaluate_topology(const NetworkScenario& s, const CollaborationTopology& topo,
                                     const PowerConstraint& c, IndividualMethod method = IndividualMethod::Dual) {
  const Vector spend = topo.cost_per_sensor();
  require(spend.allFinite(), ErrorCode::InvalidArgument, "topology uses an unavailable link");
  if (c.is_cumulative()) {
    require(spend.sum() <= c.total, ErrorCode::InvalidArgument, "links cost more than the total budget");
    return detail::evaluate_design(s, topo, detail::Pool{true, Vector::Constant(1, c.total - spend.sum())}, method);
  }
  require(static_cast<Index>(c.budgets.size()) == s.N, ErrorCode::DimensionMismatch, "need one budget per sensor");
  const Vector funds = Eigen::Map<const Vector>(c.budgets.data(), s.N) - spend;
  require(funds.minCoeff() >= 0.0, ErrorCode::InvalidArgument, "a sensor cannot afford its links");
  return detail::evaluate_design(s, topo, detail::Pool{false, funds}, method);
}

}  // namespace collab
