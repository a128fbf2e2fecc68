#pragma once

// Small-scale semidefinite feasibility oracle for sets of the form
//   { X >= 0 : Tr[A_i X] <= b_i, i = 1..m }.
//
// The oracle works in the multiplier space: it follows the central path of the
// log-barrier problem
//   minimize  b^T y - mu * (log det Z(y) + sum_i log y_i),   Z(y) = C + sum_i y_i A_i,
// whose minimizer yields the primal point X = mu * Z^{-1}. At an exact centre
// Tr[A_i X] = b_i - mu / y_i, so every centred iterate is a strictly feasible
// witness. Conversely -b^T y is a lower bound on Tr[C X] over the feasible set,
// so a multiplier vector whose dual objective exceeds a known upper bound on
// Tr[C X] certifies infeasibility. Driving mu to zero makes X the minimizer of
// Tr[C X] over the set. Newton steps are taken in the m multiplier coordinates,
// which keeps the cost at O(L^3) per step for an L x L variable.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "collab/numerics.hpp"

namespace collab {

struct TraceConstraint {
  SymMatrix lhs;  // Tr[lhs * X] <= bound
  double bound = 0.0;
};

enum class SdpStatus { Feasible, Infeasible };

struct SdpDual {
  double alpha = 0.0;        // multiplier of the first constraint
  std::vector<double> beta;  // multipliers of the remaining constraints
  SymMatrix Z;               // objective + sum of multiplier-weighted constraint matrices
};

struct SdpOptions {
  double mu_initial = 1.0;
  double mu_factor = 0.1;
  double mu_final = 1e-9;
  double newton_tolerance = 1e-12;
  double certificate_tolerance = 1e-7;
  int max_newton_steps = 200;  // per barrier stage
  // Return at the first certified answer instead of following the path to mu_final.
  bool decision_only = false;
  // Upper bound on Tr[C X] over the feasible set, if one is known. Without it a
  // dual objective above kDefaultObjectiveBound (in normalized units) is taken as
  // divergence, i.e. infeasibility.
  std::optional<double> objective_bound;
  // Multipliers from a previous solve, in original units; used when Z stays PD.
  std::vector<double> warm_start;
};

struct SdpFeasibilityCertificate {
  SdpStatus status = SdpStatus::Infeasible;
  std::optional<SymMatrix> witness;
  std::optional<SdpDual> dual;
  std::vector<double> multipliers;  // all multipliers, original units
  double max_violation = 0.0;       // normalized units; <= certificate_tolerance when feasible
  double dual_objective = 0.0;      // original units
  double objective_value = 0.0;     // Tr[C X] of the witness
  double barrier_parameter = 0.0;
  int newton_steps = 0;
};

namespace detail {

inline constexpr double kDefaultObjectiveBound = 1e10;

struct ScaledConstraint {
  std::vector<int> support;  // rows/cols with any nonzero entry
  bool full = false;         // support covers every index
  Matrix block;              // lhs restricted to support, divided by its Frobenius norm
  double bound = 0.0;        // scaled bound
  double scale = 1.0;        // Frobenius norm of the original lhs
  std::size_t original = 0;  // index in the caller's list
};

class BarrierSdp {
 public:
  BarrierSdp(std::span<const TraceConstraint> cons, Index order, const SymMatrix* objective,
             const SdpOptions& opt)
      : n_(order), opt_(opt), total_(cons.size()) {
    require(!cons.empty(), ErrorCode::InvalidArgument, "sdp_feasible needs at least one constraint");
    require(order > 0, ErrorCode::InvalidArgument, "sdp_feasible needs a positive order");
    double bscale = 0.0;
    for (const auto& c : cons) {
      require(c.lhs.order() == order, ErrorCode::DimensionMismatch, "constraint order mismatch");
      require(std::isfinite(c.bound), ErrorCode::InvalidArgument, "constraint bound is not finite");
      bscale = std::max(bscale, std::abs(c.bound));
    }
    xscale_ = bscale > 0.0 ? bscale : 1.0;

    Matrix cmat = objective ? objective->mat() : Matrix::Identity(order, order);
    require(cmat.rows() == order, ErrorCode::DimensionMismatch, "objective order mismatch");
    cscale_ = cmat.norm();
    c_ = cmat / cscale_;
    require(try_cholesky(c_).has_value(), ErrorCode::InvalidArgument,
            "sdp objective matrix must be positive definite");
    bound_ = opt.objective_bound ? *opt.objective_bound / (cscale_ * xscale_) : kDefaultObjectiveBound;

    for (std::size_t i = 0; i < cons.size(); ++i) {
      const Matrix& a = cons[i].lhs.mat();
      const double fro = a.norm();
      if (fro == 0.0) {
        if (cons[i].bound < 0.0) trivially_infeasible_ = static_cast<int>(i);
        continue;
      }
      ScaledConstraint sc;
      sc.original = i;
      sc.scale = fro;
      sc.bound = cons[i].bound / (fro * xscale_);
      for (Index r = 0; r < order; ++r) {
        if (a.row(r).cwiseAbs().maxCoeff() > 0.0) sc.support.push_back(static_cast<int>(r));
      }
      sc.full = static_cast<Index>(sc.support.size()) == order;
      sc.block = sc.full ? Matrix(a / fro) : Matrix(a(sc.support, sc.support) / fro);
      cons_.push_back(std::move(sc));
    }
  }

  SdpFeasibilityCertificate run() {
    if (trivially_infeasible_ >= 0) return trivial_certificate();
    const std::size_t m = cons_.size();
    Vector y = initial_point();
    double mu = opt_.mu_initial;
    std::optional<SdpFeasibilityCertificate> best;
    int steps = 0;
    double last_stall = -1.0;
    while (true) {
      const CenterResult cr = center(y, mu, steps);
      if (cr == CenterResult::Infeasible) return infeasible_certificate(y, mu, steps);
      if (cr == CenterResult::Centered || cr == CenterResult::Stalled) {
        auto cert = feasible_certificate(y, mu, steps);
        if (cert.max_violation <= opt_.certificate_tolerance) {
          best = std::move(cert);
          if (opt_.decision_only) return *best;
        } else if (cr == CenterResult::Stalled) {
          last_stall = cert.max_violation;
        }
        if (cr == CenterResult::Stalled && best) break;
      }
      if (mu <= opt_.mu_final * (1.0 + 1e-9)) {
        if (!best && last_stall >= 0.0) {
          fail(ErrorCode::NumericalFailure, "barrier stalled down to mu=" + std::to_string(mu) +
                                                " with violation " + std::to_string(last_stall) + " after " +
                                                std::to_string(steps) + " Newton steps");
        }
        break;
      }
      mu *= opt_.mu_factor;
    }
    if (!best) {
      fail(ErrorCode::NumericalFailure,
           "barrier did not reach a certified point (m=" + std::to_string(m) + ")");
    }
    return *best;
  }

 private:
  enum class CenterResult { Centered, Infeasible, Stalled };
  static constexpr int kMaxNoiseSteps = 5;

  struct Eval {
    bool ok = false;
    double value = 0.0;  // barrier objective
    Eigen::LLT<Matrix> llt;
  };

  Matrix assemble_z(const Vector& y) const {
    Matrix z = c_;
    for (std::size_t i = 0; i < cons_.size(); ++i) {
      const auto& sc = cons_[i];
      if (sc.full) {
        z.noalias() += y(static_cast<Index>(i)) * sc.block;
      } else {
        z(sc.support, sc.support) += y(static_cast<Index>(i)) * sc.block;
      }
    }
    return z;
  }

  Vector scaled_bounds() const {
    Vector b(static_cast<Index>(cons_.size()));
    for (std::size_t i = 0; i < cons_.size(); ++i) b(static_cast<Index>(i)) = cons_[i].bound;
    return b;
  }

  Eval evaluate(const Vector& y, double mu) const {
    Eval e;
    if ((y.array() <= 0.0).any()) return e;
    Matrix z = assemble_z(y);
    e.llt.compute(z);
    if (e.llt.info() != Eigen::Success) return e;
    const auto& l = e.llt.matrixLLT();
    double logdet = 0.0;
    for (Index i = 0; i < n_; ++i) {
      const double d = l(i, i);
      if (!(d > 0.0)) return e;
      logdet += 2.0 * std::log(d);
    }
    const double logy = y.array().log().sum();
    e.value = scaled_bounds().dot(y) - mu * (logdet + logy);
    e.ok = std::isfinite(e.value);
    return e;
  }

  // Gradient and Hessian of the barrier objective at y given Z^{-1}.
  void derivatives(const Vector& y, double mu, const Matrix& zinv, Vector& grad, Matrix& hess) const {
    const std::size_t m = cons_.size();
    std::vector<Matrix> q(m);  // Z^{-1}[:, S_i] * block_i
    grad.resize(static_cast<Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
      const auto& sc = cons_[i];
      double tr;
      if (sc.full) {
        q[i].noalias() = zinv * sc.block;
        tr = q[i].trace();
      } else {
        q[i].noalias() = zinv(Eigen::all, sc.support) * sc.block;
        tr = 0.0;
        for (std::size_t k = 0; k < sc.support.size(); ++k) tr += q[i](sc.support[k], static_cast<Index>(k));
      }
      grad(static_cast<Index>(i)) = sc.bound - mu * (tr + 1.0 / y(static_cast<Index>(i)));
    }
    hess.resize(static_cast<Index>(m), static_cast<Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i; j < m; ++j) {
        // Tr[Z^-1 A_i Z^-1 A_j] = sum_{s in S_j, t in S_i} Q_i(s, t) Q_j(t, s)
        double v;
        const auto& si = cons_[i];
        const auto& sj = cons_[j];
        if (si.full && sj.full) {
          v = (q[i].array() * q[j].transpose().array()).sum();
        } else if (si.full) {
          v = (q[i](sj.support, Eigen::all).array() * q[j].transpose().array()).sum();
        } else if (sj.full) {
          v = (q[i].array() * q[j](si.support, Eigen::all).transpose().array()).sum();
        } else {
          v = (q[i](sj.support, Eigen::all).array() * q[j](si.support, Eigen::all).transpose().array()).sum();
        }
        hess(static_cast<Index>(i), static_cast<Index>(j)) = mu * v;
        hess(static_cast<Index>(j), static_cast<Index>(i)) = mu * v;
      }
      const double yi = y(static_cast<Index>(i));
      hess(static_cast<Index>(i), static_cast<Index>(i)) += mu / (yi * yi);
    }
  }

  CenterResult center(Vector& y, double mu, int& steps) const {
    const Vector b = scaled_bounds();
    Eval cur = evaluate(y, mu);
    if (!cur.ok) fail(ErrorCode::NumericalFailure, "barrier start point left the domain");
    int noise_steps = 0;
    for (int it = 0; it < opt_.max_newton_steps; ++it) {
      if (-b.dot(y) > bound_ * (1.0 + opt_.certificate_tolerance) + opt_.certificate_tolerance) {
        return CenterResult::Infeasible;
      }
      if (y.maxCoeff() > 1e15) return CenterResult::Infeasible;
      const Matrix zinv = cur.llt.solve(Matrix::Identity(n_, n_));
      Vector grad;
      Matrix hess;
      derivatives(y, mu, zinv, grad, hess);
      // Jacobi scaling keeps the factorization stable when multipliers span many magnitudes.
      const Vector dscale = hess.diagonal().cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
      const Matrix hs = dscale.asDiagonal() * hess * dscale.asDiagonal();
      Eigen::LDLT<Matrix> hsolve(hs);
      Vector step = -(dscale.asDiagonal() * hsolve.solve(dscale.asDiagonal() * grad)).eval();
      if (!step.allFinite()) return CenterResult::Stalled;
      const double decrement2 = -grad.dot(step);
      // Newton decrement of the self-concordant objective (barrier / mu).
      const double lambda2 = decrement2 / mu;
      ++steps;
      if (lambda2 < 0.0) return CenterResult::Stalled;
      if (0.5 * lambda2 <= opt_.newton_tolerance) return CenterResult::Centered;
      double t = 1.0;
      // Keep y positive before evaluating.
      for (Index i = 0; i < y.size(); ++i) {
        if (step(i) < 0.0) t = std::min(t, -0.99 * y(i) / step(i));
      }
      bool moved = false;
      const bool full_step = t == 1.0;
      while (t > 1e-14) {
        Vector trial = y + t * step;
        Eval e = evaluate(trial, mu);
        // Near the centre the decrease drops below rounding; a bounded number of full steps are taken on trust.
        const bool within_noise = full_step && t == 1.0 && noise_steps < kMaxNoiseSteps &&
                                  e.value <= cur.value + 1e-13 * std::abs(cur.value);
        if (e.ok && ((e.value < cur.value && e.value <= cur.value - 0.25 * t * decrement2) || within_noise)) {
          if (!(e.value < cur.value)) ++noise_steps;
          y = std::move(trial);
          cur = std::move(e);
          moved = true;
          break;
        }
        t *= 0.5;
      }
      if (!moved) return lambda2 < 1e-6 ? CenterResult::Centered : CenterResult::Stalled;
    }
    return CenterResult::Stalled;
  }

  Vector initial_point() const {
    const Index m = static_cast<Index>(cons_.size());
    Vector y = Vector::Ones(m);
    if (!opt_.warm_start.empty() && opt_.warm_start.size() == total_) {
      Vector w(m);
      bool valid = true;
      for (std::size_t i = 0; i < cons_.size(); ++i) {
        const double v = opt_.warm_start[cons_[i].original] * cons_[i].scale / cscale_;
        if (!(v > 0.0) || !std::isfinite(v)) valid = false;
        w(static_cast<Index>(i)) = std::max(v, 1e-12);
      }
      if (valid && evaluate(w, opt_.mu_initial).ok) return w;
    }
    for (int k = 0; k < 200 && !evaluate(y, opt_.mu_initial).ok; ++k) y *= 0.5;
    return y;
  }

  std::vector<double> original_multipliers(const Vector& y) const {
    std::vector<double> out(total_, 0.0);
    for (std::size_t i = 0; i < cons_.size(); ++i) {
      out[cons_[i].original] = y(static_cast<Index>(i)) * cscale_ / cons_[i].scale;
    }
    return out;
  }

  SdpDual make_dual(const Vector& y) const {
    const auto mult = original_multipliers(y);
    SdpDual d;
    d.alpha = mult.front();
    d.beta.assign(mult.begin() + 1, mult.end());
    d.Z = SymMatrix::from_trusted(cscale_ * assemble_z(y));
    return d;
  }

  SdpFeasibilityCertificate feasible_certificate(const Vector& y, double mu, int steps) const {
    SdpFeasibilityCertificate cert;
    Eigen::LLT<Matrix> llt(assemble_z(y));
    Matrix x = mu * llt.solve(Matrix::Identity(n_, n_));
    x = 0.5 * (x + x.transpose()).eval();
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& sc : cons_) {
      const double lhs = sc.full ? (x.array() * sc.block.array()).sum()
                                 : (x(sc.support, sc.support).array() * sc.block.array()).sum();
      worst = std::max(worst, lhs - sc.bound);
    }
    cert.status = SdpStatus::Feasible;
    cert.max_violation = std::max(0.0, worst);
    cert.objective_value = cscale_ * xscale_ * (x.array() * c_.array()).sum();
    cert.witness = SymMatrix::from_trusted(xscale_ * x);
    cert.multipliers = original_multipliers(y);
    cert.dual = make_dual(y);
    cert.dual_objective = -cscale_ * xscale_ * scaled_bounds().dot(y);
    cert.barrier_parameter = mu;
    cert.newton_steps = steps;
    return cert;
  }

  SdpFeasibilityCertificate infeasible_certificate(const Vector& y, double mu, int steps) const {
    SdpFeasibilityCertificate cert;
    cert.status = SdpStatus::Infeasible;
    cert.multipliers = original_multipliers(y);
    cert.dual = make_dual(y);
    cert.dual_objective = -cscale_ * xscale_ * scaled_bounds().dot(y);
    cert.barrier_parameter = mu;
    cert.newton_steps = steps;
    return cert;
  }

  SdpFeasibilityCertificate trivial_certificate() const {
    SdpFeasibilityCertificate cert;
    cert.status = SdpStatus::Infeasible;
    cert.multipliers.assign(total_, 0.0);
    cert.multipliers[static_cast<std::size_t>(trivially_infeasible_)] = 1.0;
    SdpDual d;
    d.alpha = cert.multipliers.front();
    d.beta.assign(cert.multipliers.begin() + 1, cert.multipliers.end());
    d.Z = SymMatrix::from_trusted(cscale_ * c_);
    cert.dual = std::move(d);
    cert.dual_objective = std::numeric_limits<double>::infinity();
    return cert;
  }

  Index n_;
  SdpOptions opt_;
  std::size_t total_;
  double xscale_ = 1.0;
  double cscale_ = 1.0;
  double bound_ = kDefaultObjectiveBound;
  Matrix c_;
  std::vector<ScaledConstraint> cons_;
  int trivially_infeasible_ = -1;
};

}  // namespace detail

// Decides whether { X >= 0 : Tr[A_i X] <= b_i } is nonempty. When feasible, the
// witness approximately minimizes Tr[objective * X] over the set (identity if no
// objective is given); the path is followed down to options.mu_final unless
// options.decision_only is set.
inline SdpFeasibilityCertificate sdp_feasible(std::span<const TraceConstraint> constraints, Index order,
                                              const SdpOptions& options = {},
                                              const SymMatrix* objective = nullptr) {
  detail::BarrierSdp solver(constraints, order, objective, options);
  return solver.run();
}

}  // namespace collab
