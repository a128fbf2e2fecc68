#pragma once

// Dense symmetric kernel: symmetric matrix type, PD checks, Cholesky and
// generalized eigenvalue pencils.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>

#include "collab/errors.hpp"

namespace collab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kSymmetryTolerance = 1e-9;
inline constexpr double kPivotFloor = 1e-12;

// Dense symmetric matrix. Inputs are symmetrized as (M + M^T)/2; asymmetry above
// kSymmetryTolerance relative to the largest entry is rejected.
class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(const Matrix& m) : m_(m) {
    require(m.rows() == m.cols(), ErrorCode::DimensionMismatch,
            "symmetric matrix must be square, got " + std::to_string(m.rows()) + "x" +
                std::to_string(m.cols()));
    require(m.allFinite(), ErrorCode::InvalidArgument, "matrix has non-finite entries");
    if (m.size() > 0) {
      const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
      const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
      require(asym <= kSymmetryTolerance * scale, ErrorCode::NonSymmetric,
              "asymmetry " + std::to_string(asym) + " exceeds tolerance");
    }
    m_ = 0.5 * (m_ + m_.transpose()).eval();
  }

  static SymMatrix identity(Index n) { return SymMatrix(Matrix::Identity(n, n)); }
  static SymMatrix zero(Index n) { return SymMatrix(Matrix::Zero(n, n)); }
  static SymMatrix diagonal(const Vector& d) { return SymMatrix(Matrix(d.asDiagonal())); }

  Index order() const { return m_.rows(); }
  const Matrix& mat() const { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

  SymMatrix operator+(const SymMatrix& o) const { return from_trusted(m_ + o.m_); }
  SymMatrix operator-(const SymMatrix& o) const { return from_trusted(m_ - o.m_); }
  SymMatrix operator*(double s) const { return from_trusted(m_ * s); }

  // Skips validation; caller guarantees symmetry by construction.
  static SymMatrix from_trusted(Matrix m) {
    SymMatrix s;
    s.m_ = std::move(m);
    return s;
  }

 private:
  Matrix m_;
};

inline SymMatrix operator*(double s, const SymMatrix& m) { return m * s; }

struct PencilSolution {
  double eigenvalue = 0.0;
  Vector eigenvector;  // unit norm
};

// Cholesky factorization that also enforces the pivot floor kPivotFloor * trace / order.
inline std::optional<Eigen::LLT<Matrix>> try_cholesky(const Matrix& a) {
  const Index n = a.rows();
  if (n == 0 || a.cols() != n) return std::nullopt;
  const double trace = a.trace();
  if (!(trace > 0.0) || !std::isfinite(trace)) return std::nullopt;
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const double floor = kPivotFloor * trace / static_cast<double>(n);
  const auto& l = llt.matrixLLT();
  for (Index i = 0; i < n; ++i) {
    const double piv = l(i, i) * l(i, i);
    if (!(piv >= floor)) return std::nullopt;
  }
  return llt;
}

inline bool is_positive_definite(const SymMatrix& a) { return try_cholesky(a.mat()).has_value(); }

// Eigen-decomposition of a symmetric matrix, eigenvalues ascending. Eigen's QR iteration can
// stall on matrices with large exact null spaces; a diagonal shift by the largest entry
// leaves the eigenvectors unchanged and usually restores convergence.
struct SymmetricEig {
  Vector values;
  Matrix vectors;
};

inline SymmetricEig symmetric_eig(const Matrix& a, bool with_vectors = true) {
  const int options = with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
  const double scale = a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
  for (double shift : {0.0, scale, -scale}) {
    Matrix shifted = a;
    shifted.diagonal().array() += shift;
    Eigen::SelfAdjointEigenSolver<Matrix> es(shifted, options);
    if (es.info() != Eigen::Success) continue;
    SymmetricEig out{es.eigenvalues().array() - shift, Matrix()};
    if (with_vectors) out.vectors = es.eigenvectors();
    return out;
  }
  fail(ErrorCode::DidNotConverge, "symmetric eigensolver did not converge");
}

inline bool is_positive_semidefinite(const SymMatrix& a, double rel_tol = 1e-12) {
  if (a.order() == 0) return true;
  const Vector ev = symmetric_eig(a.mat(), false).values;
  const double scale = std::max(1e-300, ev.cwiseAbs().maxCoeff());
  return ev.minCoeff() >= -rel_tol * scale;
}

inline Eigen::LLT<Matrix> cholesky(const SymMatrix& a, const std::string& what = "matrix") {
  auto llt = try_cholesky(a.mat());
  if (!llt) fail(ErrorCode::NotPositiveDefinite, what + " is not positive definite");
  return std::move(*llt);
}

inline Vector solve_pd(const SymMatrix& a, const Vector& b, const std::string& what = "matrix") {
  require(a.order() == b.size(), ErrorCode::DimensionMismatch, "solve_pd: size mismatch");
  return cholesky(a, what).solve(b);
}

namespace detail {

// Eigen-decomposition of L^{-1} A L^{-T} where B = L L^T.
struct ReducedPencil {
  SymmetricEig eig;
  Eigen::LLT<Matrix> llt;
};

inline ReducedPencil reduce_pencil(const SymMatrix& a, const SymMatrix& b, const char* which) {
  require(a.order() == b.order(), ErrorCode::DimensionMismatch, "pencil orders differ");
  require(a.order() > 0, ErrorCode::InvalidArgument, "empty pencil");
  auto llt = try_cholesky(b.mat());
  if (!llt) fail(ErrorCode::NotPositiveDefinite, std::string(which) + " is not positive definite");
  const auto lower = llt->matrixL();
  Matrix c = lower.solve(a.mat());
  c = lower.solve(c.transpose().eval());
  c = 0.5 * (c + c.transpose()).eval();
  return {symmetric_eig(c), std::move(*llt)};
}

inline Vector back_transform(const Eigen::LLT<Matrix>& llt, const Vector& y) {
  Vector v = llt.matrixU().solve(y);
  const double nrm = v.norm();
  if (nrm > 0.0) v /= nrm;
  return v;
}

}  // namespace detail

// All generalized eigenvalues of A v = lambda B v (B PD), ascending.
inline Vector generalized_eigenvalues(const SymMatrix& a, const SymMatrix& b) {
  return detail::reduce_pencil(a, b, "B").eig.values;
}

// Largest lambda with A v = lambda B v, B positive definite.
inline PencilSolution max_generalized_eig(const SymMatrix& a, const SymMatrix& b) {
  auto red = detail::reduce_pencil(a, b, "B");
  const Index n = a.order();
  PencilSolution s;
  s.eigenvalue = red.eig.values(n - 1);
  s.eigenvector = detail::back_transform(red.llt, red.eig.vectors.col(n - 1));
  return s;
}

// Smallest strictly positive lambda with A v = lambda B v, A positive definite and B
// symmetric. Solved on the reversed pencil B v = theta A v with lambda = 1/theta.
inline PencilSolution min_pos_generalized_eig(const SymMatrix& a, const SymMatrix& b) {
  auto red = detail::reduce_pencil(b, a, "A");
  const Index n = a.order();
  const Vector& theta = red.eig.values;
  const double scale = theta.cwiseAbs().maxCoeff();
  const double top = theta(n - 1);
  if (!(top > 1e-13 * scale) || !(top > 0.0)) {
    fail(ErrorCode::NoPositiveEigenvalue, "pencil has no positive eigenvalue");
  }
  PencilSolution s;
  s.eigenvalue = 1.0 / top;
  s.eigenvector = detail::back_transform(red.llt, red.eig.vectors.col(n - 1));
  return s;
}

// Flip sign so the largest-magnitude component is positive.
inline void canonical_sign(Vector& v) {
  if (v.size() == 0) return;
  Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v(imax) < 0.0) v = -v;
}

}  // namespace collab
