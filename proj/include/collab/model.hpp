#pragma once

// Network scenarios, collaboration topologies, homogeneous generators, random
// geometric layouts and link cost models.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "collab/numerics.hpp"
#include "collab/rng.hpp"

namespace collab {

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

struct NetworkScenario {
  Index N = 0;  // sensors
  Index M = 0;  // nodes that transmit to the fusion center (the first M sensors)
  double eta2 = 1.0;
  Vector h;            // mean observation gains, length N
  SymMatrix Sigma_h;   // observation-gain covariance, N x N PSD
  SymMatrix Sigma;     // measurement-noise covariance, N x N PD
  Vector g;            // mean channel gains, length M
  SymMatrix Sigma_g;   // channel-gain covariance, M x M PSD
  double xi2 = 1.0;    // channel noise variance
};

inline void validate(const NetworkScenario& s) {
  require(s.N >= 1, ErrorCode::InvalidArgument, "scenario needs N >= 1");
  require(s.M >= 1 && s.M <= s.N, ErrorCode::InvalidArgument, "scenario needs 1 <= M <= N");
  require(std::isfinite(s.eta2) && s.eta2 > 0.0, ErrorCode::InvalidArgument, "eta2 must be positive");
  require(std::isfinite(s.xi2) && s.xi2 > 0.0, ErrorCode::InvalidArgument, "xi2 must be positive");
  require(s.h.size() == s.N && s.h.allFinite(), ErrorCode::DimensionMismatch, "h must have length N");
  require(s.g.size() == s.M && s.g.allFinite(), ErrorCode::DimensionMismatch, "g must have length M");
  require(s.Sigma.order() == s.N, ErrorCode::DimensionMismatch, "Sigma must be N x N");
  require(s.Sigma_h.order() == s.N, ErrorCode::DimensionMismatch, "Sigma_h must be N x N");
  require(s.Sigma_g.order() == s.M, ErrorCode::DimensionMismatch, "Sigma_g must be M x M");
  require(is_positive_definite(s.Sigma), ErrorCode::SigmaNotPD, "Sigma must be positive definite");
  require(is_positive_semidefinite(s.Sigma_h, 1e-10), ErrorCode::InvalidArgument,
          "Sigma_h must be positive semidefinite");
  require(is_positive_semidefinite(s.Sigma_g, 1e-10), ErrorCode::InvalidArgument,
          "Sigma_g must be positive semidefinite");
}

// Perfect-gain scenario helper: Sigma_h = 0, Sigma_g = 0.
inline NetworkScenario make_scenario(const Vector& h, const Matrix& sigma, const Vector& g, double eta2,
                                     double xi2) {
  NetworkScenario s;
  s.N = h.size();
  s.M = g.size();
  s.eta2 = eta2;
  s.h = h;
  s.Sigma = SymMatrix(sigma);
  s.Sigma_h = SymMatrix::zero(s.N);
  s.g = g;
  s.Sigma_g = SymMatrix::zero(s.M);
  s.xi2 = xi2;
  validate(s);
  return s;
}

// Adjacency pattern of the collaboration matrix W (M x N) with link costs.
class CollaborationTopology {
 public:
  using IndexPair = std::pair<Index, Index>;

  CollaborationTopology() = default;

  // Requires A_mm = 1 for m < M; C_mm is forced to zero.
  CollaborationTopology(Eigen::MatrixXi adjacency, Matrix cost) : A_(std::move(adjacency)), C_(std::move(cost)) {
    const Index m = A_.rows();
    const Index n = A_.cols();
    require(m >= 1 && m <= n, ErrorCode::InvalidArgument, "topology needs 1 <= M <= N");
    require(C_.rows() == m && C_.cols() == n, ErrorCode::DimensionMismatch, "cost matrix must be M x N");
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < m; ++i) {
        require(A_(i, j) == 0 || A_(i, j) == 1, ErrorCode::InvalidArgument, "adjacency entries must be 0/1");
        require(!std::isnan(C_(i, j)) && C_(i, j) >= 0.0, ErrorCode::InvalidArgument,
                "link costs must be nonnegative");
      }
    }
    for (Index i = 0; i < m; ++i) {
      require(A_(i, i) == 1, ErrorCode::InvalidArgument, "self-link A_mm must be present");
      C_(i, i) = 0.0;
    }
    rebuild_index();
  }

  explicit CollaborationTopology(const Eigen::MatrixXi& adjacency)
      : CollaborationTopology(adjacency, Matrix::Zero(adjacency.rows(), adjacency.cols())) {}

  Index M() const { return A_.rows(); }
  Index N() const { return A_.cols(); }
  Index L() const { return static_cast<Index>(index_map_.size()); }
  const Eigen::MatrixXi& adjacency() const { return A_; }
  const Matrix& cost() const { return C_; }
  bool has_link(Index m, Index n) const { return A_(m, n) == 1; }

  // Column-major order over the nonzeros of A: entry l is (m_l, n_l).
  const std::vector<IndexPair>& index_map() const { return index_map_; }

  CollaborationTopology with_link(Index m, Index n) const {
    Eigen::MatrixXi a = A_;
    a(m, n) = 1;
    return CollaborationTopology(a, C_);
  }

  CollaborationTopology with_cost(Matrix cost) const { return CollaborationTopology(A_, std::move(cost)); }

  // Total cost of the links in use (self-links are free).
  double link_cost() const {
    double total = 0.0;
    for (const auto& [m, n] : index_map_) total += C_(m, n);
    return total;
  }

  // Cost paid by sensor n for its outgoing links.
  Vector cost_per_sensor() const {
    Vector out = Vector::Zero(N());
    for (const auto& [m, n] : index_map_) out(n) += C_(m, n);
    return out;
  }

  bool operator==(const CollaborationTopology& o) const { return A_ == o.A_; }

 private:
  void rebuild_index() {
    index_map_.clear();
    for (Index j = 0; j < A_.cols(); ++j) {
      for (Index i = 0; i < A_.rows(); ++i) {
        if (A_(i, j) == 1) index_map_.emplace_back(i, j);
      }
    }
  }

  Eigen::MatrixXi A_;
  Matrix C_;
  std::vector<IndexPair> index_map_;
};

// A = [I_M | 0].
inline CollaborationTopology distributed_topology(Index M, Index N) {
  require(M >= 1 && M <= N, ErrorCode::InvalidArgument, "distributed topology needs 1 <= M <= N");
  Eigen::MatrixXi a = Eigen::MatrixXi::Zero(M, N);
  for (Index i = 0; i < M; ++i) a(i, i) = 1;
  return CollaborationTopology(a);
}

// A = 1 1^T.
inline CollaborationTopology connected_topology(Index M, Index N) {
  require(M >= 1 && M <= N, ErrorCode::InvalidArgument, "connected topology needs 1 <= M <= N");
  return CollaborationTopology(Eigen::MatrixXi::Ones(M, N));
}

// Node m combines the observations of sensors m, m+1, ..., m+K-1 (mod M).
inline CollaborationTopology make_cycle_topology(Index M, Index K) {
  require(M >= 1, ErrorCode::InvalidArgument, "cycle topology needs M >= 1");
  require(K >= 1 && K <= M, ErrorCode::InvalidArgument,
          "cycle connectivity K must lie in [1, M], got " + std::to_string(K));
  Eigen::MatrixXi a = Eigen::MatrixXi::Zero(M, M);
  for (Index m = 0; m < M; ++m) {
    for (Index k = 0; k < K; ++k) a(m, (m + k) % M) = 1;
  }
  return CollaborationTopology(a);
}

struct HomogeneousSpec {
  Index N = 1;  // M = N
  double h0 = 1.0;
  double g0 = 1.0;
  double alpha_h = 1.0;
  double alpha_g = 1.0;
  double sigma2 = 1.0;
  double rho = 0.0;
  double eta2 = 1.0;
  double xi2 = 1.0;
  Index K = 1;

  double gamma() const { return eta2 * h0 * h0 / sigma2; }
  double sigma_x2() const { return sigma2 + eta2 * h0 * h0; }
  double alpha_x() const { return (rho + gamma() * alpha_h) / (1.0 + gamma()); }
};

inline void validate(const HomogeneousSpec& s) {
  require(s.N >= 1, ErrorCode::InvalidArgument, "homogeneous spec needs N >= 1");
  require(s.h0 > 0.0 && std::isfinite(s.h0), ErrorCode::InvalidArgument, "h0 must be positive");
  require(s.g0 > 0.0 && std::isfinite(s.g0), ErrorCode::InvalidArgument, "g0 must be positive");
  require(s.alpha_h > 0.0 && s.alpha_h <= 1.0, ErrorCode::InvalidArgument, "alpha_h must lie in (0, 1]");
  require(s.alpha_g > 0.0 && s.alpha_g <= 1.0, ErrorCode::InvalidArgument, "alpha_g must lie in (0, 1]");
  require(s.sigma2 > 0.0 && std::isfinite(s.sigma2), ErrorCode::InvalidArgument, "sigma2 must be positive");
  require(s.rho >= 0.0 && s.rho < 1.0, ErrorCode::InvalidArgument, "rho must lie in [0, 1)");
  require(s.eta2 > 0.0 && std::isfinite(s.eta2), ErrorCode::InvalidArgument, "eta2 must be positive");
  require(s.xi2 > 0.0 && std::isfinite(s.xi2), ErrorCode::InvalidArgument, "xi2 must be positive");
  require(s.K >= 1 && s.K <= s.N, ErrorCode::InvalidArgument, "K must lie in [1, N]");
}

inline NetworkScenario expand(const HomogeneousSpec& spec) {
  validate(spec);
  const Index n = spec.N;
  NetworkScenario s;
  s.N = n;
  s.M = n;
  s.eta2 = spec.eta2;
  s.xi2 = spec.xi2;
  s.h = Vector::Constant(n, spec.h0 * std::sqrt(spec.alpha_h));
  s.Sigma_h = SymMatrix::from_trusted(Matrix::Identity(n, n) * (spec.h0 * spec.h0 * (1.0 - spec.alpha_h)));
  s.g = Vector::Constant(n, spec.g0 * std::sqrt(spec.alpha_g));
  s.Sigma_g = SymMatrix::from_trusted(Matrix::Identity(n, n) * (spec.g0 * spec.g0 * (1.0 - spec.alpha_g)));
  Matrix sigma = Matrix::Constant(n, n, spec.rho);
  sigma.diagonal().setOnes();
  s.Sigma = SymMatrix::from_trusted(spec.sigma2 * sigma);
  return s;
}

// Inverse of expand() for scenarios with the homogeneous structure (uses the
// first diagonal/off-diagonal entries; N = 1 reports rho = 0).
inline HomogeneousSpec read_back(const NetworkScenario& s, Index K = 1) {
  HomogeneousSpec spec;
  spec.N = s.N;
  spec.eta2 = s.eta2;
  spec.xi2 = s.xi2;
  spec.K = K;
  const double hmean2 = s.h(0) * s.h(0);
  spec.h0 = std::sqrt(hmean2 + s.Sigma_h(0, 0));
  spec.alpha_h = hmean2 / (spec.h0 * spec.h0);
  const double gmean2 = s.g(0) * s.g(0);
  spec.g0 = std::sqrt(gmean2 + s.Sigma_g(0, 0));
  spec.alpha_g = gmean2 / (spec.g0 * spec.g0);
  spec.sigma2 = s.Sigma(0, 0);
  spec.rho = s.N > 1 ? s.Sigma(0, 1) / spec.sigma2 : 0.0;
  return spec;
}

struct RggLayout {
  Matrix positions;  // N x 2, unit square
  double radius = 0.0;
  std::uint64_t seed = kDefaultSeed;

  Index N() const { return positions.rows(); }
  double distance(Index i, Index j) const { return (positions.row(i) - positions.row(j)).norm(); }

  // Symmetric N x N adjacency with self-links: A_ij = 1 iff d_ij <= radius.
  Eigen::MatrixXi adjacency() const {
    const Index n = N();
    Eigen::MatrixXi a = Eigen::MatrixXi::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) a(i, j) = (i == j || distance(i, j) <= radius) ? 1 : 0;
    }
    return a;
  }

  // Undirected edges, self-links excluded.
  Index edge_count() const {
    Index e = 0;
    for (Index i = 0; i < N(); ++i)
      for (Index j = i + 1; j < N(); ++j) e += distance(i, j) <= radius ? 1 : 0;
    return e;
  }
};

inline constexpr double kUnitSquareDiameter = 1.4142135623730951;

// Positions depend only on (N, seed); the radius only affects the adjacency.
inline RggLayout make_rgg(Index N, double r, std::uint64_t seed = kDefaultSeed) {
  require(N >= 1, ErrorCode::InvalidArgument, "RGG needs N >= 1");
  require(r >= 0.0 && r <= kUnitSquareDiameter + 1e-12, ErrorCode::InvalidArgument,
          "RGG radius must lie in [0, sqrt(2)]");
  RggLayout layout;
  layout.positions.resize(N, 2);
  CounterRng rng(seed);
  for (Index i = 0; i < N; ++i) {
    layout.positions(i, 0) = rng.uniform();
    layout.positions(i, 1) = rng.uniform();
  }
  // Snap the top of the range so r = sqrt(2) always covers the square.
  layout.radius = r >= kUnitSquareDiameter - 1e-12 ? kUnitSquareDiameter + 1e-9 : r;
  layout.seed = seed;
  return layout;
}

// C_mn = c0 * d_mn^2, zero diagonal.
inline Matrix quadratic_cost(const RggLayout& layout, double c0) {
  require(c0 >= 0.0 && !std::isnan(c0), ErrorCode::InvalidArgument, "c0 must be nonnegative");
  const Index n = layout.N();
  Matrix c = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = layout.distance(i, j);
      c(i, j) = c0 * d * d;
    }
  }
  return c;
}

// Ideal RGG topology for the first M nodes: links within the radius cost 0,
// all others are unaffordable.
inline CollaborationTopology rgg_topology(const RggLayout& layout, Index M) {
  const Index n = layout.N();
  require(M >= 1 && M <= n, ErrorCode::InvalidArgument, "RGG topology needs 1 <= M <= N");
  const Eigen::MatrixXi a = layout.adjacency().topRows(M);
  Matrix c(M, n);
  for (Index i = 0; i < M; ++i)
    for (Index j = 0; j < n; ++j) c(i, j) = a(i, j) == 1 ? 0.0 : kInfiniteCost;
  return CollaborationTopology(a, c);
}

// Cumulative(P) or Individual(P_1..P_M).
struct PowerConstraint {
  enum class Kind { Cumulative, Individual };
  Kind kind = Kind::Cumulative;
  double total = 0.0;           // cumulative budget
  std::vector<double> budgets;  // per-node budgets

  static PowerConstraint cumulative(double p) {
    require(std::isfinite(p) && p > 0.0, ErrorCode::InvalidArgument, "cumulative power must be positive");
    PowerConstraint c;
    c.kind = Kind::Cumulative;
    c.total = p;
    return c;
  }

  static PowerConstraint individual(std::vector<double> p) {
    require(!p.empty(), ErrorCode::InvalidArgument, "individual budgets must be nonempty");
    double sum = 0.0;
    for (double v : p) {
      require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidArgument, "budgets must be nonnegative");
      sum += v;
    }
    require(sum > 0.0, ErrorCode::InvalidArgument, "at least one budget must be positive");
    PowerConstraint c;
    c.kind = Kind::Individual;
    c.total = sum;
    c.budgets = std::move(p);
    return c;
  }

  bool is_cumulative() const { return kind == Kind::Cumulative; }
  double total_power() const { return total; }
};

inline double distortion_from_J(double J, double eta2) { return 1.0 / (1.0 / eta2 + J); }
inline double J_from_distortion(double D, double eta2) { return 1.0 / D - 1.0 / eta2; }

}  // namespace collab
