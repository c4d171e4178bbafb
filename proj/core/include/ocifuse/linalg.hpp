#pragma once

#include <utility>

#include <Eigen/Dense>

namespace ocifuse {

/// Dense rectangular matrix (H, C, W_b, K).
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kSymmetryTol = 1e-9;
inline constexpr double kPsdTol = 1e-9;
inline constexpr double kRankTol = 1e-10;

/// Dense real symmetric matrix. The stored entries are always exactly
/// symmetric; construction from an arbitrary matrix either validates
/// approximate symmetry (`from_matrix`) or forces it (`symmetrize`).
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Index dim);

  /// Validates |a_ij - a_ji| <= tol * (1 + max|a|) and stores the symmetric part.
  /// Throws std::invalid_argument for non-square or asymmetric input.
  static SymMatrix from_matrix(const Matrix& a, double tol = kSymmetryTol);
  static SymMatrix identity(Index dim);
  static SymMatrix zero(Index dim);
  static SymMatrix diagonal(const Vector& d);

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

  double trace() const { return m_.trace(); }
  bool is_exactly_zero() const;

  SymMatrix& operator+=(const SymMatrix& other);
  SymMatrix& operator-=(const SymMatrix& other);
  SymMatrix& operator*=(double s);

  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }

 private:
  struct AdoptTag {};
  SymMatrix(Matrix m, AdoptTag) : m_(std::move(m)) {}
  friend SymMatrix symmetrize(const Matrix& a);

  Matrix m_;
};

/// (a + a^T) / 2. Throws std::invalid_argument if `a` is not square.
SymMatrix symmetrize(const Matrix& a);

/// Eigenvalues in ascending order.
Vector eigenvalues(const SymMatrix& a);
double min_eigenvalue(const SymMatrix& a);
double spectral_norm(const SymMatrix& a);

/// min eig(a) >= -tol * (1 + ||a||_2)
bool is_psd(const SymMatrix& a, double tol = kPsdTol);
/// min eig(a) > tol * (1 + ||a||_2)
bool is_pd(const SymMatrix& a, double tol = kPsdTol);

/// a - b is PSD at tolerance `tol`. Throws std::invalid_argument on
/// dimension mismatch.
bool psd_dominates(const SymMatrix& a, const SymMatrix& b, double tol = kPsdTol);

/// Spectral Moore-Penrose inverse: eigenvalues with |l| <= rtol * max|l| are
/// treated as zero.
SymMatrix pinv(const SymMatrix& a, double rtol = kRankTol);

/// Number of singular values above rtol * sigma_max. The zero matrix has rank 0.
Index rank(const Matrix& a, double rtol = kRankTol);

/// Inverse of a PD matrix via Cholesky. Throws std::domain_error if the
/// factorization fails.
SymMatrix inverse_pd(const SymMatrix& a);

/// log det of a PD matrix. Throws std::domain_error if not PD.
double log_det_pd(const SymMatrix& a);

/// k * a * k^T, symmetrized.
SymMatrix congruence(const Matrix& k, const SymMatrix& a);

/// k^T * a * k, symmetrized.
SymMatrix congruence_t(const Matrix& k, const SymMatrix& a);

/// Symmetric square root of a PSD matrix (negative eigenvalues clamped).
SymMatrix sqrt_psd(const SymMatrix& a);

/// Largest absolute elementwise difference.
double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace ocifuse
