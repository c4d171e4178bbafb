#include "ocifuse/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace ocifuse {

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> eigen_of(const SymMatrix& a) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(a.matrix());
}

void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument(std::string(what) + ": matrix is " + std::to_string(a.rows()) +
                                "x" + std::to_string(a.cols()) + ", expected square");
  }
}

}  // namespace

SymMatrix::SymMatrix(Index dim) : m_(Matrix::Zero(dim, dim)) {}

SymMatrix SymMatrix::from_matrix(const Matrix& a, double tol) {
  require_square(a, "SymMatrix");
  const double scale = 1.0 + (a.size() > 0 ? a.cwiseAbs().maxCoeff() : 0.0);
  if (a.size() > 0 && (a - a.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
    throw std::invalid_argument("SymMatrix: matrix is not symmetric");
  }
  return symmetrize(a);
}

SymMatrix SymMatrix::identity(Index dim) {
  SymMatrix s;
  s.m_ = Matrix::Identity(dim, dim);
  return s;
}

SymMatrix SymMatrix::zero(Index dim) { return SymMatrix(dim); }

SymMatrix SymMatrix::diagonal(const Vector& d) {
  SymMatrix s;
  s.m_ = d.asDiagonal();
  return s;
}

bool SymMatrix::is_exactly_zero() const {
  return (m_.array() == 0.0).all();
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& other) {
  m_ += other.m_;
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& other) {
  m_ -= other.m_;
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  m_ *= s;
  return *this;
}

SymMatrix symmetrize(const Matrix& a) {
  require_square(a, "symmetrize");
  // Build each mirrored pair from the same expression so the result is
  // bitwise symmetric and symmetrize is idempotent.
  Matrix out(a.rows(), a.cols());
  for (Index j = 0; j < a.cols(); ++j) {
    out(j, j) = a(j, j);
    for (Index i = j + 1; i < a.rows(); ++i) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return SymMatrix(std::move(out), SymMatrix::AdoptTag{});
}

Vector eigenvalues(const SymMatrix& a) {
  if (a.dim() == 0) return Vector();
  return Eigen::SelfAdjointEigenSolver<Matrix>(a.matrix(), Eigen::EigenvaluesOnly).eigenvalues();
}

double min_eigenvalue(const SymMatrix& a) {
  if (a.dim() == 0) return 0.0;
  return eigenvalues(a)(0);
}

double spectral_norm(const SymMatrix& a) {
  if (a.dim() == 0) return 0.0;
  return eigenvalues(a).cwiseAbs().maxCoeff();
}

bool is_psd(const SymMatrix& a, double tol) {
  if (a.dim() == 0) return true;
  const Vector ev = eigenvalues(a);
  const double norm = ev.cwiseAbs().maxCoeff();
  return ev(0) >= -tol * (1.0 + norm);
}

bool is_pd(const SymMatrix& a, double tol) {
  if (a.dim() == 0) return true;
  const Vector ev = eigenvalues(a);
  const double norm = ev.cwiseAbs().maxCoeff();
  return ev(0) > tol * (1.0 + norm);
}

bool psd_dominates(const SymMatrix& a, const SymMatrix& b, double tol) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("psd_dominates: dimension mismatch (" + std::to_string(a.dim()) +
                                " vs " + std::to_string(b.dim()) + ")");
  }
  return is_psd(a - b, tol);
}

SymMatrix pinv(const SymMatrix& a, double rtol) {
  if (a.dim() == 0) return a;
  const auto es = eigen_of(a);
  const Vector& ev = es.eigenvalues();
  const double cutoff = rtol * ev.cwiseAbs().maxCoeff();
  Vector inv(ev.size());
  for (Index i = 0; i < ev.size(); ++i) {
    inv(i) = std::abs(ev(i)) > cutoff && ev(i) != 0.0 ? 1.0 / ev(i) : 0.0;
  }
  const Matrix& v = es.eigenvectors();
  return symmetrize(v * inv.asDiagonal() * v.transpose());
}

Index rank(const Matrix& a, double rtol) {
  if (a.size() == 0) return 0;
  const Vector sv = Eigen::JacobiSVD<Matrix>(a).singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cutoff = rtol * sv(0);
  return static_cast<Index>((sv.array() > cutoff).count());
}

SymMatrix inverse_pd(const SymMatrix& a) {
  Eigen::LLT<Matrix> llt(a.matrix());
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("inverse_pd: matrix is not positive definite");
  }
  return symmetrize(llt.solve(Matrix::Identity(a.dim(), a.dim())));
}

double log_det_pd(const SymMatrix& a) {
  Eigen::LLT<Matrix> llt(a.matrix());
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("log_det_pd: matrix is not positive definite");
  }
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

SymMatrix congruence(const Matrix& k, const SymMatrix& a) {
  return symmetrize(k * a.matrix() * k.transpose());
}

SymMatrix congruence_t(const Matrix& k, const SymMatrix& a) {
  return symmetrize(k.transpose() * a.matrix() * k);
}

SymMatrix sqrt_psd(const SymMatrix& a) {
  const auto es = eigen_of(a);
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix& v = es.eigenvectors();
  return symmetrize(v * root.asDiagonal() * v.transpose());
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  }
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace ocifuse
