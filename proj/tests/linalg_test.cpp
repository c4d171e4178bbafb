#include "ocifuse/linalg.hpp"

#include <gtest/gtest.h>

#include "support/instances.hpp"

namespace ocifuse {
namespace {

using testing::random_matrix;
using testing::random_pd;
using testing::Rng;

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

TEST(Symmetrize, AveragesOffDiagonal) {
  EXPECT_EQ(symmetrize(m2(1, 2, 0, 1)).matrix(), m2(1, 1, 1, 1));
  EXPECT_EQ(symmetrize(Matrix::Identity(3, 3)).matrix(), Matrix::Identity(3, 3));
  EXPECT_EQ(symmetrize(m2(0, 4, -4, 0)).matrix(), Matrix::Zero(2, 2));
}

TEST(Symmetrize, RejectsNonSquare) {
  EXPECT_THROW(symmetrize(Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST(Symmetrize, Idempotent) {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const SymMatrix once = symmetrize(random_matrix(4, 4, rng));
    EXPECT_EQ(symmetrize(once.matrix()).matrix(), once.matrix());
  }
}

TEST(SymMatrix, FromMatrixValidatesSymmetry) {
  EXPECT_NO_THROW(SymMatrix::from_matrix(m2(1, 2, 2 + 1e-12, 1)));
  EXPECT_THROW(SymMatrix::from_matrix(m2(1, 2, 0, 1)), std::invalid_argument);
  EXPECT_THROW(SymMatrix::from_matrix(Matrix::Zero(2, 1)), std::invalid_argument);
  const SymMatrix s = SymMatrix::from_matrix(m2(1, 2, 2 + 1e-12, 1));
  EXPECT_EQ(s(0, 1), s(1, 0));
}

TEST(SymMatrix, ArithmeticAndZero) {
  SymMatrix a = SymMatrix::identity(2) * 3.0 - SymMatrix::identity(2);
  EXPECT_EQ(a.matrix(), 2.0 * Matrix::Identity(2, 2));
  EXPECT_TRUE(SymMatrix::zero(3).is_exactly_zero());
  EXPECT_FALSE(a.is_exactly_zero());
  EXPECT_DOUBLE_EQ(SymMatrix::diagonal(Vector::LinSpaced(3, 1, 3)).trace(), 6.0);
}

TEST(IsPsd, Examples) {
  EXPECT_TRUE(is_psd(SymMatrix::identity(3), 0.0));
  EXPECT_FALSE(is_psd(symmetrize(m2(1, 2, 2, 1)), 1e-9));
  EXPECT_TRUE(is_psd(SymMatrix::zero(3), 0.0));
}

TEST(IsPd, Examples) {
  EXPECT_TRUE(is_pd(SymMatrix::identity(2)));
  EXPECT_FALSE(is_pd(SymMatrix::zero(2)));
  Vector d(2);
  d << 1.0, 1e-14;
  EXPECT_FALSE(is_pd(SymMatrix::diagonal(d), 1e-9));
}

TEST(Pinv, Examples) {
  Vector d(2);
  d << 2.0, 0.0;
  Vector expected(2);
  expected << 0.5, 0.0;
  EXPECT_LT(max_abs_diff(pinv(SymMatrix::diagonal(d)).matrix(),
                         SymMatrix::diagonal(expected).matrix()),
            1e-15);
  EXPECT_LT(max_abs_diff(pinv(SymMatrix::identity(3)).matrix(), Matrix::Identity(3, 3)), 1e-15);
}

TEST(Pinv, PenroseIdentitiesOnRankDeficient) {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const Index n = testing::uniform_index(2, 6, rng);
    const Index r = testing::uniform_index(1, n - 1, rng);
    const Matrix f = random_matrix(n, r, rng);
    const SymMatrix a = symmetrize(f * f.transpose());
    const Matrix am = a.matrix();
    const Matrix p = pinv(a).matrix();
    const double scale = am.norm();
    EXPECT_LT((am * p * am - am).norm(), 1e-8 * scale);
    EXPECT_LT((p * am * p - p).norm(), 1e-8 * p.norm());
    EXPECT_LT(((am * p).transpose() - am * p).norm(), 1e-8);
    EXPECT_LT(((p * am).transpose() - p * am).norm(), 1e-8);
  }
}

TEST(Pinv, EqualsInverseForPd) {
  Rng rng(3);
  for (int t = 0; t < 30; ++t) {
    const SymMatrix a = random_pd(4, rng);
    EXPECT_TRUE(is_pd(a));
    EXPECT_TRUE(psd_dominates(a, SymMatrix::zero(4)));
    const Matrix prod = a.matrix() * pinv(a).matrix();
    EXPECT_LT(max_abs_diff(prod, Matrix::Identity(4, 4)), 1e-8);
    EXPECT_LT(max_abs_diff(inverse_pd(a).matrix(), pinv(a).matrix()),
              1e-8 * inverse_pd(a).matrix().norm());
  }
}

TEST(Rank, Examples) {
  EXPECT_EQ(rank(Matrix::Identity(3, 3)), 3);
  EXPECT_EQ(rank(Matrix::Ones(3, 3)), 1);
  EXPECT_EQ(rank(m2(1, 0, 0, 1e-15), 1e-9), 1);
  EXPECT_EQ(rank(Matrix::Zero(2, 4)), 0);
}

TEST(Rank, GramHasSameRank) {
  Rng rng(4);
  for (int t = 0; t < 40; ++t) {
    const Index rows = testing::uniform_index(1, 6, rng);
    const Index cols = testing::uniform_index(1, 6, rng);
    const Index inner = testing::uniform_index(1, std::min(rows, cols), rng);
    const Matrix a = random_matrix(rows, inner, rng) * random_matrix(inner, cols, rng);
    EXPECT_EQ(rank(a.transpose() * a, 1e-10), rank(a, 1e-10)) << "trial " << t;
  }
}

TEST(PsdDominates, Examples) {
  const SymMatrix i = SymMatrix::identity(2);
  EXPECT_TRUE(psd_dominates(2.0 * i, i));
  EXPECT_FALSE(psd_dominates(i, 2.0 * i));
  EXPECT_TRUE(psd_dominates(i, i, 0.0));
  EXPECT_THROW(psd_dominates(i, SymMatrix::identity(3)), std::invalid_argument);
}

TEST(Factorizations, InverseAndLogDet) {
  const SymMatrix a = SymMatrix::from_matrix(m2(4, 2, 2, 3));
  EXPECT_NEAR(log_det_pd(a), std::log(8.0), 1e-14);
  EXPECT_LT(max_abs_diff(a.matrix() * inverse_pd(a).matrix(), Matrix::Identity(2, 2)), 1e-14);
  EXPECT_THROW(inverse_pd(symmetrize(m2(1, 2, 2, 1))), std::domain_error);
  EXPECT_THROW(log_det_pd(SymMatrix::zero(2)), std::domain_error);
}

TEST(Factorizations, SqrtAndCongruence) {
  Rng rng(5);
  const SymMatrix a = random_pd(3, rng);
  const Matrix s = sqrt_psd(a).matrix();
  EXPECT_LT(max_abs_diff(s * s, a.matrix()), 1e-12);
  const Matrix k = random_matrix(2, 3, rng);
  EXPECT_LT(max_abs_diff(congruence(k, a).matrix(), k * a.matrix() * k.transpose()), 1e-12);
  EXPECT_LT(max_abs_diff(congruence_t(k.transpose(), a).matrix(),
                         k * a.matrix() * k.transpose()),
            1e-12);
  EXPECT_NEAR(spectral_norm(SymMatrix::identity(3) * -2.0), 2.0, 1e-14);
  EXPECT_NEAR(min_eigenvalue(symmetrize(m2(1, 2, 2, 1))), -1.0, 1e-14);
  EXPECT_NEAR(eigenvalues(symmetrize(m2(1, 2, 2, 1)))(1), 3.0, 1e-14);
}

}  // namespace
}  // namespace ocifuse
