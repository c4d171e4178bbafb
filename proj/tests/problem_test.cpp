#include "ocifuse/problem.hpp"

#include <algorithm>

#include <gtest/gtest.h>

#include "ocifuse/errors.hpp"
#include "support/instances.hpp"

namespace ocifuse {
namespace {

using testing::Rng;

bool contains(const std::vector<std::string>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(),
                     [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

CiProblem two_full_state(Index n) {
  CiProblem p;
  p.estimates.push_back({Matrix::Identity(n, n), SymMatrix::identity(n)});
  p.estimates.push_back({Matrix::Identity(n, n), SymMatrix::identity(n) * 2.0});
  return p;
}

TEST(Criterion, ParseAndEvaluate) {
  EXPECT_EQ(parse_criterion("trace"), Criterion::kTrace);
  EXPECT_EQ(parse_criterion("logdet"), Criterion::kLogDet);
  EXPECT_THROW(parse_criterion("det"), std::invalid_argument);
  EXPECT_EQ(to_string(Criterion::kLogDet), "logdet");
  const SymMatrix b = SymMatrix::identity(2) * 2.0;
  EXPECT_DOUBLE_EQ(evaluate_criterion(Criterion::kTrace, b), 4.0);
  EXPECT_NEAR(evaluate_criterion(Criterion::kLogDet, b), 2.0 * std::log(2.0), 1e-15);
  EXPECT_THROW(evaluate_criterion(Criterion::kLogDet, SymMatrix::zero(2)), std::domain_error);
}

TEST(ValidateOci, WellFormedCiShaped) {
  EXPECT_TRUE(validate_oci(ci_to_oci(two_full_state(2))).empty());
}

TEST(ValidateOci, IndefiniteNoise) {
  OciProblem p = ci_to_oci(two_full_state(1));
  Matrix r(2, 2);
  r << 1, 2, 2, 1;
  p.noise = SymMatrix::from_matrix(r);
  const auto v = validate_oci(p);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], "R must be PD or exactly zero");
}

TEST(ValidateOci, SingularNonzeroNoiseRejected) {
  OciProblem p = ci_to_oci(two_full_state(1));
  Vector d(2);
  d << 1.0, 0.0;
  p.noise = SymMatrix::diagonal(d);
  EXPECT_EQ(noise_regime(p.noise), NoiseRegime::kUnsupported);
  EXPECT_TRUE(contains(validate_oci(p), "R must be PD or exactly zero"));
}

TEST(ValidateOci, ZeroNoiseNeedsSquareC) {
  OciProblem p;
  p.h = Matrix::Ones(3, 1);
  p.noise = SymMatrix::zero(3);
  p.coupling = Matrix::Identity(3, 2);
  p.bounds.push_back({Matrix::Identity(2, 2), SymMatrix::identity(2)});
  const auto v = validate_oci(p);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_TRUE(contains(v, "R=0 requires square invertible C"));
}

TEST(ValidateOci, DimensionAndBoundViolations) {
  OciProblem p;
  p.h = Matrix::Ones(2, 1);
  p.noise = SymMatrix::identity(3);
  p.coupling = Matrix::Identity(2, 2);
  p.bounds.push_back({Matrix::Identity(2, 3), SymMatrix::identity(2)});
  p.bounds.push_back({Matrix::Ones(2, 2), SymMatrix::identity(2)});
  p.bounds.push_back({Matrix::Identity(1, 2), SymMatrix::zero(1)});
  const auto v = validate_oci(p);
  EXPECT_TRUE(contains(v, "R is 3x3"));
  EXPECT_TRUE(contains(v, "bound 0: W is 2x3"));
  EXPECT_TRUE(contains(v, "bound 1: W must have full row rank"));
  EXPECT_TRUE(contains(v, "bound 2: X must be PD"));
  OciProblem empty = ci_to_oci(two_full_state(1));
  empty.bounds.clear();
  EXPECT_TRUE(contains(validate_oci(empty), "at least one bound"));
}

TEST(ValidateCi, ReportsEveryViolation) {
  CiProblem p;
  EXPECT_FALSE(validate_ci(p).empty());
  p.estimates.push_back({Matrix::Identity(2, 2), SymMatrix::identity(2)});
  p.estimates.push_back({Matrix::Identity(1, 3), SymMatrix::identity(2)});
  EXPECT_GE(validate_ci(p).size(), 2u);
  EXPECT_THROW(ci_to_oci(p), InvalidProblemError);
}

TEST(ValidateSci, KnownPartShape) {
  SciProblem p;
  p.estimates.push_back({Matrix::Identity(2, 2), SymMatrix::identity(2)});
  p.known = SymMatrix::identity(3);
  EXPECT_TRUE(contains(validate_sci(p), "X2 is 3x3"));
  p.known = SymMatrix::zero(2);
  EXPECT_TRUE(contains(validate_sci(p), "X2 must be PD"));
}

TEST(CiToOci, SingleBlock) {
  CiProblem p;
  p.estimates.push_back({Matrix::Identity(2, 2), SymMatrix::identity(2)});
  const OciProblem o = ci_to_oci(p);
  EXPECT_EQ(o.h, Matrix::Identity(2, 2));
  ASSERT_EQ(o.bounds.size(), 1u);
  EXPECT_EQ(o.bounds[0].selector, Matrix::Identity(2, 2));
  EXPECT_EQ(o.bounds[0].bound.matrix(), Matrix::Identity(2, 2));
  EXPECT_TRUE(o.noise.is_exactly_zero());
  EXPECT_EQ(o.coupling, Matrix::Identity(2, 2));
}

TEST(CiToOci, ScalarSelectors) {
  CiProblem p;
  p.estimates.push_back({Matrix::Ones(1, 1), SymMatrix::identity(1)});
  p.estimates.push_back({Matrix::Ones(1, 1), SymMatrix::identity(1)});
  const OciProblem o = ci_to_oci(p);
  Matrix w1(1, 2), w2(1, 2);
  w1 << 1, 0;
  w2 << 0, 1;
  EXPECT_EQ(o.bounds[0].selector, w1);
  EXPECT_EQ(o.bounds[1].selector, w2);
}

TEST(CiToOci, OffsetBookkeeping) {
  Rng rng(7);
  CiProblem p;
  for (Index rows : {2, 1, 2}) {
    p.estimates.push_back({testing::random_matrix(rows, 2, rng), testing::random_pd(rows, rng)});
  }
  p.criterion = Criterion::kLogDet;
  const OciProblem o = ci_to_oci(p);
  Matrix w2(1, 5);
  w2 << 0, 0, 1, 0, 0;
  EXPECT_EQ(o.bounds[1].selector, w2);
  EXPECT_EQ(o.criterion, Criterion::kLogDet);
}

TEST(SciToOci, NoiseIsKnownPart) {
  Rng rng(8);
  for (bool dense : {false, true}) {
    const SciProblem p =
        dense ? testing::random_sci_dense(2, true, rng) : testing::random_sci_block(2, rng);
    const OciProblem o = sci_to_oci(p);
    EXPECT_EQ(o.noise.matrix(), p.known.matrix());
    EXPECT_EQ(o.coupling, Matrix::Identity(4, 4));
    EXPECT_EQ(o.measurement_dim(), o.uncertain_dim());
  }
  SciProblem single;
  single.estimates.push_back({Matrix::Identity(2, 2), SymMatrix::identity(2)});
  single.known = SymMatrix::identity(2) * 0.5;
  const OciProblem o = sci_to_oci(single);
  EXPECT_EQ(o.bounds.size(), 1u);
  EXPECT_EQ(noise_regime(o.noise), NoiseRegime::kPositiveDefinite);
}

TEST(Conversions, SelectorsStackToIdentityAndValidate) {
  Rng rng(9);
  for (int t = 0; t < 30; ++t) {
    const auto count = static_cast<std::size_t>(testing::uniform_index(1, 5, rng));
    const CiProblem ci = testing::random_ci(count, testing::uniform_index(1, 4, rng), false, rng);
    const OciProblem o = ci_to_oci(ci);
    EXPECT_TRUE(validate_oci(o).empty());
    Matrix stack(o.measurement_dim(), o.measurement_dim());
    Index row = 0;
    for (const auto& b : o.bounds) {
      stack.middleRows(row, b.selector.rows()) = b.selector;
      row += b.selector.rows();
    }
    EXPECT_EQ(stack, Matrix::Identity(row, row));
  }
}

TEST(BlockSelectors, Layout) {
  const auto w = block_selectors({1, 2});
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[1].rows(), 2);
  EXPECT_EQ(w[1].cols(), 3);
  EXPECT_EQ(w[1](0, 1), 1.0);
  EXPECT_EQ(w[1](1, 2), 1.0);
}

TEST(NormalizeSimplex, ClampsAndRenormalizes) {
  Vector w(3);
  w << 0.5, -1e-12, 0.5000001;
  const Vector n = normalize_simplex(w);
  EXPECT_EQ(n(1), 0.0);
  EXPECT_NEAR(n.sum(), 1.0, 1e-15);
  w(1) = -0.1;
  EXPECT_THROW(normalize_simplex(w), std::invalid_argument);
  EXPECT_THROW(normalize_simplex(Vector::Zero(2)), std::invalid_argument);
}

}  // namespace
}  // namespace ocifuse
