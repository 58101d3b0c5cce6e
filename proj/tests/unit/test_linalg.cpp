#include "qpots/kernel.hpp"
#include "qpots/linalg.hpp"

#include <gtest/gtest.h>

using namespace qpots;

namespace {

MatrixXd random_points(Index n, Index d, std::uint64_t seed) {
  Rng rng(seed);
  MatrixXd X(n, d);
  for (Index i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform();
  return X;
}

MatrixXd random_spd(Index n, std::uint64_t seed) {
  Rng rng(seed);
  MatrixXd A(n, n);
  for (Index i = 0; i < A.size(); ++i) A.data()[i] = rng.normal();
  return A * A.transpose() + static_cast<double>(n) * MatrixXd::Identity(n, n);
}

}  // namespace

TEST(CholeskyWithJitter, WellConditionedNeedsNoJitter) {
  const MatrixXd A = random_spd(12, 1);
  const auto jc = cholesky_with_jitter(A);
  EXPECT_EQ(jc.jitter, 0.0);
  EXPECT_LT(relative_frobenius_error(jc.L * jc.L.transpose(), A), 1e-14);
  EXPECT_TRUE(jc.L.isLowerTriangular());
}

TEST(CholeskyWithJitter, SingularMatrixGetsBoundedJitter) {
  // Rank-one 3x3: plain LLT fails, a small diagonal shift fixes it.
  const VectorXd v = (VectorXd(3) << 1.0, 2.0, 3.0).finished();
  const MatrixXd A = v * v.transpose();
  const auto jc = cholesky_with_jitter(A);
  EXPECT_GT(jc.jitter, 0.0);
  EXPECT_LE(jc.jitter, 1e-4 * A.diagonal().mean() * (1.0 + 1e-9));
  MatrixXd shifted = A;
  shifted.diagonal().array() += jc.jitter;
  EXPECT_LT(relative_frobenius_error(jc.L * jc.L.transpose(), shifted), 1e-10);
}

TEST(CholeskyWithJitter, IndefiniteMatrixThrows) {
  MatrixXd A = MatrixXd::Identity(3, 3);
  A(2, 2) = -1.0;
  EXPECT_THROW(cholesky_with_jitter(A), IllConditionedError);
  MatrixXd B = MatrixXd::Identity(2, 2);
  B(0, 1) = std::nan("");
  EXPECT_THROW(cholesky_with_jitter(B), IllConditionedError);
}

TEST(ExactSqrt, RejectsAsymmetricInput) {
  MatrixXd A = MatrixXd::Identity(3, 3);
  A(0, 2) = 0.5;
  EXPECT_THROW(exact_sqrt(A), std::invalid_argument);
}

TEST(Nystrom, ExactWhenAllPointsAreInducing) {
  const MatrixXd X = random_points(40, 3, 2);
  const MatrixXd S = matern52_gram(X, VectorXd::Constant(3, 0.7), 1.0);
  const SqrtFactor f = nystrom_sqrt(S, S);
  EXPECT_EQ(f.method, SqrtMethod::Nystrom);
  EXPECT_EQ(f.inducing_count, 40);
  EXPECT_LT(relative_frobenius_error(f.factor * f.factor.transpose(), S), 1e-8);
}

TEST(Nystrom, ErrorShrinksWithMoreInducingPoints) {
  const MatrixXd X = random_points(200, 2, 4);
  const MatrixXd S = matern52_gram(X, VectorXd::Constant(2, 0.3), 1.0);
  double prev = 1e300;
  for (Index m : {10, 40, 100, 200}) {
    // Nested inducing sets (first m rows) make the error monotone.
    const SqrtFactor f = nystrom_sqrt(S.topRows(m), S.topLeftCorner(m, m));
    const double err = relative_frobenius_error(f.factor * f.factor.transpose(), S);
    EXPECT_LE(err, prev + 1e-12) << "m=" << m;
    prev = err;
  }
  EXPECT_LT(prev, 1e-8);
}

TEST(Nystrom, DuplicateInducingPointsStayExactAtInducingSet) {
  MatrixXd Z(3, 1);
  Z << 0.2, 0.2, 0.7;
  const MatrixXd Szz = matern52_gram(Z, VectorXd::Ones(1), 1.0);
  MatrixXd X(5, 1);
  X << 0.0, 0.2, 0.4, 0.7, 1.0;
  const MatrixXd Szx = matern52_gram(Z, X, VectorXd::Ones(1), 1.0);
  const SqrtFactor f = nystrom_sqrt(Szx, Szz);
  // Either route must reproduce the covariance exactly at the inducing points.
  const MatrixXd approx = f.factor * f.factor.transpose();
  const MatrixXd exact = matern52_gram(X, VectorXd::Ones(1), 1.0);
  EXPECT_NEAR(approx(1, 1), exact(1, 1), 1e-6);
  EXPECT_NEAR(approx(3, 3), exact(3, 3), 1e-6);
  EXPECT_NEAR(approx(1, 3), exact(1, 3), 1e-6);
}

TEST(PivotedCholesky, FullRankReconstruction) {
  const MatrixXd S = random_spd(15, 6);
  const auto pc = pivoted_cholesky(S, 0.0);
  EXPECT_EQ(pc.G.cols(), 15);
  EXPECT_LT(relative_frobenius_error(pc.G * pc.G.transpose(), S), 1e-12);
  // Greedy pivots: the first pivot is the largest diagonal entry.
  Index arg = 0;
  S.diagonal().maxCoeff(&arg);
  EXPECT_EQ(pc.pivots.front(), arg);
}

TEST(PivotedCholesky, PivotRowsAreTriangular) {
  const MatrixXd S = random_spd(10, 8);
  const auto pc = pivoted_cholesky(S, 0.0);
  for (std::size_t a = 0; a < pc.pivots.size(); ++a) {
    for (Index c = static_cast<Index>(a) + 1; c < pc.G.cols(); ++c) EXPECT_EQ(pc.G(pc.pivots[a], c), 0.0);
  }
}

TEST(PivotedCholesky, LowRankStopsAtTolerance) {
  Rng rng(9);
  MatrixXd B(20, 3);
  for (Index i = 0; i < B.size(); ++i) B.data()[i] = rng.normal();
  const MatrixXd S = B * B.transpose();
  const auto pc = pivoted_cholesky(S, 1e-10);
  EXPECT_EQ(pc.G.cols(), 3);
  EXPECT_LT(pc.residual.maxCoeff(), 1e-8);
  EXPECT_LT(relative_frobenius_error(pc.G * pc.G.transpose(), S), 1e-10);
}

TEST(RelativeFrobenius, KnownValue) {
  const MatrixXd B = MatrixXd::Identity(2, 2);
  const MatrixXd A = 1.5 * B;
  EXPECT_NEAR(relative_frobenius_error(A, B), 0.5, 1e-15);
}
