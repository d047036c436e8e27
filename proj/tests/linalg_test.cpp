#include "msgd/linalg.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "msgd/random.hpp"
#include "test_util.hpp"

namespace msgd {
namespace {

// Smallest root of the characteristic polynomial of a symmetric n x n
// matrix, n <= 3, in closed form (trigonometric solution of the cubic).
double smallest_eigenvalue_closed_form(const Eigen::MatrixXd& s) {
  const auto n = s.rows();
  if (n == 1) {
    return s(0, 0);
  }
  if (n == 2) {
    const double tr = s(0, 0) + s(1, 1);
    const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
    return 0.5 * (tr - std::sqrt(std::max(tr * tr - 4.0 * det, 0.0)));
  }
  const double p1 = s(0, 1) * s(0, 1) + s(0, 2) * s(0, 2) + s(1, 2) * s(1, 2);
  const double q = s.trace() / 3.0;
  const double p2 = (s(0, 0) - q) * (s(0, 0) - q) + (s(1, 1) - q) * (s(1, 1) - q) + (s(2, 2) - q) * (s(2, 2) - q) +
                    2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  if (p == 0.0) {
    return q;
  }
  const Eigen::MatrixXd bm = (s - q * Eigen::MatrixXd::Identity(3, 3)) / p;
  const double r = std::clamp(bm.determinant() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  return q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
}

TEST(RowNormSq, Examples) {
  Matrix a(1, 2);
  a << 3, 4;
  EXPECT_EQ(row_norm_sq(a, 0), 25.0);
  EXPECT_EQ(row_norm_sq(Matrix::Identity(2, 2), 1), 1.0);
  Matrix c(2, 2);
  c << 1, 2, -2, 1;
  EXPECT_EQ(row_norm_sq(c, 0), 5.0);
}

TEST(RowNormSq, OutOfRange) {
  EXPECT_THROW(row_norm_sq(Matrix::Identity(2, 2), 2), std::out_of_range);
  EXPECT_THROW(row_norm_sq(Matrix::Identity(2, 2), -1), std::out_of_range);
}

TEST(SigmaMinSq, Examples) {
  EXPECT_NEAR(sigma_min_sq(Matrix::Identity(3, 3)), 1.0, 1e-12);

  Matrix stacked = Matrix::Zero(4, 2);
  stacked(0, 0) = 2;
  stacked(1, 1) = 5;
  EXPECT_NEAR(sigma_min_sq(stacked), 4.0, 1e-12 * 4.0);

  Matrix a(3, 2);
  a << 1, 1, 0, 1, 1, 0;
  EXPECT_NEAR(sigma_min_sq(a), 1.0, 1e-12);
}

TEST(SigmaMinSq, AgreesWithCharacteristicPolynomial) {
  SplitMix64 rng(11);
  for (int n = 1; n <= 3; ++n) {
    for (int trial = 0; trial < 50; ++trial) {
      const Matrix a = testing_util::gaussian_matrix(n + 2 + trial % 4, n, rng);
      const double oracle = smallest_eigenvalue_closed_form(a.transpose() * a);
      const double got = sigma_min_sq(a, {.tol = 1e-12});
      EXPECT_NEAR(got, oracle, 1e-9 * std::max(1.0, oracle)) << "n=" << n << " trial=" << trial;
    }
  }
}

TEST(SigmaMinSq, AgreesWithDenseEigensolverOnDeskSize) {
  SplitMix64 rng(3);
  const Matrix a = testing_util::gaussian_matrix(200, 20, rng);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.transpose() * a, Eigen::EigenvaluesOnly);
  EXPECT_NEAR(sigma_min_sq(a), es.eigenvalues()[0], 1e-9 * es.eigenvalues()[0]);
}

TEST(SigmaMinSq, SpectralSanityBound) {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = testing_util::gaussian_matrix(10, 4, rng);
    EXPECT_LE(sigma_min_sq(a), max_row_norm_sq(a) * static_cast<double>(a.rows()));
  }
}

TEST(SigmaMinSq, RankDeficientThrows) {
  Matrix a(3, 2);
  a << 1, 2, 2, 4, 3, 6;
  EXPECT_THROW(sigma_min_sq(a), RankDeficientError);
  EXPECT_THROW(sigma_min_sq(Matrix::Ones(1, 2)), RankDeficientError);
}

TEST(SigmaMinSq, IterationCapReportsCount) {
  // Two nearly equal smallest eigenvalues make inverse iteration slow.
  Matrix a = Matrix::Zero(3, 3);
  a(0, 0) = 1.0;
  a(1, 1) = 1.0 + 1e-9;
  a(2, 2) = 3.0;
  a.row(0) += 0.5 * a.row(1);
  try {
    sigma_min_sq(a, {.tol = 1e-16, .max_iterations = 3});
    FAIL() << "expected NonConvergenceError";
  } catch (const NonConvergenceError& e) {
    EXPECT_EQ(e.iterations(), 3U);
  }
}

TEST(LeastSquares, Examples) {
  Vector b(2);
  b << 1, 2;
  const auto s = least_squares(Matrix::Identity(2, 2), b);
  EXPECT_NEAR((s.x_star - b).norm(), 0.0, 1e-15);
  EXPECT_NEAR(s.residual.norm(), 0.0, 1e-15);
  EXPECT_TRUE(s.consistent);

  Matrix col(2, 1);
  col << 1, 1;
  Vector b2(2);
  b2 << 0, 2;
  const auto s2 = least_squares(col, b2);
  EXPECT_NEAR(s2.x_star[0], 1.0, 1e-15);
  EXPECT_NEAR(s2.residual[0], 1.0, 1e-15);
  EXPECT_NEAR(s2.residual[1], -1.0, 1e-15);
  EXPECT_FALSE(s2.consistent);
}

TEST(LeastSquares, RecoversPlantedSolution) {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = testing_util::gaussian_matrix(40, 8, rng);
    const Vector x0 = testing_util::gaussian_vector(8, rng);
    const auto s = least_squares(a, a * x0);
    EXPECT_LE((s.x_star - x0).norm(), 1e-10);
    EXPECT_TRUE(s.consistent);
  }
}

TEST(LeastSquares, NormalEquationsHold) {
  SplitMix64 rng(19);
  const Matrix a = testing_util::gaussian_matrix(30, 5, rng);
  const Vector b = testing_util::gaussian_vector(30, rng);
  const auto s = least_squares(a, b);
  EXPECT_LE((a.transpose() * s.residual).norm(), 1e-10 * b.norm());
  EXPECT_FALSE(s.consistent);
}

TEST(LeastSquares, RankDeficientThrows) {
  Matrix a(3, 2);
  a << 1, 1, 1, 1, 1, 1;
  EXPECT_THROW(least_squares(a, Vector::Ones(3)), RankDeficientError);
}

TEST(NullspaceResidual, Examples) {
  Matrix a(2, 1);
  a << 1, 0;
  Vector z(2);
  z << 5, 7;
  const Vector w = nullspace_residual(a, z, 1.0);
  EXPECT_NEAR(w[0], 0.0, 1e-15);
  EXPECT_NEAR(w[1], 7.0, 1e-15);

  const Vector w2 = nullspace_residual(Matrix::Identity(2, 2), z, 1.0);
  EXPECT_EQ(w2, Vector::Zero(2));
}

TEST(NullspaceResidual, OrthogonalToColumns) {
  SplitMix64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix a = testing_util::gaussian_matrix(4, 2, rng);
    const Vector z = testing_util::gaussian_vector(4, rng);
    const Vector w = nullspace_residual(a, z, 2.5);
    EXPECT_LE((a.transpose() * w).norm(), 1e-10 * std::max(1.0, w.norm()));
    EXPECT_LE((a.transpose() * w).norm(), 1e-8 * w.norm());
  }
}

TEST(NullspaceResidual, VectorInRangeGivesZero) {
  Matrix a(3, 1);
  a << 1, 2, 3;
  const Vector w = nullspace_residual(a, 4.0 * a.col(0), 1.0);
  EXPECT_EQ(w, Vector::Zero(3));
}

}  // namespace
}  // namespace msgd
