#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "hssfun/dense.hpp"
#include "hssfun/generators.hpp"

using namespace hssfun;

namespace {

// Truncated Taylor series of exp; independent of any eigensolver.
Matrix exp_taylor(const Matrix& S, int terms) {
  Matrix term = Matrix::Identity(S.rows(), S.cols());
  Matrix sum = term;
  for (int k = 1; k < terms; ++k) {
    term = term * S / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

}  // namespace

TEST(MatfunDense, IdentityInverse) {
  const Matrix I = Matrix::Identity(3, 3);
  EXPECT_LT((matfun_dense(I, fn::inv()) - I).norm(), 1e-15);
}

TEST(MatfunDense, DiagonalInvsqrt) {
  Matrix S = Vector(Eigen::Vector3d(1, 4, 9)).asDiagonal();
  Matrix want = Vector(Eigen::Vector3d(1, 0.5, 1.0 / 3.0)).asDiagonal();
  EXPECT_LT((matfun_dense(S, fn::invsqrt()) - want).norm(), 1e-15);
}

TEST(MatfunDense, ExpMatchesTaylor) {
  Matrix S(2, 2);
  S << 2, 1, 1, 2;
  const Matrix E = matfun_dense(S, fn::exp());
  EXPECT_LT(rel_fro_error(E, exp_taylor(S, 40)), 1e-14);
  const double e = std::exp(1.0), e3 = std::exp(3.0);
  EXPECT_NEAR(E(0, 0), 0.5 * (e + e3), 1e-12);
  EXPECT_NEAR(E(0, 1), 0.5 * (e3 - e), 1e-12);
}

TEST(MatfunDense, DomainErrorNamesEigenvalue) {
  Matrix S = Vector(Eigen::Vector2d(-2.5, 1.0)).asDiagonal();
  try {
    matfun_dense(S, fn::invsqrt());
    FAIL();
  } catch (const domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("-2.5"), std::string::npos);
  }
}

TEST(MatfunDense, NonSymmetricRejected) {
  Matrix S(2, 2);
  S << 1, 2, 0, 1;
  EXPECT_THROW(matfun_dense(S, fn::exp()), contract_error);
}

TEST(MatfunDense, SignOfZeroIsMinusOne) { EXPECT_EQ(fn::sign()(0.0), -1.0); }

TEST(MatfunDense, Properties) {
  Rng rng(3);
  const Matrix S = random_symmetric(12, rng);
  EXPECT_LT(rel_fro_error(matfun_dense(S, fn::identity()), S), 1e-13);

  const Matrix P = S * S.transpose() + Matrix::Identity(12, 12);
  EXPECT_LT(rel_fro_error(matfun_dense(P, fn::inv()) * P, Matrix::Identity(12, 12)), 1e-10);

  const Matrix Q = random_orthonormal(12, 12, rng);
  const Matrix lhs = matfun_dense(Matrix(Q.transpose() * S * Q), fn::exp());
  const Matrix rhs = Q.transpose() * matfun_dense(S, fn::exp()) * Q;
  EXPECT_LT(rel_fro_error(lhs, rhs), 1e-12);
}

TEST(Orthonormalize, Identity) {
  const auto r = orthonormalize(Matrix::Identity(4, 4), 1e-10);
  EXPECT_EQ(r.rank, 4);
  EXPECT_LT((r.Q.cwiseAbs() - Matrix::Identity(4, 4)).norm(), 1e-15);
}

TEST(Orthonormalize, DuplicateColumnDeflated) {
  Matrix M = Matrix::Zero(5, 2);
  M(0, 0) = M(0, 1) = 1.0;
  const auto r = orthonormalize(M, 1e-10);
  EXPECT_EQ(r.rank, 1);
  EXPECT_NEAR(std::abs(r.Q(0, 0)), 1.0, 1e-15);
}

TEST(Orthonormalize, RepeatedColumnMatchesSvdRank) {
  Rng rng(7);
  Matrix R = random_matrix(10, 4, rng);
  Matrix M(10, 5);
  M << R, R.col(0);
  const auto r = orthonormalize(M, 1e-8);
  Eigen::JacobiSVD<Matrix> svd(M);
  Eigen::Index want = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-8 * M.norm()) ++want;
  EXPECT_EQ(r.rank, 4);
  EXPECT_EQ(r.rank, want);
  EXPECT_LT((r.Q.transpose() * r.Q - Matrix::Identity(4, 4)).norm(), 1e-13 * 4);
  EXPECT_LT((M - r.Q * (r.Q.transpose() * M)).norm(), 1e-8 * M.norm() * 5);
}

TEST(Orthonormalize, ZeroColumnsGiveEmptyBasis) {
  const auto r = orthonormalize(Matrix::Zero(6, 3), 1e-10);
  EXPECT_EQ(r.rank, 0);
  EXPECT_EQ(r.Q.cols(), 0);
}

TEST(RelFroError, Basics) {
  Rng rng(1);
  const Matrix B = random_matrix(5, 4, rng);
  EXPECT_EQ(rel_fro_error(B, B), 0.0);
  EXPECT_DOUBLE_EQ(rel_fro_error(Matrix::Zero(5, 4), B), 1.0);
  Matrix E = random_matrix(5, 4, rng);
  E *= B.norm() / E.norm();
  EXPECT_NEAR(rel_fro_error(B + 1e-6 * E, B), 1e-6, 1e-15);
  EXPECT_THROW(rel_fro_error(B, Matrix::Zero(4, 4)), shape_error);
}

TEST(Csv, RoundTripsAtFullPrecision) {
  Rng rng(2);
  const Matrix M = random_matrix(3, 4, rng) * 1e-7;
  std::stringstream ss;
  write_csv_matrix(ss, M);
  EXPECT_EQ(read_csv_matrix(ss), M);
  std::stringstream bad("1,2\n3,x\n");
  EXPECT_THROW(read_csv_matrix(bad), parse_error);
}
