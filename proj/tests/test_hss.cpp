#include <gtest/gtest.h>

#include "hssfun/generators.hpp"
#include "hssfun/hss.hpp"

using namespace hssfun;

namespace {

double orthonormality(const Matrix& U) {
  return (U.transpose() * U - Matrix::Identity(U.cols(), U.cols())).norm();
}

}  // namespace

TEST(Compress, DiagonalHasRankZeroCouplings) {
  const Matrix A = Vector::LinSpaced(64, 1.0, 2.0).asDiagonal();
  const auto H = compress_dense(A, build_tree(64, 8), 1e-12, true);
  EXPECT_EQ(hss_rank(H, 1e-12), 0);
  EXPECT_EQ(H.max_basis_rank(), 0);
  EXPECT_LT(rel_fro_error(hss_to_dense(H), A), 1e-15);
}

TEST(Compress, LaplacianHasSmallRank) {
  const Matrix A = gen_laplacian(1024);
  const auto H = compress_dense(A, build_tree(1024, 256), 1e-12, true);
  const auto r = hss_rank(H, 1e-12);
  EXPECT_GE(r, 1);
  EXPECT_LE(r, 3);
  EXPECT_LT(rel_fro_error(hss_to_dense(H), A), 1e-10);
}

TEST(Compress, SparseAndDenseAgree) {
  const SparseMatrix S = laplacian_sparse(300);
  const auto tree = build_tree(300, 20);
  const auto Hs = compress_sparse(S, tree, 1e-12, true);
  const auto Hd = compress_dense(Matrix(S), tree, 1e-12, true);
  EXPECT_LT(rel_fro_error(hss_to_dense(Hs), Matrix(S)), 1e-13);
  EXPECT_LT(rel_fro_error(hss_to_dense(Hd), Matrix(S)), 1e-13);
  EXPECT_EQ(Hs.max_basis_rank(), Hd.max_basis_rank());
}

TEST(Compress, RandomSymmetricRoundTrip) {
  Rng rng(11);
  for (Eigen::Index n : {64, 200, 511}) {
    const auto tree = build_tree(n, 16);
    const Matrix A = hss_to_dense(random_hss(tree, 6, rng));
    const double tol = 1e-10;
    const auto H = compress_dense(A, tree, tol, true);
    H.validate();
    EXPECT_LE(rel_fro_error(hss_to_dense(H), A), 10.0 * tree.depth() * tol);
    EXPECT_LE(H.max_basis_rank(), 6);
    for (Eigen::Index i = 1; i < tree.node_count(); ++i)
      EXPECT_LE(orthonormality(H.U[static_cast<std::size_t>(i)]), 1e-12 * std::max<Eigen::Index>(1, H.rank(i)));
    const Matrix Hd = hss_to_dense(H);
    EXPECT_LE(max_asymmetry(Hd), 1e-12 * Hd.norm());
  }
}

TEST(Compress, NonsymmetricRoundTrip) {
  Rng rng(5);
  const auto tree = build_tree(150, 12);
  const Matrix A = hss_to_dense(random_hss(tree, 5, rng, false));
  const auto H = compress_dense(A, tree, 1e-12, false);
  H.validate();
  EXPECT_LT(rel_fro_error(hss_to_dense(H), A), 1e-11);
  Matrix X = random_matrix(150, 3, rng);
  EXPECT_LT(rel_fro_error(hss_matvec(H, X), A * X), 1e-12);
}

TEST(Compress, RandomDenseKeepsAccuracy) {
  Rng rng(8);
  const Matrix A = random_symmetric(256, rng);
  const auto tree = build_tree(256, 32);
  const auto H = compress_dense(A, tree, 1e-8, true);
  EXPECT_LE(rel_fro_error(hss_to_dense(H), A), 10.0 * tree.depth() * 1e-8);
}

TEST(Compress, Errors) {
  EXPECT_THROW(compress_dense(Matrix::Zero(4, 5), build_tree(4, 2), 1e-12, false), shape_error);
  EXPECT_THROW(compress_dense(Matrix::Identity(6, 6), build_tree(4, 2), 1e-12, false), shape_error);
  Matrix N = Matrix::Identity(4, 4);
  N(0, 3) = 1.0;
  EXPECT_THROW(compress_dense(N, build_tree(4, 2), 1e-12, true), contract_error);
}

TEST(HssToDense, ZeroCouplingsGiveBlockDiagonal) {
  Rng rng(2);
  const auto tree = build_tree(40, 10);
  auto H = random_hss(tree, 3, rng);
  for (auto& B : H.B12) B.setZero();
  for (auto& B : H.B21) B.setZero();
  Matrix want = Matrix::Zero(40, 40);
  for (Eigen::Index i : tree.leaves()) {
    const Range r = tree.range(i);
    want.block(r.lo, r.lo, r.size(), r.size()) = H.D[static_cast<std::size_t>(i)];
  }
  EXPECT_EQ(hss_to_dense(H), want);
}

TEST(HssToDense, DepthZero) {
  Rng rng(2);
  const auto H = random_hss(build_tree(7, 7), 3, rng);
  EXPECT_EQ(hss_to_dense(H), H.D[0]);
}

// The big basis of a parent equals blkdiag(children's big bases) times the
// translation operator, and every big basis spans the off-diagonal block row.
TEST(HssToDense, NestednessOfExpandedBases) {
  const Matrix A = gen_gl_fractional(256, 1.5);
  const auto tree = build_tree(256, 32);
  const auto H = compress_dense(A, tree, 1e-12, true);
  for (int l = 1; l < tree.depth(); ++l) {
    const auto parent = big_bases(H, l);
    const auto child = big_bases(H, l + 1);
    for (std::size_t k = 0; k < parent.size(); ++k) {
      const Eigen::Index node = ClusterTree::level_begin(l) + static_cast<Eigen::Index>(k);
      const Matrix rebuilt = blkdiag(child[2 * k], child[2 * k + 1]) * H.U[static_cast<std::size_t>(node)];
      EXPECT_LT((rebuilt - parent[k]).norm(), 1e-12);
      EXPECT_LT(orthonormality(parent[k]), 1e-12 * std::max<Eigen::Index>(1, parent[k].cols()));
      const Range r = tree.range(node);
      Matrix row = A.middleRows(r.lo, r.size());
      row.middleCols(r.lo, r.size()).setZero();
      EXPECT_LT((row - parent[k] * (parent[k].transpose() * row)).norm(), 1e-10 * A.norm());
    }
  }
}

TEST(HssMatvec, Basics) {
  Rng rng(4);
  const auto tree = build_tree(300, 25);
  const auto H = random_hss(tree, 5, rng);
  const Matrix Hd = hss_to_dense(H);
  EXPECT_EQ(hss_matvec(H, Matrix::Zero(300, 2)).norm(), 0.0);
  EXPECT_LT(rel_fro_error(hss_matvec(H, Matrix::Identity(300, 300)), Hd), 1e-13);
  EXPECT_THROW(hss_matvec(H, Matrix::Zero(299, 1)), shape_error);
}

TEST(HssMatvec, CompressedLaplacianMatchesDense) {
  Rng rng(9);
  const Matrix A = gen_laplacian(1024);
  const auto H = compress_dense(A, build_tree(1024, 256), 1e-12, true);
  const Matrix x = random_matrix(1024, 1, rng);
  EXPECT_LT(rel_fro_error(hss_matvec(H, x), A * x), 1e-11);
}

TEST(HssRank, GlFractional) {
  const Matrix A = gen_gl_fractional(1024, 1.5);
  const auto H = compress_dense(A, build_tree(1024, 256), 1e-12, true);
  const auto r = hss_rank(H, 1e-12);
  EXPECT_GE(r, 26);
  EXPECT_LE(r, 32);
  EXPECT_LT(rel_fro_error(hss_to_dense(H), A), 1e-11);
}

TEST(HssRank, GlFractional2048) {
  const Matrix A = gen_gl_fractional(2048, 1.5);
  const auto H = compress_dense(A, build_tree(2048, 256), 1e-12, true);
  const auto r = hss_rank(H, 1e-12);
  EXPECT_GE(r, 30);
  EXPECT_LE(r, 34);
}
