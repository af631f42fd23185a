#pragma once

// Classical HSS representation with nested bases.
//
// Leaves store U_tau, V_tau (|tau| x r_tau) and the diagonal block A_tautau.
// Non-leaves store translation operators U_tau, V_tau ((r_alpha + r_beta) x r_tau)
// so that the (never stored) big basis of tau is blkdiag(Ubig_alpha, Ubig_beta) U_tau.
// Every parent stores the couplings of its two children:
//   A(I_alpha, I_beta) = Ubig_alpha * B12 * Vbig_beta^T
//   A(I_beta, I_alpha) = Ubig_beta  * B21 * Vbig_alpha^T

#include <algorithm>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cluster_tree.hpp"
#include "dense.hpp"
#include "errors.hpp"
#include "matrix_source.hpp"

namespace hssfun {

struct HssMatrix {
  ClusterTree tree;
  std::vector<Matrix> U, V;  // per node; root entries are empty
  std::vector<Matrix> D;     // leaf diagonal blocks (empty at non-leaves)
  std::vector<Matrix> B12;   // per non-leaf: coupling left child -> right child
  std::vector<Matrix> B21;   // per non-leaf: coupling right child -> left child
  bool symmetric = false;

  HssMatrix() = default;
  explicit HssMatrix(ClusterTree t) : tree(std::move(t)) { resize(); }

  void resize() {
    const auto m = static_cast<std::size_t>(tree.node_count());
    U.assign(m, Matrix());
    V.assign(m, Matrix());
    D.assign(m, Matrix());
    B12.assign(m, Matrix());
    B21.assign(m, Matrix());
    // Root has no basis: a 0-column factor keeps shape arithmetic uniform.
    U[0] = Matrix(0, 0);
    V[0] = Matrix(0, 0);
  }

  Eigen::Index size() const { return tree.size(); }
  Eigen::Index rank(Eigen::Index node) const { return node == 0 ? 0 : U[static_cast<std::size_t>(node)].cols(); }
  Eigen::Index col_rank(Eigen::Index node) const { return node == 0 ? 0 : V[static_cast<std::size_t>(node)].cols(); }

  /// Largest basis column count over all nodes.
  Eigen::Index max_basis_rank() const {
    Eigen::Index r = 0;
    for (Eigen::Index i = 1; i < tree.node_count(); ++i) r = std::max({r, rank(i), col_rank(i)});
    return r;
  }

  /// Throws shape_error when generator shapes are inconsistent.
  void validate() const {
    const auto at = [](const std::vector<Matrix>& v, Eigen::Index i) -> const Matrix& {
      return v[static_cast<std::size_t>(i)];
    };
    auto fail = [](Eigen::Index node, const std::string& what) {
      throw shape_error("hss node " + ClusterTree::id_of(node).str() + ": " + what);
    };
    for (Eigen::Index i = 0; i < tree.node_count(); ++i) {
      const Eigen::Index sz = tree.range(i).size();
      if (tree.is_leaf(i)) {
        if (at(D, i).rows() != sz || at(D, i).cols() != sz) fail(i, "diagonal block has wrong shape");
        if (i != 0 && (at(U, i).rows() != sz || at(V, i).rows() != sz)) fail(i, "leaf basis has wrong row count");
      } else {
        const Eigen::Index a = ClusterTree::left(i), b = ClusterTree::right(i);
        if (i != 0 && (at(U, i).rows() != rank(a) + rank(b) || at(V, i).rows() != col_rank(a) + col_rank(b)))
          fail(i, "translation operator has wrong row count");
        if (at(B12, i).rows() != rank(a) || at(B12, i).cols() != col_rank(b)) fail(i, "B12 has wrong shape");
        if (at(B21, i).rows() != rank(b) || at(B21, i).cols() != col_rank(a)) fail(i, "B21 has wrong shape");
      }
    }
  }
};

/// Big bases Ubig_tau (or Vbig_tau) for every node at depth `level`, expanded
/// through the translation operators.  Test and conversion support only.
inline std::vector<Matrix> big_bases(const HssMatrix& H, int level, bool column_basis = false) {
  const auto& gen = column_basis ? H.V : H.U;
  const int L = H.tree.depth();
  std::vector<Matrix> cur;
  for (Eigen::Index i : H.tree.nodes_at_depth(L)) cur.push_back(gen[static_cast<std::size_t>(i)]);
  for (int l = L - 1; l >= level; --l) {
    std::vector<Matrix> next;
    const Eigen::Index first_child = ClusterTree::level_begin(l + 1);
    for (Eigen::Index i : H.tree.nodes_at_depth(l)) {
      const auto a = static_cast<std::size_t>(ClusterTree::left(i) - first_child);
      const Matrix& T = gen[static_cast<std::size_t>(i)];
      if (i == 0) {
        next.emplace_back(H.tree.range(0).size(), 0);
        continue;
      }
      next.push_back(blkdiag(cur[a], cur[a + 1]) * T);
    }
    cur = std::move(next);
  }
  return cur;
}

inline Matrix hss_to_dense(const HssMatrix& H) {
  const ClusterTree& tr = H.tree;
  Matrix A = Matrix::Zero(tr.size(), tr.size());
  for (Eigen::Index i : tr.leaves()) {
    const Range r = tr.range(i);
    A.block(r.lo, r.lo, r.size(), r.size()) = H.D[static_cast<std::size_t>(i)];
  }
  for (int l = tr.depth(); l >= 1; --l) {
    const auto Ub = big_bases(H, l, false);
    const auto Vb = H.symmetric ? Ub : big_bases(H, l, true);
    const Eigen::Index first = ClusterTree::level_begin(l);
    for (Eigen::Index p : tr.nodes_at_depth(l - 1)) {
      const Eigen::Index a = ClusterTree::left(p), b = ClusterTree::right(p);
      const auto ia = static_cast<std::size_t>(a - first), ib = static_cast<std::size_t>(b - first);
      const Range ra = tr.range(a), rb = tr.range(b);
      A.block(ra.lo, rb.lo, ra.size(), rb.size()) = Ub[ia] * H.B12[static_cast<std::size_t>(p)] * Vb[ib].transpose();
      A.block(rb.lo, ra.lo, rb.size(), ra.size()) = Ub[ib] * H.B21[static_cast<std::size_t>(p)] * Vb[ia].transpose();
    }
  }
  return A;
}

/// Y = H X in O(n r cols(X)) operations.
inline Matrix hss_matvec(const HssMatrix& H, const Matrix& X) {
  const ClusterTree& tr = H.tree;
  if (X.rows() != tr.size())
    throw shape_error("hss_matvec: H is " + std::to_string(tr.size()) + "x" + std::to_string(tr.size()) +
                      " but X has " + std::to_string(X.rows()) + " rows");
  const Eigen::Index m = X.cols();
  const auto N = static_cast<std::size_t>(tr.node_count());
  std::vector<Matrix> xh(N), yh(N);
  const auto at = [](const std::vector<Matrix>& v, Eigen::Index i) -> const Matrix& {
    return v[static_cast<std::size_t>(i)];
  };
  Matrix Y(tr.size(), m);
  if (tr.depth() == 0) return H.D[0] * X;
  for (int l = tr.depth(); l >= 1; --l)
    for (Eigen::Index i : tr.nodes_at_depth(l)) {
      const auto s = static_cast<std::size_t>(i);
      if (l == tr.depth()) {
        const Range r = tr.range(i);
        xh[s] = H.V[s].transpose() * X.middleRows(r.lo, r.size());
      } else {
        Matrix stacked(at(xh, ClusterTree::left(i)).rows() + at(xh, ClusterTree::right(i)).rows(), m);
        stacked << at(xh, ClusterTree::left(i)), at(xh, ClusterTree::right(i));
        xh[s] = H.V[s].transpose() * stacked;
      }
    }
  for (int l = 0; l < tr.depth(); ++l)
    for (Eigen::Index p : tr.nodes_at_depth(l)) {
      const Eigen::Index a = ClusterTree::left(p), b = ClusterTree::right(p);
      const auto sa = static_cast<std::size_t>(a), sb = static_cast<std::size_t>(b);
      const auto sp = static_cast<std::size_t>(p);
      yh[sa] = H.B12[sp] * xh[sb];
      yh[sb] = H.B21[sp] * xh[sa];
      if (p != 0) {
        const Matrix down = H.U[sp] * yh[sp];
        yh[sa] += down.topRows(H.rank(a));
        yh[sb] += down.bottomRows(H.rank(b));
      }
    }
  for (Eigen::Index i : tr.leaves()) {
    const Range r = tr.range(i);
    const auto s = static_cast<std::size_t>(i);
    Y.middleRows(r.lo, r.size()) = H.D[s] * X.middleRows(r.lo, r.size()) + H.U[s] * yh[s];
  }
  return Y;
}

inline double hss_norm_estimate(const HssMatrix& H) {
  return power_norm_estimate(
      H.size(), [&](const Matrix& X) { return hss_matvec(H, X); },
      [&](const Matrix& X) {
        if (H.symmetric) return hss_matvec(H, X);
        HssMatrix T = H;
        std::swap(T.U, T.V);
        std::swap(T.B12, T.B21);
        for (auto& M : T.B12) M.transposeInPlace();
        for (auto& M : T.B21) M.transposeInPlace();
        for (auto& M : T.D) M.transposeInPlace();
        return hss_matvec(T, X);
      });
}

inline Eigen::Index numerical_rank(const Matrix& M, double cutoff) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(M);
  const Vector& s = svd.singularValues();
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cutoff) ++r;
  return r;
}

namespace detail {

/// U * diag(s) from a thin SVD of F: same Gram matrix F F^T with at most rows(F) columns.
inline Matrix compress_factor(const Matrix& F) {
  if (F.rows() == 0 || F.cols() == 0) return Matrix(F.rows(), 0);
  Eigen::BDCSVD<Matrix> svd(F, Eigen::ComputeThinU);
  return svd.matrixU() * svd.singularValues().asDiagonal();
}

}  // namespace detail

/// Maximum numerical rank, with cutoff tol * ||H||_2, of the HSS block rows
/// A(I_tau, complement of I_tau) and block columns over all non-root nodes.
/// Since big bases are orthonormal, the block row of tau equals Ubig_tau F_tau
/// with F_tau = [B_tau,sigma, (rows of U_parent belonging to tau) F_parent],
/// so the ranks are read off small factors computed top-down.
inline Eigen::Index hss_rank(const HssMatrix& H, double tol) {
  const ClusterTree& tr = H.tree;
  if (tr.depth() == 0) return 0;
  const double cutoff = tol * hss_norm_estimate(H);
  Eigen::Index best = 0;
  for (int side = 0; side < (H.symmetric ? 1 : 2); ++side) {
    const auto& basis = side == 0 ? H.U : H.V;
    std::vector<Matrix> F(static_cast<std::size_t>(tr.node_count()));
    for (int l = 1; l <= tr.depth(); ++l)
      for (Eigen::Index i : tr.nodes_at_depth(l)) {
        const Eigen::Index p = ClusterTree::parent(i);
        const auto sp = static_cast<std::size_t>(p);
        const bool left = ClusterTree::is_left(i);
        Matrix B;
        if (side == 0) B = left ? H.B12[sp] : H.B21[sp];
        else B = left ? Matrix(H.B21[sp].transpose()) : Matrix(H.B12[sp].transpose());
        Matrix inherited(B.rows(), 0);
        if (p != 0) {
          const Eigen::Index ra = side == 0 ? H.rank(ClusterTree::left(p)) : H.col_rank(ClusterTree::left(p));
          const Matrix& T = basis[sp];
          const Matrix rows = left ? Matrix(T.topRows(ra)) : Matrix(T.bottomRows(T.rows() - ra));
          inherited = rows * F[sp];
        }
        Matrix stacked(B.rows(), B.cols() + inherited.cols());
        stacked << B, inherited;
        F[static_cast<std::size_t>(i)] = detail::compress_factor(stacked);
        const Matrix& Fi = F[static_cast<std::size_t>(i)];
        Eigen::Index r = 0;
        for (Eigen::Index c = 0; c < Fi.cols(); ++c)
          if (Fi.col(c).norm() > cutoff) ++r;
        best = std::max(best, r);
      }
  }
  return best;
}

namespace detail {

/// Left singular vectors of M whose singular values exceed `cutoff`.
inline Matrix truncated_left_basis(const Matrix& M, double cutoff) {
  if (M.rows() == 0) return Matrix(0, 0);
  if (M.cols() == 0) return Matrix(M.rows(), 0);
  Matrix Uf;
  Vector s;
  if (M.cols() > M.rows()) {
    // M^T = Q R, so M = R^T Q^T and the left singular vectors of M are those of R^T.
    Eigen::HouseholderQR<Matrix> qr(M.transpose());
    const Matrix R = qr.matrixQR().topRows(M.rows()).triangularView<Eigen::Upper>();
    Eigen::BDCSVD<Matrix> svd(R.transpose(), Eigen::ComputeThinU);
    Uf = svd.matrixU();
    s = svd.singularValues();
  } else {
    Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU);
    Uf = svd.matrixU();
    s = svd.singularValues();
  }
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cutoff) ++r;
  return Uf.leftCols(r);
}

/// Block row of a node restricted to (sorted) column indices outside its range,
/// expressed in the node's compressed row coordinates.
struct CompressedRows {
  std::vector<Eigen::Index> cols;
  Matrix R;
};

inline Matrix gather_columns(const CompressedRows& child, const std::vector<Eigen::Index>& cols) {
  Matrix out = Matrix::Zero(child.R.rows(), static_cast<Eigen::Index>(cols.size()));
  std::size_t k = 0;
  for (std::size_t c = 0; c < child.cols.size(); ++c) {
    while (k < cols.size() && cols[k] < child.cols[c]) ++k;
    if (k < cols.size() && cols[k] == child.cols[c])
      out.col(static_cast<Eigen::Index>(k)) = child.R.col(static_cast<Eigen::Index>(c));
  }
  return out;
}

/// Coupling Ubig_a^T A(I_a, I_b) Vbig_b from a's compressed rows.
inline Matrix coupling(const CompressedRows& rows_a, const Range& rb, const Matrix& Vbig_b) {
  Matrix out = Matrix::Zero(rows_a.R.rows(), Vbig_b.cols());
  auto first = std::lower_bound(rows_a.cols.begin(), rows_a.cols.end(), rb.lo);
  for (auto it = first; it != rows_a.cols.end() && *it < rb.hi; ++it) {
    const auto c = static_cast<Eigen::Index>(it - rows_a.cols.begin());
    out.noalias() += rows_a.R.col(c) * Vbig_b.row(*it - rb.lo);
  }
  return out;
}

/// One bottom-up sweep computing bases from block rows.  At every depth the
/// callback receives the compressed rows and big bases of that level.
template <MatrixSource S, class LevelHook>
void row_sweep(const S& src, const ClusterTree& tr, double cutoff, std::vector<Matrix>& bases, LevelHook&& hook) {
  const int L = tr.depth();
  std::vector<CompressedRows> rows;
  std::vector<Matrix> big;
  for (int l = L; l >= 1; --l) {
    const auto nodes = tr.nodes_at_depth(l);
    std::vector<CompressedRows> next(nodes.size());
    std::vector<Matrix> next_big(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const Eigen::Index i = nodes[k];
      const Range r = tr.range(i);
      Matrix M;
      if (l == L) {
        next[k].cols = src.row_support(r.lo, r.hi);
        M = src.row_block(r.lo, r.hi, next[k].cols);
      } else {
        const CompressedRows& a = rows[2 * k];
        const CompressedRows& b = rows[2 * k + 1];
        std::vector<Eigen::Index> cols;
        std::set_union(a.cols.begin(), a.cols.end(), b.cols.begin(), b.cols.end(), std::back_inserter(cols));
        cols.erase(std::remove_if(cols.begin(), cols.end(), [&](Eigen::Index c) { return r.contains(c); }),
                   cols.end());
        next[k].cols = std::move(cols);
        M.resize(a.R.rows() + b.R.rows(), static_cast<Eigen::Index>(next[k].cols.size()));
        M << gather_columns(a, next[k].cols), gather_columns(b, next[k].cols);
      }
      Matrix Ut = truncated_left_basis(M, cutoff);
      next[k].R = Ut.transpose() * M;
      next_big[k] = l == L ? Ut : Matrix(blkdiag(big[2 * k], big[2 * k + 1]) * Ut);
      bases[static_cast<std::size_t>(i)] = std::move(Ut);
    }
    rows = std::move(next);
    big = std::move(next_big);
    hook(l, rows, big);
  }
}

}  // namespace detail

/// Bottom-up HSS construction.  Singular values of the HSS block rows (and
/// columns) below tol * ||A||_2 are truncated; ||A||_2 is a power-iteration
/// estimate.
template <MatrixSource S>
HssMatrix compress(const S& src, const ClusterTree& tree, double tol, bool symmetric) {
  if (src.size() != tree.size())
    throw shape_error("compress: matrix has " + std::to_string(src.size()) + " rows but the tree covers " +
                      std::to_string(tree.size()));
  if (!(tol > 0.0)) throw contract_error("compress: tol must be positive");
  if (symmetric && !src.symmetric()) throw contract_error("compress: symmetric flag set on a nonsymmetric matrix");

  HssMatrix H(tree);
  H.symmetric = symmetric;
  for (Eigen::Index i : tree.leaves()) {
    const Range r = tree.range(i);
    Matrix Dl = src.diag_block(r.lo, r.hi);
    H.D[static_cast<std::size_t>(i)] = symmetric ? symmetrize(Dl) : Dl;
  }
  if (tree.depth() == 0) return H;

  const double cutoff = tol * source_norm_estimate(src);
  const int L = tree.depth();

  if (symmetric) {
    detail::row_sweep(src, tree, cutoff, H.U,
                      [&](int l, const std::vector<detail::CompressedRows>& rows, const std::vector<Matrix>& big) {
                        const Eigen::Index first = ClusterTree::level_begin(l);
                        for (Eigen::Index p : tree.nodes_at_depth(l - 1)) {
                          const auto k = static_cast<std::size_t>(ClusterTree::left(p) - first);
                          const Matrix B = detail::coupling(rows[k], tree.range(ClusterTree::right(p)), big[k + 1]);
                          H.B12[static_cast<std::size_t>(p)] = B;
                          H.B21[static_cast<std::size_t>(p)] = B.transpose();
                        }
                      });
    H.V = H.U;
    return H;
  }

  // Column bases come from the rows of A^T; the couplings need the row pass's
  // compressed rows together with the column pass's big bases at the same depth.
  std::vector<std::vector<detail::CompressedRows>> row_levels(static_cast<std::size_t>(L + 1));
  detail::row_sweep(src, tree, cutoff, H.U,
                    [&](int l, const std::vector<detail::CompressedRows>& rows, const std::vector<Matrix>&) {
                      row_levels[static_cast<std::size_t>(l)] = rows;
                    });
  const auto At = src.transposed();
  detail::row_sweep(At, tree, cutoff, H.V,
                    [&](int l, const std::vector<detail::CompressedRows>&, const std::vector<Matrix>& vbig) {
                      const auto& rows = row_levels[static_cast<std::size_t>(l)];
                      const Eigen::Index first = ClusterTree::level_begin(l);
                      for (Eigen::Index p : tree.nodes_at_depth(l - 1)) {
                        const Eigen::Index a = ClusterTree::left(p), b = ClusterTree::right(p);
                        const auto k = static_cast<std::size_t>(a - first);
                        H.B12[static_cast<std::size_t>(p)] = detail::coupling(rows[k], tree.range(b), vbig[k + 1]);
                        H.B21[static_cast<std::size_t>(p)] = detail::coupling(rows[k + 1], tree.range(a), vbig[k]);
                      }
                      row_levels[static_cast<std::size_t>(l)].clear();
                    });
  return H;
}

inline HssMatrix compress_dense(const Matrix& A, const ClusterTree& tree, double tol, bool symmetric) {
  if (A.rows() != A.cols())
    throw shape_error("compress_dense: matrix is " + std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
  return compress(DenseSource(A), tree, tol, symmetric);
}

inline HssMatrix compress_sparse(const SparseMatrix& A, const ClusterTree& tree, double tol, bool symmetric) {
  if (A.rows() != A.cols())
    throw shape_error("compress_sparse: matrix is " + std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
  return compress(SparseSource(A), tree, tol, symmetric);
}

}  // namespace hssfun
