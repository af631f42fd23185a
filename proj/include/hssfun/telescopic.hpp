#pragma once

// Telescopic decompositions {U_tau, V_tau, D_tau}.
//
// The matrix is generated level by level:
//   A^(0) = D_root,   A^(l) = blkdiag(D at depth l) + blkdiag(U at depth l) A^(l-1) blkdiag(V at depth l)^T,
// and A = A^(L).  Leaf generators have |tau| rows; a non-leaf U_tau has
// cols(U_alpha) + cols(U_beta) rows and D_tau is square in those dimensions.
// The root stores no U, V.

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cluster_tree.hpp"
#include "dense.hpp"
#include "errors.hpp"
#include "hss.hpp"

namespace hssfun {

struct TelescopicDecomposition {
  ClusterTree tree;
  std::vector<Matrix> U, V, D;  // per node in heap order
  bool symmetric = false;
  bool standard = false;

  TelescopicDecomposition() = default;
  explicit TelescopicDecomposition(ClusterTree t) : tree(std::move(t)) {
    const auto m = static_cast<std::size_t>(tree.node_count());
    U.assign(m, Matrix(0, 0));
    V.assign(m, Matrix(0, 0));
    D.assign(m, Matrix(0, 0));
  }

  const Matrix& u(Eigen::Index i) const { return U[static_cast<std::size_t>(i)]; }
  const Matrix& v(Eigen::Index i) const { return symmetric ? U[static_cast<std::size_t>(i)] : V[static_cast<std::size_t>(i)]; }
  const Matrix& d(Eigen::Index i) const { return D[static_cast<std::size_t>(i)]; }

  Eigen::Index size() const { return tree.size(); }

  /// Largest number of basis columns over all non-root nodes.
  Eigen::Index rank() const {
    Eigen::Index r = 0;
    for (Eigen::Index i = 1; i < tree.node_count(); ++i) r = std::max({r, u(i).cols(), v(i).cols()});
    return r;
  }

  void validate() const {
    auto fail = [](Eigen::Index node, const std::string& what) {
      throw shape_error("telescopic node " + ClusterTree::id_of(node).str() + ": " + what);
    };
    for (Eigen::Index i = 0; i < tree.node_count(); ++i) {
      Eigen::Index rows, cols;
      if (tree.is_leaf(i)) {
        rows = cols = tree.range(i).size();
      } else {
        rows = u(ClusterTree::left(i)).cols() + u(ClusterTree::right(i)).cols();
        cols = v(ClusterTree::left(i)).cols() + v(ClusterTree::right(i)).cols();
      }
      if (d(i).rows() != rows || d(i).cols() != cols) fail(i, "D has the wrong shape");
      if (i != 0 && (u(i).rows() != rows || v(i).rows() != cols)) fail(i, "U or V has the wrong row count");
      if (i != 0 && u(i).cols() != v(i).cols()) fail(i, "U and V have different column counts");
    }
  }
};

namespace detail {

/// Row offsets of each depth-l node inside the level matrix A^(l).
inline std::vector<Eigen::Index> level_offsets(const TelescopicDecomposition& T, int l, bool cols = false) {
  std::vector<Eigen::Index> off{0};
  for (Eigen::Index i : T.tree.nodes_at_depth(l)) off.push_back(off.back() + (cols ? T.d(i).cols() : T.d(i).rows()));
  return off;
}

}  // namespace detail

/// Dense reconstruction, level by level from the root.
inline Matrix to_dense(const TelescopicDecomposition& T) {
  Matrix A = T.d(0);
  for (int l = 1; l <= T.tree.depth(); ++l) {
    const auto nodes = T.tree.nodes_at_depth(l);
    const auto ro = detail::level_offsets(T, l), co = detail::level_offsets(T, l, true);
    Matrix next = Matrix::Zero(ro.back(), co.back());
    // Column offsets of the previous level's blocks follow the U/V column counts.
    std::vector<Eigen::Index> pr{0}, pc{0};
    for (Eigen::Index i : nodes) {
      pr.push_back(pr.back() + T.u(i).cols());
      pc.push_back(pc.back() + T.v(i).cols());
    }
    for (std::size_t a = 0; a < nodes.size(); ++a) {
      const Matrix UA = T.u(nodes[a]) * A.middleRows(pr[a], pr[a + 1] - pr[a]);
      for (std::size_t b = 0; b < nodes.size(); ++b)
        next.block(ro[a], co[b], ro[a + 1] - ro[a], co[b + 1] - co[b]).noalias() =
            UA.middleCols(pc[b], pc[b + 1] - pc[b]) * T.v(nodes[b]).transpose();
      next.block(ro[a], co[a], ro[a + 1] - ro[a], co[a + 1] - co[a]) += T.d(nodes[a]);
    }
    A = std::move(next);
  }
  return A;
}

/// Y = A X without forming A: restrict X through the V's, apply D_root, then
/// prolong through the U's adding each level's D^(l) contribution.
inline Matrix telescopic_matvec(const TelescopicDecomposition& T, const Matrix& X) {
  const int L = T.tree.depth();
  if (X.rows() != T.size())
    throw shape_error("telescopic_matvec: X has " + std::to_string(X.rows()) + " rows, expected " +
                      std::to_string(T.size()));
  std::vector<Matrix> xs(static_cast<std::size_t>(L + 1));
  xs[static_cast<std::size_t>(L)] = X;
  for (int l = L; l >= 1; --l) {
    const auto nodes = T.tree.nodes_at_depth(l);
    const auto co = detail::level_offsets(T, l, true);
    Eigen::Index total = 0;
    for (Eigen::Index i : nodes) total += T.v(i).cols();
    Matrix coarse(total, X.cols());
    Eigen::Index at = 0;
    for (std::size_t a = 0; a < nodes.size(); ++a) {
      const Matrix& Vi = T.v(nodes[a]);
      coarse.middleRows(at, Vi.cols()).noalias() =
          Vi.transpose() * xs[static_cast<std::size_t>(l)].middleRows(co[a], co[a + 1] - co[a]);
      at += Vi.cols();
    }
    xs[static_cast<std::size_t>(l - 1)] = std::move(coarse);
  }
  Matrix y = T.d(0) * xs[0];
  for (int l = 1; l <= L; ++l) {
    const auto nodes = T.tree.nodes_at_depth(l);
    const auto ro = detail::level_offsets(T, l), co = detail::level_offsets(T, l, true);
    Matrix fine(ro.back(), X.cols());
    Eigen::Index at = 0;
    const Matrix& x = xs[static_cast<std::size_t>(l)];
    for (std::size_t a = 0; a < nodes.size(); ++a) {
      const Matrix& Ui = T.u(nodes[a]);
      fine.middleRows(ro[a], ro[a + 1] - ro[a]).noalias() = Ui * y.middleRows(at, Ui.cols());
      fine.middleRows(ro[a], ro[a + 1] - ro[a]).noalias() += T.d(nodes[a]) * x.middleRows(co[a], co[a + 1] - co[a]);
      at += Ui.cols();
    }
    y = std::move(fine);
  }
  return y;
}

/// Telescopic form of an HSS matrix: bases reused, D = [[0, B12], [B21, 0]] at non-leaves.
inline TelescopicDecomposition from_hss(const HssMatrix& H) {
  TelescopicDecomposition T(H.tree);
  T.symmetric = H.symmetric;
  T.standard = true;
  for (Eigen::Index i = 0; i < H.tree.node_count(); ++i) {
    const auto s = static_cast<std::size_t>(i);
    if (i != 0) {
      T.U[s] = H.U[s];
      T.V[s] = H.symmetric ? Matrix(0, 0) : H.V[s];
    }
    if (H.tree.is_leaf(i)) {
      T.D[s] = H.D[s];
    } else {
      const Eigen::Index ra = H.rank(ClusterTree::left(i)), rb = H.rank(ClusterTree::right(i));
      const Eigen::Index ca = H.col_rank(ClusterTree::left(i)), cb = H.col_rank(ClusterTree::right(i));
      Matrix Dt = Matrix::Zero(ra + rb, ca + cb);
      Dt.block(0, ca, ra, cb) = H.B12[s];
      Dt.block(ra, 0, rb, ca) = H.B21[s];
      T.D[s] = std::move(Dt);
    }
  }
  return T;
}

namespace detail {

/// Principal blocks for all nodes: Ahat_root = D_root and, top-down,
/// Ahat_child = D_child + U_child [Ahat_parent]_(child block) V_child^T.
inline std::vector<Matrix> all_principal_blocks(const TelescopicDecomposition& T, const std::vector<Matrix>& D) {
  std::vector<Matrix> Ah(static_cast<std::size_t>(T.tree.node_count()));
  Ah[0] = D[0];
  for (Eigen::Index p = 0; p < ClusterTree::level_begin(T.tree.depth()); ++p) {
    const Eigen::Index a = ClusterTree::left(p), b = ClusterTree::right(p);
    const Matrix& P = Ah[static_cast<std::size_t>(p)];
    const Eigen::Index ra = T.u(a).cols(), ca = T.v(a).cols();
    Ah[static_cast<std::size_t>(a)] = D[static_cast<std::size_t>(a)] + T.u(a) * P.topLeftCorner(ra, ca) * T.v(a).transpose();
    Ah[static_cast<std::size_t>(b)] =
        D[static_cast<std::size_t>(b)] + T.u(b) * P.bottomRightCorner(P.rows() - ra, P.cols() - ca) * T.v(b).transpose();
  }
  return Ah;
}

}  // namespace detail

/// The diagonal blocks A(I_alpha, I_alpha) for every leaf alpha.
inline std::map<Eigen::Index, Matrix> principal_submatrices(const TelescopicDecomposition& T) {
  const auto Ah = detail::all_principal_blocks(T, T.D);
  std::map<Eigen::Index, Matrix> out;
  for (Eigen::Index i : T.tree.leaves()) out.emplace(i, Ah[static_cast<std::size_t>(i)]);
  return out;
}

/// Standard decomposition {U, V, C} generating the same matrix.
/// Leaves get C = A(I_alpha, I_alpha); going up, the parent absorbs
/// blkdiag(U_alpha^T (Dhat_alpha - C_alpha) V_alpha, ...) and C at depth l is the
/// principal block of the corrected level-l decomposition.  Bases are unchanged
/// and ranks are not truncated.
inline TelescopicDecomposition to_standard(const TelescopicDecomposition& T) {
  TelescopicDecomposition S = T;
  S.standard = true;
  const int L = T.tree.depth();
  // Ahat from the original D stays valid for every depth below the one being
  // corrected, since corrections only touch depths >= l.
  const auto Ah = detail::all_principal_blocks(T, T.D);
  std::vector<Matrix> Dhat = T.D;
  std::vector<Matrix>& C = S.D;
  for (Eigen::Index i : T.tree.leaves()) C[static_cast<std::size_t>(i)] = Ah[static_cast<std::size_t>(i)];
  for (int l = L - 1; l >= 0; --l) {
    for (Eigen::Index t : T.tree.nodes_at_depth(l)) {
      const Eigen::Index a = ClusterTree::left(t), b = ClusterTree::right(t);
      const auto sa = static_cast<std::size_t>(a), sb = static_cast<std::size_t>(b), st = static_cast<std::size_t>(t);
      const Matrix Ea = T.u(a).transpose() * (Dhat[sa] - C[sa]) * T.v(a);
      const Matrix Eb = T.u(b).transpose() * (Dhat[sb] - C[sb]) * T.v(b);
      Dhat[st].topLeftCorner(Ea.rows(), Ea.cols()) += Ea;
      Dhat[st].bottomRightCorner(Eb.rows(), Eb.cols()) += Eb;
      if (t == 0) {
        C[st] = Dhat[st];
      } else {
        const Eigen::Index p = ClusterTree::parent(t);
        const Matrix& P = Ah[static_cast<std::size_t>(p)];
        const Eigen::Index ra = T.u(ClusterTree::left(p)).cols(), ca = T.v(ClusterTree::left(p)).cols();
        const Matrix blk = ClusterTree::is_left(t) ? Matrix(P.topLeftCorner(ra, ca))
                                                   : Matrix(P.bottomRightCorner(P.rows() - ra, P.cols() - ca));
        C[st] = Dhat[st] + T.u(t) * blk * T.v(t).transpose();
      }
      if (S.symmetric) C[st] = symmetrize(C[st]);
    }
  }
  if (S.symmetric)
    for (Eigen::Index i : T.tree.leaves()) C[static_cast<std::size_t>(i)] = symmetrize(C[static_cast<std::size_t>(i)]);
  return S;
}

struct ToHssReport {
  bool standardized = false;   // input was not flagged standard and was converted first
  double max_residue = 0.0;    // largest discarded diagonal-block norm relative to max_tau ||D_tau||_F
};

/// Reads the HSS generators off a standard decomposition.  Non-leaf
/// D_tau must have (numerically) zero diagonal blocks, measured against the
/// largest D in the decomposition: a node whose coupling is itself tiny (exp of
/// a wide negative spectrum) only carries rounding residue.
inline HssMatrix to_hss(const TelescopicDecomposition& Tin, ToHssReport* report = nullptr) {
  ToHssReport rep;
  const TelescopicDecomposition* T = &Tin;
  TelescopicDecomposition standardized;
  if (!Tin.standard) {
    standardized = to_standard(Tin);
    T = &standardized;
    rep.standardized = true;
  }
  HssMatrix H(T->tree);
  H.symmetric = T->symmetric;
  double scale = 0.0;
  for (Eigen::Index i = 0; i < T->tree.node_count(); ++i) scale = std::max(scale, T->d(i).norm());
  for (Eigen::Index i = 0; i < T->tree.node_count(); ++i) {
    const auto s = static_cast<std::size_t>(i);
    if (i != 0) {
      H.U[s] = T->u(i);
      H.V[s] = T->v(i);
    }
    if (T->tree.is_leaf(i)) {
      H.D[s] = T->d(i);
      continue;
    }
    const Matrix& Dt = T->d(i);
    const Eigen::Index ra = T->u(ClusterTree::left(i)).cols(), ca = T->v(ClusterTree::left(i)).cols();
    const double r1 = Dt.topLeftCorner(ra, ca).norm();
    const double r2 = Dt.bottomRightCorner(Dt.rows() - ra, Dt.cols() - ca).norm();
    const double residue = std::max(r1, r2);
    if (residue > 1e-10 * scale)
      throw consistency_error("to_hss: node " + ClusterTree::id_of(i).str() +
                              " has non-negligible diagonal blocks (relative residue " +
                              format_double(residue / scale) + "); decomposition is not standard");
    if (scale > 0.0) rep.max_residue = std::max(rep.max_residue, residue / scale);
    H.B12[s] = Dt.topRightCorner(ra, Dt.cols() - ca);
    H.B21[s] = Dt.bottomLeftCorner(Dt.rows() - ra, ca);
  }
  if (report) *report = rep;
  return H;
}

}  // namespace hssfun
