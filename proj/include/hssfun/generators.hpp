#pragma once

// Test-matrix generators: the scaled 1-D Laplacian, the symmetrized
// Grunwald-Letnikov fractional operator, tridiagonal matrices with a
// prescribed spectrum, a banded SPD substitute for GMRF precision matrices,
// and random HSS matrices with orthonormal generators.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cluster_tree.hpp"
#include "dense.hpp"
#include "errors.hpp"
#include "hss.hpp"
#include "matrix_source.hpp"
#include "telescopic.hpp"

namespace hssfun {

using Rng = std::mt19937_64;

/// (1/h^2) tridiag(-1, 2, -1) with h = 1/(n+1).
inline SparseMatrix laplacian_sparse(Eigen::Index n) {
  if (n < 2) throw contract_error("gen_laplacian: n must be at least 2");
  const double h = 1.0 / static_cast<double>(n + 1);
  const double s = 1.0 / (h * h);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(3 * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    trip.emplace_back(i, i, 2.0 * s);
    if (i + 1 < n) {
      trip.emplace_back(i, i + 1, -s);
      trip.emplace_back(i + 1, i, -s);
    }
  }
  SparseMatrix A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

inline Matrix gen_laplacian(Eigen::Index n) { return Matrix(laplacian_sparse(n)); }

/// Exact extreme eigenvalues of gen_laplacian(n).
inline std::pair<double, double> laplacian_spectrum_bounds(Eigen::Index n) {
  const double h = 1.0 / static_cast<double>(n + 1);
  const double pi = std::acos(-1.0);
  const double lo = 4.0 / (h * h) * std::pow(std::sin(pi * h / 2.0), 2);
  const double hi = 4.0 / (h * h) * std::pow(std::sin(pi * static_cast<double>(n) * h / 2.0), 2);
  return {lo, hi};
}

/// Grunwald-Letnikov weights g_0 = 1, g_j = g_{j-1} (j - 1 - alpha) / j.
inline std::vector<double> gl_weights(double alpha, Eigen::Index count) {
  std::vector<double> g(static_cast<std::size_t>(count));
  if (count > 0) g[0] = 1.0;
  for (Eigen::Index j = 1; j < count; ++j)
    g[static_cast<std::size_t>(j)] = g[static_cast<std::size_t>(j - 1)] * (static_cast<double>(j) - 1.0 - alpha) /
                                     static_cast<double>(j);
  return g;
}

/// -(T + T^T)/2 for the shifted lower Toeplitz GL matrix T_ij = g_{i-j+1}.
inline Matrix gen_gl_fractional(Eigen::Index n, double alpha) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw contract_error("gen_gl_fractional: alpha must lie in (1, 2)");
  if (n < 1) throw contract_error("gen_gl_fractional: n must be positive");
  const auto g = gl_weights(alpha, n + 1);
  Matrix T = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= std::min(i + 1, n - 1); ++j) T(i, j) = g[static_cast<std::size_t>(i - j + 1)];
  return -0.5 * (T + T.transpose());
}

/// Symmetric tridiagonal matrix with the given spectrum: Lanczos on
/// diag(eigs) from the normalized all-ones vector, fully reorthogonalized.
/// A (numerical) breakdown restarts from a seeded random vector orthogonal
/// to the current basis, which splits T into decoupled blocks.
inline SparseMatrix tridiag_spectrum_sparse(const std::vector<double>& eigs, std::uint64_t seed = 0) {
  const auto n = static_cast<Eigen::Index>(eigs.size());
  if (n == 0) throw contract_error("gen_tridiag_spectrum: empty spectrum");
  Vector lam(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lam(i) = eigs[static_cast<std::size_t>(i)];
    if (!std::isfinite(lam(i))) throw contract_error("gen_tridiag_spectrum: non-finite eigenvalue");
  }
  const double scale = std::max(lam.cwiseAbs().maxCoeff(), 1e-300);
  Rng rng(seed);
  std::normal_distribution<double> gauss;
  Matrix Q(n, n);
  Vector alpha(n), beta = Vector::Zero(n);
  Vector q = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    Q.col(j) = q;
    Vector w = lam.cwiseProduct(q);
    alpha(j) = q.dot(w);
    if (j + 1 == n) break;
    for (int pass = 0; pass < 2; ++pass) w -= Q.leftCols(j + 1) * (Q.leftCols(j + 1).transpose() * w);
    double b = w.norm();
    if (b <= 1e-12 * scale) {
      b = 0.0;
      for (int attempt = 0; attempt < 8; ++attempt) {
        for (Eigen::Index i = 0; i < n; ++i) w(i) = gauss(rng);
        for (int pass = 0; pass < 2; ++pass) w -= Q.leftCols(j + 1) * (Q.leftCols(j + 1).transpose() * w);
        if (w.norm() > 1e-8) break;
      }
      q = w.normalized();
    } else {
      q = w / b;
    }
    beta(j) = b;
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index i = 0; i < n; ++i) {
    trip.emplace_back(i, i, alpha(i));
    if (i + 1 < n && beta(i) != 0.0) {
      trip.emplace_back(i, i + 1, beta(i));
      trip.emplace_back(i + 1, i, beta(i));
    }
  }
  SparseMatrix T(n, n);
  T.setFromTriplets(trip.begin(), trip.end());
  return T;
}

inline Matrix gen_tridiag_spectrum(const std::vector<double>& eigs, std::uint64_t seed = 0) {
  return Matrix(tridiag_spectrum_sparse(eigs, seed));
}

/// n points uniformly spaced on [lo, hi].
inline std::vector<double> uniform_spectrum(Eigen::Index n, double lo, double hi) {
  std::vector<double> e(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    e[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return e;
}

/// n/2 logarithmically spaced points in [10^a, 1] and their negatives.
inline std::vector<double> logsym_spectrum(Eigen::Index n, double a) {
  const Eigen::Index half = n / 2;
  std::vector<double> e;
  e.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < half; ++i) {
    const double t = half == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(half - 1);
    e.push_back(std::pow(10.0, a * (1.0 - t)));
  }
  const std::size_t m = e.size();
  for (std::size_t i = 0; i < m; ++i) e.push_back(-e[i]);
  if (static_cast<Eigen::Index>(e.size()) < n) e.push_back(1.0);
  return e;
}

/// Seeded banded SPD matrix (bandwidth 8), strictly diagonally dominant.
inline SparseMatrix gmrf_like_sparse(Eigen::Index n, std::uint64_t seed = 0, Eigen::Index bandwidth = 8) {
  if (n < 1) throw contract_error("gmrf_like: n must be positive");
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<Eigen::Triplet<double>> trip;
  Vector rowsum = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index d = 1; d <= bandwidth && i + d < n; ++d) {
      const double v = -u(rng) / static_cast<double>(d);
      trip.emplace_back(i, i + d, v);
      trip.emplace_back(i + d, i, v);
      rowsum(i) += std::abs(v);
      rowsum(i + d) += std::abs(v);
    }
  for (Eigen::Index i = 0; i < n; ++i) trip.emplace_back(i, i, rowsum(i) + 0.1);
  SparseMatrix A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

inline Matrix random_orthonormal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> g;
  Matrix M(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = g(rng);
  if (cols == 0 || rows == 0) return M;
  Eigen::HouseholderQR<Matrix> qr(M);
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> g;
  Matrix M(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = g(rng);
  return M;
}

inline Matrix random_symmetric(Eigen::Index n, Rng& rng) {
  const Matrix M = random_matrix(n, n, rng);
  return 0.5 * (M + M.transpose());
}

/// Random HSS matrix with orthonormal generators and ranks at most `rank`
/// (limited by the available rows).  The symmetric variant has V = U,
/// symmetric leaf blocks and B21 = B12^T.
inline HssMatrix random_hss(const ClusterTree& tree, Eigen::Index rank, Rng& rng, bool symmetric = true) {
  HssMatrix H(tree);
  H.symmetric = symmetric;
  const int L = tree.depth();
  for (int l = L; l >= 1; --l)
    for (Eigen::Index i : tree.nodes_at_depth(l)) {
      const auto s = static_cast<std::size_t>(i);
      const Eigen::Index rows_u = l == L ? tree.range(i).size() : H.rank(ClusterTree::left(i)) + H.rank(ClusterTree::right(i));
      const Eigen::Index rows_v =
          l == L ? tree.range(i).size() : H.col_rank(ClusterTree::left(i)) + H.col_rank(ClusterTree::right(i));
      H.U[s] = random_orthonormal(rows_u, std::min(rank, rows_u), rng);
      H.V[s] = symmetric ? H.U[s] : random_orthonormal(rows_v, std::min(rank, rows_v), rng);
    }
  for (Eigen::Index i : tree.leaves()) {
    const Eigen::Index m = tree.range(i).size();
    H.D[static_cast<std::size_t>(i)] = symmetric ? random_symmetric(m, rng) : random_matrix(m, m, rng);
  }
  for (Eigen::Index p = 0; p < ClusterTree::level_begin(L); ++p) {
    const Eigen::Index a = ClusterTree::left(p), b = ClusterTree::right(p);
    const auto s = static_cast<std::size_t>(p);
    H.B12[s] = random_matrix(H.rank(a), H.col_rank(b), rng);
    H.B21[s] = symmetric ? Matrix(H.B12[s].transpose()) : random_matrix(H.rank(b), H.col_rank(a), rng);
  }
  return H;
}

/// Adds c * I to an HSS matrix (leaf diagonal blocks only).
inline void shift_diagonal(HssMatrix& H, double c) {
  for (Eigen::Index i : H.tree.leaves()) {
    Matrix& D = H.D[static_cast<std::size_t>(i)];
    D.diagonal().array() += c;
  }
}

/// Random (generally non-standard) telescopic decomposition: orthonormal
/// bases of rank at most `rank` and dense D at every node.
inline TelescopicDecomposition random_telescopic(const ClusterTree& tree, Eigen::Index rank, Rng& rng,
                                                 bool symmetric = true) {
  TelescopicDecomposition T(tree);
  T.symmetric = symmetric;
  const int L = tree.depth();
  for (int l = L; l >= 0; --l)
    for (Eigen::Index i : tree.nodes_at_depth(l)) {
      const auto s = static_cast<std::size_t>(i);
      Eigen::Index rows, cols;
      if (l == L) {
        rows = cols = tree.range(i).size();
      } else {
        rows = T.u(ClusterTree::left(i)).cols() + T.u(ClusterTree::right(i)).cols();
        cols = T.v(ClusterTree::left(i)).cols() + T.v(ClusterTree::right(i)).cols();
      }
      T.D[s] = symmetric ? random_symmetric(rows, rng) : random_matrix(rows, cols, rng);
      if (i == 0) continue;
      const Eigen::Index r = std::min({rank, rows, cols});
      T.U[s] = random_orthonormal(rows, r, rng);
      if (!symmetric) T.V[s] = random_orthonormal(cols, r, rng);
    }
  return T;
}

}  // namespace hssfun
