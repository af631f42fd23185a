#pragma once

// Entry access used by HSS compression.  A source answers three questions
// about a block row A(lo:hi, :): which columns outside [lo, hi) carry
// nonzeros, the dense values on a column subset, and products with A and A^T.
// Dense sources report every outside column; sparse sources only the
// structural nonzeros, which keeps compression linear in n for banded input.

#include <algorithm>
#include <concepts>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "dense.hpp"

namespace hssfun {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

template <class S>
concept MatrixSource = requires(const S& s, Eigen::Index lo, Eigen::Index hi, const std::vector<Eigen::Index>& cols,
                                const Matrix& X) {
  { s.size() } -> std::convertible_to<Eigen::Index>;
  { s.row_support(lo, hi) } -> std::convertible_to<std::vector<Eigen::Index>>;
  { s.row_block(lo, hi, cols) } -> std::convertible_to<Matrix>;
  { s.diag_block(lo, hi) } -> std::convertible_to<Matrix>;
  { s.apply(X) } -> std::convertible_to<Matrix>;
  { s.transposed() };
  { s.symmetric() } -> std::convertible_to<bool>;
};

class DenseSource {
 public:
  /// Borrows A; the caller keeps it alive.
  explicit DenseSource(const Matrix& A) : A_(&A) {}

  Eigen::Index size() const { return A_->rows(); }
  const Matrix& matrix() const { return *A_; }

  std::vector<Eigen::Index> row_support(Eigen::Index lo, Eigen::Index hi) const {
    std::vector<Eigen::Index> cols;
    cols.reserve(static_cast<std::size_t>(size() - (hi - lo)));
    for (Eigen::Index j = 0; j < size(); ++j)
      if (j < lo || j >= hi) cols.push_back(j);
    return cols;
  }

  Matrix row_block(Eigen::Index lo, Eigen::Index hi, const std::vector<Eigen::Index>& cols) const {
    Matrix out(hi - lo, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c)
      out.col(static_cast<Eigen::Index>(c)) = A_->col(cols[c]).segment(lo, hi - lo);
    return out;
  }

  Matrix diag_block(Eigen::Index lo, Eigen::Index hi) const { return A_->block(lo, lo, hi - lo, hi - lo); }

  Matrix apply(const Matrix& X) const { return (*A_) * X; }

  DenseSource transposed() const {
    DenseSource t(*A_);
    t.owned_ = std::make_shared<const Matrix>(A_->transpose());
    t.A_ = t.owned_.get();
    return t;
  }

  bool symmetric() const { return is_symmetric(*A_); }

 private:
  std::shared_ptr<const Matrix> owned_;
  const Matrix* A_;
};

class SparseSource {
 public:
  explicit SparseSource(SparseMatrix A) : A_(std::move(A)) { A_.makeCompressed(); }

  Eigen::Index size() const { return A_.rows(); }
  const SparseMatrix& matrix() const { return A_; }

  std::vector<Eigen::Index> row_support(Eigen::Index lo, Eigen::Index hi) const {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index i = lo; i < hi; ++i)
      for (SparseMatrix::InnerIterator it(A_, i); it; ++it)
        if (it.col() < lo || it.col() >= hi) cols.push_back(it.col());
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    return cols;
  }

  Matrix row_block(Eigen::Index lo, Eigen::Index hi, const std::vector<Eigen::Index>& cols) const {
    Matrix out = Matrix::Zero(hi - lo, static_cast<Eigen::Index>(cols.size()));
    for (Eigen::Index i = lo; i < hi; ++i)
      for (SparseMatrix::InnerIterator it(A_, i); it; ++it) {
        auto pos = std::lower_bound(cols.begin(), cols.end(), it.col());
        if (pos != cols.end() && *pos == it.col()) out(i - lo, pos - cols.begin()) = it.value();
      }
    return out;
  }

  Matrix diag_block(Eigen::Index lo, Eigen::Index hi) const {
    Matrix out = Matrix::Zero(hi - lo, hi - lo);
    for (Eigen::Index i = lo; i < hi; ++i)
      for (SparseMatrix::InnerIterator it(A_, i); it; ++it)
        if (it.col() >= lo && it.col() < hi) out(i - lo, it.col() - lo) = it.value();
    return out;
  }

  Matrix apply(const Matrix& X) const { return A_ * X; }

  SparseSource transposed() const { return SparseSource(SparseMatrix(A_.transpose())); }

  bool symmetric() const {
    const SparseMatrix diff = A_ - SparseMatrix(A_.transpose());
    double mx = 0.0;
    for (Eigen::Index k = 0; k < diff.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(diff, k); it; ++it) mx = std::max(mx, std::abs(it.value()));
    return mx <= 1e-12 * A_.norm();
  }

 private:
  SparseMatrix A_;
};

/// Lower estimate of ||A||_2 by power iteration on A^T A.
template <class Apply, class ApplyT>
double power_norm_estimate(Eigen::Index n, Apply&& apply, ApplyT&& apply_t, int iterations = 30) {
  if (n == 0) return 0.0;
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> g;
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = g(rng);
  x.normalize();
  double est = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Matrix y = apply(Matrix(x));
    const double ny = y.norm();
    if (ny == 0.0) return est;
    est = std::max(est, ny);
    Matrix z = apply_t(y);
    const double nz = z.norm();
    if (nz == 0.0) return est;
    x = z.col(0) / nz;
  }
  return est;
}

template <MatrixSource S>
double source_norm_estimate(const S& src) {
  auto At = src.transposed();
  return power_norm_estimate(
      src.size(), [&](const Matrix& X) { return src.apply(X); }, [&](const Matrix& X) { return At.apply(X); });
}

}  // namespace hssfun
