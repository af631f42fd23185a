#pragma once

// Spectral interval estimates from a symmetric matvec.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>

#include <Eigen/Dense>

#include "dense.hpp"
#include "errors.hpp"
#include "matfun.hpp"
#include "telescopic.hpp"

namespace hssfun {

using MatvecFn = std::function<Matrix(const Matrix&)>;

/// Extreme Ritz values after `steps` Lanczos steps (full reorthogonalization,
/// random start from a fixed seed).  Ritz values lie inside the spectrum.
inline std::pair<double, double> lanczos_extremes(Eigen::Index n, const MatvecFn& apply, int steps = 20,
                                                  std::uint64_t seed = 0) {
  if (n <= 0) throw contract_error("lanczos_extremes: empty operator");
  const Eigen::Index m = std::min<Eigen::Index>(steps, n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix Q(n, m);
  Vector alpha(m), beta(m);
  Vector q(n);
  for (Eigen::Index i = 0; i < n; ++i) q(i) = g(rng);
  q.normalize();
  Eigen::Index used = 0;
  for (Eigen::Index j = 0; j < m; ++j) {
    Q.col(j) = q;
    used = j + 1;
    Vector w = apply(q);
    alpha(j) = q.dot(w);
    for (int pass = 0; pass < 2; ++pass) w -= Q.leftCols(j + 1) * (Q.leftCols(j + 1).transpose() * w);
    beta(j) = w.norm();
    if (beta(j) <= 1e-13 * std::max(1.0, std::abs(alpha(j)))) break;
    q = w / beta(j);
  }
  Matrix Tm = Matrix::Zero(used, used);
  for (Eigen::Index j = 0; j < used; ++j) {
    Tm(j, j) = alpha(j);
    if (j + 1 < used) Tm(j, j + 1) = Tm(j + 1, j) = beta(j);
  }
  const Vector ritz = Eigen::SelfAdjointEigenSolver<Matrix>(Tm, Eigen::EigenvaluesOnly).eigenvalues();
  return {ritz.minCoeff(), ritz.maxCoeff()};
}

/// Lanczos extremes widened by `margin` times the interval width on each side.
inline std::pair<double, double> estimate_spectrum_bounds(const TelescopicDecomposition& T, int steps = 20,
                                                          double margin = 0.05) {
  const auto [lo, hi] = lanczos_extremes(T.size(), [&](const Matrix& X) { return telescopic_matvec(T, X); }, steps);
  const double w = std::max(hi - lo, 1e-300);
  return {lo - margin * w, hi + margin * w};
}

namespace detail {

// Extreme Ritz values of A^{-1}; the inverse is exact with the single pole 0.
inline std::pair<double, double> inverse_extremes(const TelescopicDecomposition& T, int steps) {
  MatFunRequest req{T, fn::inv(), PoleList{Pole::real(0.0)}, 0.0, std::nullopt, std::nullopt};
  const auto Tinv = matfun_telescopic(req);
  return lanczos_extremes(T.size(), [&](const Matrix& X) { return telescopic_matvec(Tinv, X); }, steps);
}

}  // namespace detail

/// Smallest |eigenvalue| of a nonsingular A from the largest |eigenvalue| of
/// A^{-1}, lowered by `margin` (relative).
inline double smallest_magnitude_estimate(const TelescopicDecomposition& T, int steps = 20, double margin = 0.05) {
  const auto [lo, hi] = detail::inverse_extremes(T, steps);
  return (1.0 - margin) / std::max(std::abs(lo), std::abs(hi));
}

/// Smallest eigenvalue of a positive definite A, as above.
inline double refine_lower_bound_spd(const TelescopicDecomposition& T, int steps = 20, double margin = 0.05) {
  const auto [lo, hi] = detail::inverse_extremes(T, steps);
  if (!(lo > 0.0)) throw domain_error("refine_lower_bound_spd: matrix is not positive definite");
  return (1.0 - margin) / hi;
}

}  // namespace hssfun
