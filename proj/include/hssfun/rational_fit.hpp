#pragma once

// Least-squares rational fits with a prescribed denominator.
//
// Given poles xi_1..xi_k (infinite poles raise the polynomial degree, repeated
// finite poles add higher powers), f is fitted on a sample grid in the span of
//   T_0, ..., T_p   and   (x - xi)^{-j}  (real and imaginary parts for pairs).
// A few Lawson reweighting sweeps push the least-squares fit toward the
// minimax one; the reported sup error is an upper estimate of the best error
// attainable with these poles.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dense.hpp"
#include "errors.hpp"
#include "rational_krylov.hpp"

namespace hssfun {

struct FitInterval {
  double lo, hi;
};

/// Chebyshev points on each interval plus points clustered geometrically at
/// every finite endpoint (relative offsets 1 down to 1e-15).
inline std::vector<double> fit_grid(const std::vector<FitInterval>& intervals, int n = 10000) {
  if (intervals.empty()) throw contract_error("fit_grid: no intervals");
  std::vector<double> g;
  const int per = std::max(4, n / static_cast<int>(intervals.size()));
  const int cheb = per * 3 / 4, geo = (per - cheb) / 2;
  for (const auto& I : intervals) {
    if (!(I.lo <= I.hi) || !std::isfinite(I.lo) || !std::isfinite(I.hi))
      throw contract_error("fit_grid: interval must be finite with lo <= hi");
    const double mid = 0.5 * (I.lo + I.hi), rad = 0.5 * (I.hi - I.lo);
    if (rad == 0.0) {
      g.push_back(I.lo);
      continue;
    }
    g.push_back(I.lo);
    g.push_back(I.hi);
    for (int i = 1; i + 1 < cheb; ++i) g.push_back(mid - rad * std::cos(std::numbers::pi * i / (cheb - 1)));
    for (int i = 0; i < geo; ++i) {
      const double d = 2.0 * rad * std::pow(10.0, -15.0 * i / std::max(1, geo - 1));
      g.push_back(I.lo + d);
      g.push_back(I.hi - d);
    }
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

class FixedPoleFit {
 public:
  FixedPoleFit(const PoleList& poles, double lo, double hi) : lo_(lo), hi_(hi) {
    const auto plan = poles.pair_up();
    if (!plan.ok) throw contract_error("rational_fit: pole list is not closed under complex conjugation");
    for (const auto& [idx, partner] : plan.steps) {
      const Pole& p = poles[idx];
      if (p.infinite) {
        ++degree_;
        continue;
      }
      int power = 1;
      for (const auto& t : terms_)
        if (t.xi == p.value) power = std::max(power, t.power + 1);
      terms_.push_back({p.value, power, partner >= 0});
    }
  }

  Eigen::Index columns() const {
    Eigen::Index c = degree_ + 1;
    for (const auto& t : terms_) c += t.pair ? 2 : 1;
    return c;
  }

  void basis_row(double x, Eigen::Ref<Vector> row) const {
    const double t = hi_ > lo_ ? (2.0 * x - lo_ - hi_) / (hi_ - lo_) : 0.0;
    double tm = 1.0, tc = t;
    row(0) = 1.0;
    for (int j = 1; j <= degree_; ++j) {
      row(j) = tc;
      const double tn = 2.0 * t * tc - tm;
      tm = tc;
      tc = tn;
    }
    Eigen::Index c = degree_ + 1;
    for (const auto& term : terms_) {
      const Cplx v = std::pow(1.0 / (Cplx(x, 0.0) - term.xi), term.power);
      row(c++) = v.real();
      if (term.pair) row(c++) = v.imag();
    }
  }

  double operator()(double x) const {
    Vector row(columns());
    basis_row(x, row);
    return row.dot(coef_);
  }

  double sup_error() const { return sup_error_; }
  const Vector& coefficients() const { return coef_; }

 private:
  struct Term {
    Cplx xi;
    int power;
    bool pair;
  };

  friend FixedPoleFit rational_fit(const ScalarFunction&, const PoleList&, const std::vector<double>&, int);

  double lo_, hi_;
  int degree_ = 0;
  std::vector<Term> terms_;
  Vector coef_;
  double sup_error_ = 0.0;
};

/// Fits f on the grid with the given poles; grid points must lie in f's domain.
inline FixedPoleFit rational_fit(const ScalarFunction& f, const PoleList& poles, const std::vector<double>& grid,
                                 int lawson_iters = 8) {
  if (grid.empty()) throw contract_error("rational_fit: empty grid");
  const auto [mn, mx] = std::minmax_element(grid.begin(), grid.end());
  FixedPoleFit fit(poles, *mn, *mx);
  const Eigen::Index m = static_cast<Eigen::Index>(grid.size()), c = fit.columns();
  Matrix A(m, c);
  Vector F(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double x = grid[static_cast<std::size_t>(i)];
    Vector row(c);
    fit.basis_row(x, row);
    A.row(i) = row.transpose();
    F(i) = f(x);
  }
  Vector scale = A.cwiseAbs().colwise().maxCoeff().transpose();
  for (Eigen::Index j = 0; j < c; ++j) {
    if (scale(j) == 0.0 || !std::isfinite(scale(j))) scale(j) = 1.0;
    A.col(j) /= scale(j);
  }
  Vector w = Vector::Ones(m);
  Vector best_coef = Vector::Zero(c);
  double best = kInf;
  for (int it = 0; it <= lawson_iters; ++it) {
    const Vector sw = w.cwiseSqrt();
    const Vector x = (sw.asDiagonal() * A).colPivHouseholderQr().solve(sw.asDiagonal() * F);
    const Vector e = (F - A * x).cwiseAbs();
    const double sup = e.maxCoeff();
    if (sup < best) {
      best = sup;
      best_coef = x;
    }
    if (sup == 0.0) break;
    w = w.cwiseProduct(e);
    const double s = w.sum();
    if (!(s > 0.0)) break;
    w /= s;
    w = w.cwiseMax(1e-300);
  }
  fit.coef_ = best_coef.cwiseQuotient(scale);
  fit.sup_error_ = best;
  return fit;
}

/// Sup-norm error on the grid of the pole-constrained fit.
inline double sampled_fit_error(const ScalarFunction& f, const PoleList& poles, const std::vector<double>& grid,
                                int lawson_iters = 8) {
  return rational_fit(f, poles, grid, lawson_iters).sup_error();
}

}  // namespace hssfun
