#pragma once

// Pole selection: Zolotarev poles for Markov-type functions and sign,
// Caratheodory-Fejer poles for exp on (-inf, 0], an AAA engine for anything
// else, and the a priori pole counts.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "dense.hpp"
#include "elliptic.hpp"
#include "errors.hpp"
#include "rational_krylov.hpp"

namespace hssfun {

/// Geometric rate of best rational approximation of exp on (-inf, 0].
inline constexpr double kExpRate = 9.289025491920818;

namespace detail {

/// Replaces each non-real pole's partner by its exact conjugate; values with
/// |imag| below rel * |value| become real.
inline PoleList conjugation_cleanup(std::vector<Cplx> z, double rel = 1e-12) {
  for (Cplx& v : z)
    if (std::abs(v.imag()) <= rel * std::abs(v)) v = Cplx(v.real(), 0.0);
  std::vector<bool> used(z.size(), false);
  PoleList out;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    if (z[i].imag() == 0.0) {
      out.push_back(Pole::real(z[i].real()));
      continue;
    }
    std::size_t best = z.size();
    double dist = kInf;
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(z[j] - std::conj(z[i]));
      if (d < dist) {
        dist = d;
        best = j;
      }
    }
    const Cplx up(z[i].real(), std::abs(z[i].imag()));
    if (best == z.size() || dist > 1e-6 * std::abs(z[i])) {
      // Unpaired: keep the real part only.
      out.push_back(Pole::real(z[i].real()));
      continue;
    }
    used[best] = true;
    out.push_back(Pole{up, false});
    out.push_back(Pole{std::conj(up), false});
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------- AAA

struct RationalApproximant {
  std::vector<double> support, weights, values;
  std::vector<Cplx> poles, residues;
  bool converged = false;
  double max_error = 0.0;    // on the sample set
  int cleaned = 0;           // support points removed by the doublet cleanup

  int degree() const { return static_cast<int>(support.size()) - 1; }

  double operator()(double x) const {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < support.size(); ++j) {
      if (x == support[j]) return values[j];
      const double c = weights[j] / (x - support[j]);
      num += c * values[j];
      den += c;
    }
    return num / den;
  }

  PoleList pole_list() const { return detail::conjugation_cleanup(poles); }
};

namespace detail {

// Weights from the smallest right singular vector of the Loewner matrix over
// the non-support samples.
inline Vector aaa_weights(const std::vector<double>& Z, const std::vector<double>& F, const std::vector<bool>& is_support,
                          const std::vector<double>& zs, const std::vector<double>& fs) {
  const Eigen::Index m = static_cast<Eigen::Index>(zs.size());
  Eigen::Index rows = 0;
  for (bool s : is_support) rows += s ? 0 : 1;
  if (rows == 0) return Vector::Ones(m);
  Matrix L(rows, m);
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < Z.size(); ++i) {
    if (is_support[i]) continue;
    for (Eigen::Index j = 0; j < m; ++j)
      L(r, j) = (F[i] - fs[static_cast<std::size_t>(j)]) / (Z[i] - zs[static_cast<std::size_t>(j)]);
    ++r;
  }
  if (rows < m) {
    Matrix P = Matrix::Zero(m, m);
    P.topRows(rows) = L;
    L = P;
  }
  Eigen::BDCSVD<Matrix> svd(L, Eigen::ComputeThinV);
  return svd.matrixV().col(m - 1);
}

inline void aaa_poles(RationalApproximant& r) {
  const Eigen::Index m = static_cast<Eigen::Index>(r.support.size());
  r.poles.clear();
  r.residues.clear();
  if (m < 2) return;
  Matrix E = Matrix::Zero(m + 1, m + 1), B = Matrix::Identity(m + 1, m + 1);
  B(0, 0) = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    E(0, j + 1) = r.weights[static_cast<std::size_t>(j)];
    E(j + 1, 0) = 1.0;
    E(j + 1, j + 1) = r.support[static_cast<std::size_t>(j)];
  }
  Eigen::GeneralizedEigenSolver<Matrix> ges(E, B, false);
  const auto alphas = ges.alphas();
  const auto betas = ges.betas();
  for (Eigen::Index i = 0; i < alphas.size(); ++i) {
    if (std::abs(betas(i)) <= 1e-13 * std::abs(alphas(i)) || betas(i) == 0.0) continue;
    const Cplx z = alphas(i) / betas(i);
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) continue;
    Cplx num = 0.0, dden = 0.0;
    for (std::size_t j = 0; j < r.support.size(); ++j) {
      const Cplx d = z - r.support[j];
      num += r.weights[j] * r.values[j] / d;
      dden -= r.weights[j] / (d * d);
    }
    r.poles.push_back(z);
    r.residues.push_back(num / dden);
  }
}

}  // namespace detail

/// AAA rational approximation on a real sample set.  Stops when the sampled
/// error is at most tol * max|f| or the degree reaches max_degree; one pass
/// removes Froissart doublets (residue < 1e-13 * max|f|).
inline RationalApproximant aaa(const ScalarFunction& f, const std::vector<double>& samples, double tol,
                               int max_degree) {
  if (samples.size() < 4) throw contract_error("aaa: need at least 4 sample points");
  if (!(tol > 0.0)) throw contract_error("aaa: tol must be positive");
  if (max_degree < 0) throw contract_error("aaa: max_degree must be nonnegative");
  std::vector<double> Z = samples, F(Z.size());
  for (std::size_t i = 0; i < Z.size(); ++i) F[i] = f(Z[i]);
  double fmax = 0.0, fmean = 0.0;
  for (double v : F) {
    fmax = std::max(fmax, std::abs(v));
    fmean += v / static_cast<double>(F.size());
  }
  const double scale = std::max(fmax, std::numeric_limits<double>::min());

  RationalApproximant r;
  std::vector<bool> is_support(Z.size(), false);
  std::vector<double> R(Z.size(), fmean);
  auto refresh = [&](RationalApproximant& ra) {
    double err = 0.0;
    for (std::size_t i = 0; i < Z.size(); ++i) {
      R[i] = is_support[i] ? F[i] : ra(Z[i]);
      err = std::max(err, std::abs(F[i] - R[i]));
    }
    ra.max_error = err;
  };

  const int max_support = std::min<int>(max_degree + 1, static_cast<int>(Z.size()) - 1);
  while (static_cast<int>(r.support.size()) < max_support) {
    std::size_t jmax = 0;
    double emax = -1.0;
    for (std::size_t i = 0; i < Z.size(); ++i) {
      if (is_support[i]) continue;
      const double e = std::abs(F[i] - R[i]);
      if (e > emax) {
        emax = e;
        jmax = i;
      }
    }
    is_support[jmax] = true;
    r.support.push_back(Z[jmax]);
    r.values.push_back(F[jmax]);
    const Vector w = detail::aaa_weights(Z, F, is_support, r.support, r.values);
    r.weights.assign(w.data(), w.data() + w.size());
    refresh(r);
    if (r.max_error <= tol * scale) break;
  }
  r.converged = r.max_error <= tol * scale;
  detail::aaa_poles(r);

  // Doublet cleanup: drop the support point nearest each spurious pole, refit once.
  std::vector<std::size_t> drop;
  for (std::size_t p = 0; p < r.poles.size(); ++p) {
    if (std::abs(r.residues[p]) >= 1e-13 * scale) continue;
    std::size_t best = 0;
    for (std::size_t j = 1; j < r.support.size(); ++j)
      if (std::abs(r.poles[p] - r.support[j]) < std::abs(r.poles[p] - r.support[best])) best = j;
    if (std::find(drop.begin(), drop.end(), best) == drop.end()) drop.push_back(best);
  }
  if (!drop.empty() && drop.size() < r.support.size()) {
    std::sort(drop.rbegin(), drop.rend());
    for (std::size_t j : drop) {
      const auto it = std::find(Z.begin(), Z.end(), r.support[j]);
      is_support[static_cast<std::size_t>(it - Z.begin())] = false;
      r.support.erase(r.support.begin() + static_cast<long>(j));
      r.values.erase(r.values.begin() + static_cast<long>(j));
    }
    const Vector w = detail::aaa_weights(Z, F, is_support, r.support, r.values);
    r.weights.assign(w.data(), w.data() + w.size());
    refresh(r);
    r.cleaned = static_cast<int>(drop.size());
    r.converged = r.max_error <= tol * scale;
    detail::aaa_poles(r);
  }
  return r;
}

// ---------------------------------------------------------------- Zolotarev

/// k negative real poles for Markov functions (e.g. x^{-1/2}) on [a, b]:
/// -b c_{2j-1} from the Zolotarev approximant of 1/sqrt(y) on [a/b, 1].
inline PoleList poles_markov(int k, double a, double b) {
  if (!(a > 0.0)) throw contract_error("poles_markov: a must be positive");
  if (b < a) throw contract_error("poles_markov: need a <= b");
  if (k < 1) throw contract_error("poles_markov: k must be positive");
  const auto c = elliptic::zolotarev_coefficients(k, std::sqrt(a / b));
  PoleList out;
  for (int j = 0; j < k; ++j) out.push_back(Pole::real(-b * c[static_cast<std::size_t>(2 * j)]));
  return out;
}

/// Poles of the Zolotarev approximant of sign on [-b,-a] u [a,b] with k
/// conjugate pairs: +-i b sqrt(c_{2j-1}) and one infinite pole (the
/// numerator degree exceeds the denominator's by one).
inline PoleList poles_sign(int k, double a, double b) {
  if (!(a > 0.0)) throw contract_error("poles_sign: a must be positive");
  if (b < a) throw contract_error("poles_sign: need a <= b");
  if (k < 1) throw contract_error("poles_sign: k must be positive");
  const auto c = elliptic::zolotarev_coefficients(k, a / b);
  PoleList out;
  for (int j = 0; j < k; ++j) {
    const double y = b * std::sqrt(c[static_cast<std::size_t>(2 * j)]);
    out.push_back(Pole::complex(0.0, y));
    out.push_back(Pole::complex(0.0, -y));
  }
  out.push_back(Pole::inf());
  return out;
}

/// Sup error of the scaled Zolotarev sign approximant with k pairs.
inline double sign_approximation_error(int k, double a, double b) {
  return elliptic::zolotarev_sign_error(k, a / b);
}

// ---------------------------------------------------------------- exp

/// Above this degree the approximant is already at roundoff level and the
/// computed poles turn into noise.
inline constexpr int kExpMaxDegree = 16;

/// k poles of the type (k,k) Caratheodory-Fejer approximant of exp on
/// (-inf, 0], computed through the map x = 9 (t-1)/(t+1) of [-1,1].
/// For k > kExpMaxDegree the extra poles are infinite.
inline PoleList poles_exp(int k) {
  if (k < 1) throw contract_error("poles_exp: k must be positive");
  if (k > kExpMaxDegree) {
    PoleList out = poles_exp(kExpMaxDegree);
    for (int i = kExpMaxDegree; i < k; ++i) out.push_back(Pole::inf());
    return out;
  }
  constexpr int nf = 1024, K = 75;
  constexpr double scl = 9.0;
  std::vector<double> F(nf);
  for (int m = 0; m < nf; ++m) {
    const double t = std::cos(2.0 * std::numbers::pi * m / nf);
    F[static_cast<std::size_t>(m)] = std::exp(scl * (t - 1.0) / (t + 1.0 + 1e-16));
  }
  std::vector<double> c(2 * K + 1, 0.0);
  for (int j = 0; j <= 2 * K; ++j) {
    double s = 0.0;
    for (int m = 0; m < nf; ++m)
      s += F[static_cast<std::size_t>(m)] * std::cos(2.0 * std::numbers::pi * ((static_cast<long>(j) * m) % nf) / nf);
    c[static_cast<std::size_t>(j)] = s / nf;
  }
  Matrix H = Matrix::Zero(K, K);
  for (int i = 0; i < K; ++i)
    for (int j = 0; i + j < K; ++j) H(i, j) = c[static_cast<std::size_t>(1 + i + j)];
  Eigen::JacobiSVD<Matrix> svd(H, Eigen::ComputeFullV);
  const Vector v = svd.matrixV().col(k);
  // Roots of v(0) x^{K-1} + ... + v(K-1), trailing leading zeros stripped.
  Eigen::Index lead = 0;
  while (lead < K - 1 && std::abs(v(lead)) < 1e-300) ++lead;
  const Eigen::Index deg = K - 1 - lead;
  Matrix C = Matrix::Zero(deg, deg);
  for (Eigen::Index j = 0; j < deg; ++j) C(0, j) = -v(lead + 1 + j) / v(lead);
  for (Eigen::Index j = 1; j < deg; ++j) C(j, j - 1) = 1.0;
  const auto roots = Eigen::EigenSolver<Matrix>(C, false).eigenvalues();
  std::vector<Cplx> q;
  for (Eigen::Index i = 0; i < roots.size(); ++i)
    if (std::abs(roots(i)) > 1.0) q.push_back(roots(i));
  if (static_cast<int>(q.size()) != k) {
    std::vector<Cplx> all(roots.data(), roots.data() + roots.size());
    std::sort(all.begin(), all.end(), [](Cplx x, Cplx y) { return std::abs(x) > std::abs(y); });
    q.assign(all.begin(), all.begin() + std::min<long>(k, static_cast<long>(all.size())));
  }
  std::vector<Cplx> z;
  for (const Cplx& qj : q) z.push_back(scl * (qj - 1.0) * (qj - 1.0) / ((qj + 1.0) * (qj + 1.0)));
  return detail::conjugation_cleanup(z, 1e-10);
}

// ---------------------------------------------------------------- counts

/// ceil(log(4 L / eps) / log K_e) with the unspecified constant C taken as 1.
inline int pole_count_exp(double eps, int L) {
  if (!(eps > 0.0 && eps < 1.0) || L < 1) throw contract_error("pole_count_exp: need 0 < eps < 1 and L >= 1");
  return std::max(1, static_cast<int>(std::ceil(std::log(4.0 * L / eps) / std::log(kExpRate))));
}

/// ceil(log(16 L f_sup / eps) log(16 b / a) / pi^2), at least 1.
inline int pole_count_markov(double eps, int L, double a, double b, double f_sup) {
  if (!(a > 0.0) || b < a || !(eps > 0.0) || !(f_sup > 0.0) || L < 1)
    throw contract_error("pole_count_markov: need 0 < a <= b, eps > 0, f_sup > 0, L >= 1");
  const double k = std::log(16.0 * L * f_sup / eps) * std::log(16.0 * b / a) / (std::numbers::pi * std::numbers::pi);
  return std::max(1, static_cast<int>(std::ceil(k)));
}

struct SignPoleCount {
  int pairs = 1;
  double error = 0.0;  // error of the Zolotarev approximant with that many pairs
  bool converged = false;
};

/// Smallest number of conjugate pairs whose Zolotarev sign error is <= eps,
/// capped at max_pairs.
inline SignPoleCount pole_count_sign(double eps, double a, double b, int max_pairs) {
  if (!(a > 0.0) || b < a || !(eps > 0.0) || max_pairs < 1)
    throw contract_error("pole_count_sign: need 0 < a <= b, eps > 0, max_pairs >= 1");
  SignPoleCount out;
  for (int m = 1; m <= max_pairs; ++m) {
    out.pairs = m;
    out.error = sign_approximation_error(m, a, b);
    if (out.error <= eps) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace hssfun
