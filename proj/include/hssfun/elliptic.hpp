#pragma once

// Complete elliptic integral of the first kind and Jacobi elliptic functions
// via the arithmetic-geometric mean, plus the Zolotarev coefficients used by
// the Markov and sign pole constructions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "errors.hpp"

namespace hssfun::elliptic {

inline double agm(double a, double b) {
  for (int it = 0; it < 64 && std::abs(a - b) > 1e-15 * a; ++it) {
    const double m = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = m;
  }
  return 0.5 * (a + b);
}

/// K(m) for parameter m = k^2 in [0, 1).
inline double complete_k(double m) {
  if (m < 0.0 || m >= 1.0) throw contract_error("complete_k: parameter must lie in [0, 1)");
  return std::numbers::pi / (2.0 * agm(1.0, std::sqrt(1.0 - m)));
}

struct SnCnDn {
  double sn, cn, dn;
};

/// sn, cn, dn of argument u for parameter m = 1 - mc (descending Landen/AGM).
inline SnCnDn sncndn(double u, double mc) {
  if (mc < 0.0 || mc > 1.0) throw contract_error("sncndn: complementary parameter must lie in [0, 1]");
  if (mc == 0.0) {
    const double c = 1.0 / std::cosh(u);
    return {std::tanh(u), c, c};
  }
  std::vector<double> em, en;
  double a = 1.0, c = 1.0, emc = mc;
  for (int i = 0; i < 64; ++i) {
    em.push_back(a);
    emc = std::sqrt(emc);
    en.push_back(emc);
    c = 0.5 * (a + emc);
    if (std::abs(a - emc) <= 1e-14 * a) break;
    emc *= a;
    a = c;
  }
  u *= c;
  double sn = std::sin(u), cn = std::cos(u), dn = 1.0;
  if (sn != 0.0) {
    a = cn / sn;
    c *= a;
    for (std::size_t ii = em.size(); ii-- > 0;) {
      const double b = em[ii];
      a *= c;
      c *= dn;
      dn = (en[ii] + a) / (b + a);
      a = c / b;
    }
    a = 1.0 / std::sqrt(c * c + 1.0);
    sn = sn >= 0.0 ? a : -a;
    cn = c * sn;
  }
  return {sn, cn, dn};
}

/// Coefficients c_1..c_{2m} of the Zolotarev approximant
///   x * prod_j (x^2 + c_{2j}) / (x^2 + c_{2j-1})
/// to sign(x) on [-1, -ell] u [ell, 1].  c_i = ell^2 sc^2(i K'/(2m+1); ell'),
/// with the upper half from the reflection c_i c_{2m+1-i} = ell^2.
inline std::vector<double> zolotarev_coefficients(int m, double ell) {
  if (m < 1) throw contract_error("zolotarev_coefficients: m must be positive");
  if (!(ell > 0.0 && ell <= 1.0)) throw contract_error("zolotarev_coefficients: ell must lie in (0, 1]");
  const double ell2 = ell * ell;
  // Modulus ell' = sqrt(1 - ell^2); its complementary parameter is ell^2.
  const double Kp = std::numbers::pi / (2.0 * agm(1.0, ell));
  std::vector<double> c(static_cast<std::size_t>(2 * m + 1), 0.0);  // 1-based
  for (int i = 1; i <= m; ++i) {
    const auto s = sncndn(i * Kp / (2 * m + 1), ell2);
    const double sc = s.sn / s.cn;
    c[static_cast<std::size_t>(i)] = ell2 * sc * sc;
  }
  for (int i = m + 1; i <= 2 * m; ++i) c[static_cast<std::size_t>(i)] = ell2 / c[static_cast<std::size_t>(2 * m + 1 - i)];
  return {c.begin() + 1, c.end()};
}

/// Unscaled Zolotarev product s(x) for x > 0.
inline double zolotarev_product(const std::vector<double>& c, double x) {
  const double x2 = x * x;
  double s = x;
  for (std::size_t j = 0; j + 1 < c.size(); j += 2) s *= (x2 + c[j + 1]) / (x2 + c[j]);
  return s;
}

/// Relative equioscillation error of the optimally scaled approximant,
/// (max s - min s)/(max s + min s) over a log grid of [ell, 1].
inline double zolotarev_sign_error(int m, double ell, int samples = 4000) {
  const auto c = zolotarev_coefficients(m, ell);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  const double la = std::log(ell);
  for (int i = 0; i < samples; ++i) {
    const double x = std::exp(la * (1.0 - static_cast<double>(i) / (samples - 1)));
    const double s = zolotarev_product(c, x);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return (hi - lo) / (hi + lo);
}

}  // namespace hssfun::elliptic
