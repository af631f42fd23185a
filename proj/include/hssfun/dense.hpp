#pragma once

// Small dense kernels shared by every module: scalar functions with domain
// metadata, spectral matrix functions, orthonormalization with deflation,
// Frobenius diagnostics and CSV I/O.

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace hssfun {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using Cplx = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Real interval; either end may be open or infinite.
struct Interval {
  double lo = -kInf;
  double hi = kInf;
  bool lo_open = true;
  bool hi_open = true;

  bool contains(double x) const {
    const bool above = lo_open ? x > lo : x >= lo;
    const bool below = hi_open ? x < hi : x <= hi;
    return above && below;
  }
};

class ScalarFunction {
 public:
  ScalarFunction() = default;
  ScalarFunction(std::string name, std::vector<Interval> domain, std::function<double(double)> eval)
      : name_(std::move(name)), domain_(std::move(domain)), eval_(std::move(eval)) {}

  const std::string& name() const { return name_; }
  const std::vector<Interval>& domain() const { return domain_; }

  bool in_domain(double x) const {
    return std::any_of(domain_.begin(), domain_.end(), [x](const Interval& I) { return I.contains(x); });
  }

  double operator()(double x) const {
    if (!in_domain(x)) throw domain_error(name_ + ": argument " + fmt(x) + " outside the domain");
    return eval_(x);
  }

  /// Evaluation without the domain check (callers that already checked).
  double raw(double x) const { return eval_(x); }

  static std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
  }

 private:
  std::string name_ = "identity";
  std::vector<Interval> domain_{Interval{}};
  std::function<double(double)> eval_ = [](double x) { return x; };
};

namespace fn {

inline ScalarFunction identity() { return {}; }

inline ScalarFunction inv() {
  return {"inv", {{-kInf, 0.0, true, true}, {0.0, kInf, true, true}}, [](double x) { return 1.0 / x; }};
}

inline ScalarFunction exp() {
  return {"exp", {Interval{}}, [](double x) { return std::exp(x); }};
}

inline ScalarFunction invsqrt() {
  return {"invsqrt", {{0.0, kInf, true, true}}, [](double x) { return 1.0 / std::sqrt(x); }};
}

inline ScalarFunction sqrt() {
  return {"sqrt", {{0.0, kInf, false, true}}, [](double x) { return std::sqrt(x); }};
}

/// sign(x) = 1 for x > 0 and -1 for x <= 0.
inline ScalarFunction sign() {
  return {"sign", {Interval{}}, [](double x) { return x > 0.0 ? 1.0 : -1.0; }};
}

inline ScalarFunction log1p_over_x() {
  return {"log1p_over_x", {{-1.0, kInf, true, true}}, [](double x) {
            if (std::abs(x) < 1e-8) return 1.0 - x / 2.0 + x * x / 3.0;
            return std::log1p(x) / x;
          }};
}

/// x^gamma on (0, inf).
inline ScalarFunction pow_gamma(double gamma) {
  return {"pow_gamma", {{0.0, kInf, true, true}}, [gamma](double x) { return std::pow(x, gamma); }};
}

inline ScalarFunction custom(std::string name, std::vector<Interval> domain, std::function<double(double)> f) {
  return {std::move(name), std::move(domain), std::move(f)};
}

/// Looks a function up by name: inv, exp, invsqrt, sqrt, sign, log1p_over_x,
/// identity, or pow:<gamma>.
inline ScalarFunction by_name(const std::string& name) {
  if (name == "inv") return inv();
  if (name == "exp") return exp();
  if (name == "invsqrt") return invsqrt();
  if (name == "sqrt") return sqrt();
  if (name == "sign") return sign();
  if (name == "log1p_over_x") return log1p_over_x();
  if (name == "identity") return identity();
  if (name.rfind("pow:", 0) == 0) return pow_gamma(std::stod(name.substr(4)));
  throw contract_error("unknown scalar function '" + name + "'");
}

}  // namespace fn

inline double max_asymmetry(const Matrix& S) {
  if (S.size() == 0) return 0.0;
  return (S - S.transpose()).cwiseAbs().maxCoeff();
}

inline bool is_symmetric(const Matrix& S, double rel = 1e-12) {
  return S.rows() == S.cols() && max_asymmetry(S) <= rel * S.norm();
}

inline Matrix symmetrize(const Matrix& S) { return 0.5 * (S + S.transpose()); }

inline void require_symmetric(const Matrix& S, const std::string& what) {
  if (S.rows() != S.cols())
    throw shape_error(what + ": expected a square matrix, got " + std::to_string(S.rows()) + "x" +
                      std::to_string(S.cols()));
  if (!is_symmetric(S))
    throw contract_error(what + ": matrix is not symmetric (max asymmetry " +
                         ScalarFunction::fmt(max_asymmetry(S)) + ")");
}

/// Spectral decomposition S = V diag(lambda) V^T with ascending eigenvalues.
struct SymmetricEig {
  Vector values;
  Matrix vectors;

  explicit SymmetricEig(const Matrix& S) {
    if (S.rows() == 0) return;
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(S));
    if (es.info() != Eigen::Success) throw error("symmetric eigensolver failed to converge");
    values = es.eigenvalues();
    vectors = es.eigenvectors();
  }

  Matrix apply(const ScalarFunction& f) const {
    Vector fl(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      if (!f.in_domain(values(i)))
        throw domain_error(f.name() + ": eigenvalue " + ScalarFunction::fmt(values(i)) +
                           " lies outside the domain");
      fl(i) = f.raw(values(i));
    }
    return symmetrize(vectors * fl.asDiagonal() * vectors.transpose());
  }
};

/// f(S) = V f(Lambda) V^T for symmetric S; the result is symmetrized.
inline Matrix matfun_dense(const Matrix& S, const ScalarFunction& f) {
  require_symmetric(S, "matfun_dense");
  if (S.rows() == 0) return Matrix(0, 0);
  return SymmetricEig(S).apply(f);
}

struct Orthonormalized {
  Matrix Q;
  Eigen::Index rank = 0;
};

/// Orthonormalizes the columns of M against the orthonormal columns of
/// `basis` and against each other.  A column is dropped when its norm after
/// reorthogonalization is below `abs_tol` or has lost all but a few ulps of
/// its original length.
inline Matrix orthonormalize_against(const Matrix& basis, const Matrix& M, double abs_tol) {
  const Eigen::Index n = M.rows();
  const Eigen::Index b = basis.cols();
  Matrix out(n, M.cols());
  Eigen::Index kept = 0;
  auto project_out = [&](Eigen::Ref<Vector> v) {
    if (b > 0) v -= basis * (basis.transpose() * v);
    if (kept > 0) v -= out.leftCols(kept) * (out.leftCols(kept).transpose() * v);
  };
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    Vector v = M.col(j);
    const double original = v.norm();
    if (original == 0.0) continue;
    project_out(v);
    double prev = v.norm();
    project_out(v);
    double now = v.norm();
    if (now < 0.5 * prev) {
      project_out(v);
      now = v.norm();
    }
    if (now < abs_tol || now <= 64.0 * kEps * original) continue;
    out.col(kept++) = v / now;
  }
  return out.leftCols(kept);
}

/// Orthonormal basis of the numerically significant column space of M.
/// Columns whose remaining norm falls below defl_tol * ||M||_F are deflated.
inline Orthonormalized orthonormalize(const Matrix& M, double defl_tol) {
  if (defl_tol < 0.0) throw contract_error("orthonormalize: defl_tol must be nonnegative");
  Orthonormalized r;
  r.Q = orthonormalize_against(Matrix(M.rows(), 0), M, defl_tol * M.norm());
  r.rank = r.Q.cols();
  return r;
}

/// ||A - B||_F / ||B||_F, and 0 when both vanish.
inline double rel_fro_error(const Matrix& A, const Matrix& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw shape_error("rel_fro_error: shapes " + std::to_string(A.rows()) + "x" + std::to_string(A.cols()) +
                      " and " + std::to_string(B.rows()) + "x" + std::to_string(B.cols()) + " differ");
  const double diff = (A - B).norm();
  const double ref = B.norm();
  if (ref == 0.0) return diff == 0.0 ? 0.0 : kInf;
  return diff / ref;
}

/// Spectral norm: symmetric eigenvalues when M is (nearly) symmetric, else SVD.
inline double norm2(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  if (M.rows() == M.cols() && is_symmetric(M, 1e-14)) {
    SymmetricEig e(M);
    return std::max(std::abs(e.values(0)), std::abs(e.values(e.values.size() - 1)));
  }
  Eigen::BDCSVD<Matrix> svd(M);
  return svd.singularValues()(0);
}

/// Block-diagonal assembly.
inline Matrix blkdiag(const std::vector<const Matrix*>& blocks) {
  Eigen::Index rows = 0, cols = 0;
  for (const Matrix* b : blocks) rows += b->rows(), cols += b->cols();
  Matrix out = Matrix::Zero(rows, cols);
  Eigen::Index r = 0, c = 0;
  for (const Matrix* b : blocks) {
    out.block(r, c, b->rows(), b->cols()) = *b;
    r += b->rows();
    c += b->cols();
  }
  return out;
}

inline Matrix blkdiag(const Matrix& a, const Matrix& b) { return blkdiag({&a, &b}); }

// ---- CSV -------------------------------------------------------------------

inline std::string format_double(double x) { return ScalarFunction::fmt(x); }

inline void write_csv_matrix(std::ostream& os, const Matrix& M) {
  os << std::setprecision(17);
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) os << ',';
      os << M(i, j);
    }
    os << '\n';
  }
}

inline void write_csv_matrix(const std::string& path, const Matrix& M) {
  std::ofstream os(path);
  if (!os) throw error("cannot open '" + path + "' for writing");
  write_csv_matrix(os, M);
}

inline Matrix read_csv_matrix(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || !std::isfinite(v))
        throw parse_error("csv line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw parse_error("csv line " + std::to_string(lineno) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix(0, 0);
  Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return M;
}

inline Matrix read_csv_matrix(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw error("cannot open '" + path + "'");
  return read_csv_matrix(is);
}

}  // namespace hssfun
