#pragma once

// Block rational Krylov bases for small dense symmetric matrices.
//
// W spans span{Z} + the blocks produced by successive shift-and-invert steps
// (D - xi I)^{-1} (or D itself for xi = inf), so k poles give at most
// b (k + 1) columns.  Shifted solves reuse one symmetric eigendecomposition of
// D.  A conjugate pair xi, conj(xi) costs a single complex solve whose real and
// imaginary parts are both appended, keeping W real.

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "dense.hpp"
#include "errors.hpp"

namespace hssfun {

struct Pole {
  Cplx value{0.0, 0.0};
  bool infinite = false;

  static Pole inf() { return {Cplx(0.0, 0.0), true}; }
  static Pole real(double x) { return {Cplx(x, 0.0), false}; }
  static Pole complex(double re, double im) { return {Cplx(re, im), false}; }

  bool is_real() const { return !infinite && value.imag() == 0.0; }

  std::string str() const {
    if (infinite) return "inf";
    if (value.imag() == 0.0) return format_double(value.real());
    return "(" + format_double(value.real()) + (value.imag() < 0 ? " - " : " + ") +
           format_double(std::abs(value.imag())) + "i)";
  }
};

class PoleList {
 public:
  PoleList() = default;
  PoleList(std::initializer_list<Pole> p) : poles_(p) {}
  explicit PoleList(std::vector<Pole> p) : poles_(std::move(p)) {}

  std::size_t size() const { return poles_.size(); }
  bool empty() const { return poles_.empty(); }
  const Pole& operator[](std::size_t i) const { return poles_[i]; }
  auto begin() const { return poles_.begin(); }
  auto end() const { return poles_.end(); }
  void push_back(const Pole& p) { poles_.push_back(p); }
  void append(const PoleList& o) { poles_.insert(poles_.end(), o.poles_.begin(), o.poles_.end()); }
  const std::vector<Pole>& poles() const { return poles_; }

  /// Pairs every non-real pole with a distinct later or earlier pole equal
  /// to its conjugate (relative tolerance `rel`).
  bool conjugation_closed(double rel = 1e-12) const { return pair_up(rel).ok; }

  /// Processing order: each entry is an index and, for complex poles, the
  /// index of its conjugate partner (consumed together).
  struct Plan {
    bool ok = true;
    std::vector<std::pair<std::size_t, long>> steps;  // (pole, partner or -1)
  };

  Plan pair_up(double rel = 1e-12) const {
    Plan plan;
    std::vector<bool> used(poles_.size(), false);
    for (std::size_t i = 0; i < poles_.size(); ++i) {
      if (used[i]) continue;
      used[i] = true;
      const Pole& p = poles_[i];
      if (p.infinite || p.value.imag() == 0.0) {
        plan.steps.emplace_back(i, -1);
        continue;
      }
      long partner = -1;
      for (std::size_t j = i + 1; j < poles_.size() && partner < 0; ++j) {
        if (used[j] || poles_[j].infinite) continue;
        if (std::abs(poles_[j].value - std::conj(p.value)) <= rel * std::abs(p.value)) partner = static_cast<long>(j);
      }
      if (partner < 0) {
        plan.ok = false;
        continue;
      }
      used[static_cast<std::size_t>(partner)] = true;
      plan.steps.emplace_back(i, partner);
    }
    return plan;
  }

  /// Multiset equality with the conjugated list, entry by entry.
  bool exactly_conjugation_closed() const {
    std::vector<bool> used(poles_.size(), false);
    for (std::size_t i = 0; i < poles_.size(); ++i) {
      bool found = false;
      for (std::size_t j = 0; j < poles_.size() && !found; ++j) {
        if (used[j] || poles_[j].infinite != poles_[i].infinite) continue;
        if (poles_[i].infinite || poles_[j].value == std::conj(poles_[i].value)) {
          used[j] = true;
          found = true;
        }
      }
      if (!found) return false;
    }
    return true;
  }

  nlohmann::json to_json() const {
    nlohmann::json a = nlohmann::json::array();
    for (const Pole& p : poles_) {
      if (p.infinite) a.push_back("inf");
      else if (p.value.imag() == 0.0) a.push_back(p.value.real());
      else a.push_back({p.value.real(), p.value.imag()});
    }
    return a;
  }

  /// Parses [1.5, "inf", [re, im], ...].
  static PoleList from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw parse_error("pole list: expected a JSON array");
    PoleList out;
    for (const auto& e : j) {
      if (e.is_string()) {
        const std::string s = e.get<std::string>();
        if (s == "inf" || s == "Inf" || s == "infinity") out.push_back(Pole::inf());
        else throw parse_error("pole list: unknown symbol '" + s + "'");
      } else if (e.is_number()) {
        out.push_back(Pole::real(e.get<double>()));
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        out.push_back(Pole::complex(e[0].get<double>(), e[1].get<double>()));
      } else {
        throw parse_error("pole list: bad entry " + e.dump());
      }
    }
    if (!out.conjugation_closed()) throw parse_error("pole list: not closed under complex conjugation");
    return out;
  }

  static PoleList from_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw error("cannot open pole file '" + path + "'");
    nlohmann::json j;
    try {
      is >> j;
    } catch (const nlohmann::json::exception& e) {
      throw parse_error("pole file '" + path + "': " + e.what());
    }
    return from_json(j);
  }

 private:
  std::vector<Pole> poles_;
};

struct KrylovBasis {
  Matrix W;
  Eigen::Index n = 0, b = 0, k = 0;
  std::vector<Eigen::Index> block_dims;  // columns contributed by the start block and each step
  Eigen::Index deflated = 0;             // candidate columns dropped

  Eigen::Index dim() const { return W.cols(); }
};

/// Continuation candidates whose orthogonalized part is smaller than this
/// (relative to their own norm) are treated as already in the space.
inline constexpr double kArnoldiFloor = 1e-13;

/// Block rational Arnoldi with full reorthogonalization and deflation.
/// The start block deflates relative to ||Z||_F; later candidates relative to
/// their own norm, with threshold max(defl_tol, kArnoldiFloor).  A caller that
/// already holds the eigendecomposition of D can pass it in.
inline KrylovBasis rational_arnoldi(const Matrix& D, const Matrix& Z, const PoleList& poles, double defl_tol,
                                   const SymmetricEig* known_eig = nullptr) {
  if (D.rows() != D.cols()) throw shape_error("rational_arnoldi: D must be square");
  if (Z.rows() != D.rows())
    throw shape_error("rational_arnoldi: Z has " + std::to_string(Z.rows()) + " rows, D has " +
                      std::to_string(D.rows()));
  if (defl_tol < 0.0) throw contract_error("rational_arnoldi: defl_tol must be nonnegative");
  KrylovBasis out;
  out.n = D.rows();
  out.b = Z.cols();
  out.k = static_cast<Eigen::Index>(poles.size());
  const auto plan = poles.pair_up();
  if (!plan.ok) throw contract_error("rational_arnoldi: pole list is not closed under complex conjugation");

  Matrix W = orthonormalize(Z, defl_tol).Q;
  out.block_dims.push_back(W.cols());
  out.deflated += Z.cols() - W.cols();
  if (W.cols() == 0 || poles.empty()) {
    out.W = W;
    return out;
  }

  std::optional<SymmetricEig> own;
  if (!known_eig) own.emplace(D);
  const SymmetricEig& eig = known_eig ? *known_eig : *own;
  double scale = 0.0;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) scale = std::max(scale, std::abs(eig.values(i)));
  scale = std::max(scale, std::numeric_limits<double>::min());

  auto shifted_solve = [&](const Cplx& xi, const Matrix& C) -> CMatrix {
    const double gap = (eig.values.cast<Cplx>().array() - xi).abs().minCoeff();
    if (gap <= 1e-14 * scale)
      throw pole_collision_error("rational_arnoldi: pole " + Pole{xi, false}.str() +
                                 " coincides with an eigenvalue of the shifted matrix (distance " +
                                 format_double(gap) + ")");
    CMatrix Y = (eig.vectors.transpose() * C).cast<Cplx>();
    for (Eigen::Index i = 0; i < Y.rows(); ++i) Y.row(i) /= (eig.values(i) - xi);
    return eig.vectors.cast<Cplx>() * Y;
  };

  // Partial-fraction continuation: a pole seen for the first time acts on the
  // start block, a repeated pole (or infinity) on the block it produced last.
  const double tol = std::max(defl_tol, kArnoldiFloor);
  const Matrix start = W;
  std::vector<std::pair<Pole, Matrix>> last;
  auto continuation = [&](const Pole& p) -> const Matrix& {
    for (const auto& [q, blk] : last)
      if (q.infinite == p.infinite && (p.infinite || q.value == p.value)) return blk;
    return start;
  };
  for (const auto& [idx, partner] : plan.steps) {
    if (W.cols() >= out.n) break;
    const Pole& p = poles[idx];
    const Matrix& cont = continuation(p);
    Matrix cand;
    if (p.infinite) {
      cand = D * cont;
    } else if (partner < 0) {
      cand = shifted_solve(p.value, cont).real();
    } else {
      const CMatrix X = shifted_solve(p.value, cont);
      cand.resize(out.n, 2 * cont.cols());
      cand << X.real(), X.imag();
    }
    for (Eigen::Index j = 0; j < cand.cols(); ++j) {
      const double nj = cand.col(j).norm();
      if (nj > 0.0) cand.col(j) /= nj;
    }
    Matrix fresh = orthonormalize_against(W, cand, tol);
    out.deflated += cand.cols() - fresh.cols();
    out.block_dims.push_back(fresh.cols());
    if (fresh.cols() == 0) continue;
    Matrix grown(out.n, W.cols() + fresh.cols());
    grown << W, fresh;
    W = std::move(grown);
    bool seen = false;
    for (auto& [q, blk] : last)
      if (q.infinite == p.infinite && (p.infinite || q.value == p.value)) {
        blk = fresh;
        seen = true;
      }
    if (!seen) last.emplace_back(p, fresh);
  }
  out.W = std::move(W);
  return out;
}

/// sin of the largest principal angle between span(A) and span(B); 1 when the
/// dimensions differ.
inline double subspace_distance(const Matrix& A, const Matrix& B) {
  if (A.cols() != B.cols()) return 1.0;
  if (A.cols() == 0) return 0.0;
  const Matrix Qa = orthonormalize(A, 0.0).Q, Qb = orthonormalize(B, 0.0).Q;
  if (Qa.cols() != Qb.cols()) return 1.0;
  const Matrix R1 = Qb - Qa * (Qa.transpose() * Qb);
  const Matrix R2 = Qa - Qb * (Qb.transpose() * Qa);
  return std::max(norm2(R1), norm2(R2));
}

struct BlockDiagReport {
  Eigen::Index dim_blockwise = 0;
  Eigen::Index dim_monolithic = 0;
  double distance = 0.0;
};

/// Compares blkdiag of per-block bases with the basis of the assembled
/// block-diagonal problem.
inline BlockDiagReport check_blockdiag_property(const std::vector<Matrix>& Ds, const std::vector<Matrix>& Zs,
                                                const PoleList& poles, double defl_tol = 0.0) {
  if (Ds.size() != Zs.size()) throw shape_error("check_blockdiag_property: block counts differ");
  std::vector<Matrix> Ws;
  for (std::size_t i = 0; i < Ds.size(); ++i) Ws.push_back(rational_arnoldi(Ds[i], Zs[i], poles, defl_tol).W);
  std::vector<const Matrix*> pd, pz, pw;
  for (std::size_t i = 0; i < Ds.size(); ++i) {
    pd.push_back(&Ds[i]);
    pz.push_back(&Zs[i]);
    pw.push_back(&Ws[i]);
  }
  const Matrix Wb = blkdiag(pw);
  const Matrix Wm = rational_arnoldi(blkdiag(pd), blkdiag(pz), poles, defl_tol).W;
  return {Wb.cols(), Wm.cols(), subspace_distance(Wb, Wm)};
}

}  // namespace hssfun
