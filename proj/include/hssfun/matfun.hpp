#pragma once

// f(A) for a symmetric matrix in standard telescopic form.
//
// Bottom-up over the tree: every node keeps a compressed diagonal block
// Dt_tau and a factor Z_tau, builds a rational Krylov basis W_tau for
// (Dt_tau, Z_tau), and stores C_tau = f(Dt_tau) - W f(W^T Dt W) W^T.  The
// parent assembles its own Dt, Z from the children's W^T Dt W and W^T Z.  The
// output {W_tau, C_tau} is a symmetric telescopic decomposition of an
// approximation to f(A).

#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "dense.hpp"
#include "errors.hpp"
#include "hss.hpp"
#include "rational_fit.hpp"
#include "rational_krylov.hpp"
#include "telescopic.hpp"

namespace hssfun {

struct MatFunRequest {
  TelescopicDecomposition decomposition;
  ScalarFunction f;
  PoleList poles;
  double defl_tol = 0.0;
  std::optional<std::pair<double, double>> spectrum_bounds;
  /// Open interval the spectrum is assumed to avoid (sign on [-b,-a] u [a,b]).
  /// Compressed eigenvalues falling inside are counted, not rejected.
  std::optional<std::pair<double, double>> spectral_gap;
};

struct LevelDiagnostics {
  int depth = 0;
  Eigen::Index nodes = 0;
  Eigen::Index max_block = 0;     // largest Dt_tau
  Eigen::Index max_basis = 0;     // largest W_tau
  Eigen::Index total_basis = 0;
  Eigen::Index deflated = 0;
  Eigen::Index gap_violations = 0;
  double krylov_s = 0.0;
  double feval_s = 0.0;
};

struct MatFunDiagnostics {
  std::vector<LevelDiagnostics> levels;  // indexed by depth
  Eigen::Index max_basis = 0;
  Eigen::Index deflated = 0;
  Eigen::Index gap_violations = 0;
  double krylov_s = 0.0;
  double feval_s = 0.0;
  double total_s = 0.0;

  nlohmann::json to_json() const {
    nlohmann::json lv = nlohmann::json::array();
    for (const auto& l : levels)
      lv.push_back({{"depth", l.depth},
                    {"nodes", l.nodes},
                    {"max_block", l.max_block},
                    {"max_basis", l.max_basis},
                    {"total_basis", l.total_basis},
                    {"deflated", l.deflated},
                    {"gap_violations", l.gap_violations},
                    {"krylov_s", l.krylov_s},
                    {"feval_s", l.feval_s}});
    return {{"max_basis", max_basis}, {"deflated", deflated},   {"gap_violations", gap_violations},
            {"krylov_s", krylov_s},   {"feval_s", feval_s},     {"total_s", total_s},
            {"levels", lv}};
  }
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline Eigen::Index count_in_gap(const Vector& values, const std::optional<std::pair<double, double>>& gap) {
  if (!gap) return 0;
  Eigen::Index c = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) c += (values(i) > gap->first && values(i) < gap->second) ? 1 : 0;
  return c;
}

inline std::string node_label(Eigen::Index node) {
  return "node " + ClusterTree::id_of(node).str() + " (level " + std::to_string(ClusterTree::depth_of(node)) + ")";
}

/// f applied through an eigendecomposition, rethrowing domain errors with the node.
inline Matrix apply_at(const SymmetricEig& eig, const ScalarFunction& f, Eigen::Index node) {
  try {
    return eig.apply(f);
  } catch (const domain_error& e) {
    throw domain_error("matfun: " + node_label(node) + ": " + e.what());
  }
}

}  // namespace detail

/// f(D) + W (f(W^T A W) - f(W^T D W)) W^T for A = D + Z A_small Z^T, with W the
/// rational Krylov basis of (D, Z).  Exact when f is rational with these poles.
inline Matrix low_rank_update_matfun(const Matrix& D, const Matrix& Z, const Matrix& A_small, const ScalarFunction& f,
                                     const PoleList& poles, double defl_tol) {
  require_symmetric(D, "low_rank_update_matfun: D");
  require_symmetric(A_small, "low_rank_update_matfun: A_small");
  if (Z.rows() != D.rows() || A_small.rows() != Z.cols())
    throw shape_error("low_rank_update_matfun: D, Z, A_small shapes do not match");
  const SymmetricEig eig(D);
  const Matrix fD = eig.apply(f);
  const KrylovBasis K = rational_arnoldi(D, Z, poles, defl_tol, &eig);
  if (K.dim() == 0) return fD;
  const Matrix& W = K.W;
  const Matrix Dw = symmetrize(W.transpose() * D * W);
  const Matrix P = W.transpose() * Z;
  const Matrix Aw = symmetrize(Dw + P * A_small * P.transpose());
  return symmetrize(fD + W * (matfun_dense(Aw, f) - matfun_dense(Dw, f)) * W.transpose());
}

/// Bottom-up evaluation of f on a standard symmetric telescopic decomposition.
inline TelescopicDecomposition matfun_telescopic(const MatFunRequest& req, MatFunDiagnostics* diag = nullptr) {
  const TelescopicDecomposition& A = req.decomposition;
  if (!A.symmetric) throw contract_error("matfun_telescopic: decomposition must be symmetric");
  if (!A.standard) throw contract_error("matfun_telescopic: decomposition must be standard");
  if (req.defl_tol < 0.0) throw contract_error("matfun_telescopic: defl_tol must be nonnegative");
  if (!req.poles.conjugation_closed())
    throw contract_error("matfun_telescopic: pole list is not closed under complex conjugation");
  A.validate();

  const auto t_start = detail::Clock::now();
  const ClusterTree& tree = A.tree;
  const int L = tree.depth();
  const auto count = static_cast<std::size_t>(tree.node_count());
  MatFunDiagnostics dg;
  dg.levels.resize(static_cast<std::size_t>(L + 1));

  TelescopicDecomposition out(tree);
  out.symmetric = true;
  out.standard = false;

  std::vector<Matrix> Dt(count), Zt(count);   // compressed block and factor at tau
  std::vector<Matrix> DW(count), PW(count);   // W^T Dt W and W^T Z handed to the parent

  for (int l = L; l >= 0; --l) {
    auto& lv = dg.levels[static_cast<std::size_t>(l)];
    lv.depth = l;
    for (Eigen::Index i : tree.nodes_at_depth(l)) {
      const auto s = static_cast<std::size_t>(i);
      lv.nodes += 1;
      if (tree.is_leaf(i)) {
        Dt[s] = A.d(i);
        if (i != 0) Zt[s] = A.u(i);
      } else {
        const auto a = static_cast<std::size_t>(ClusterTree::left(i)), b = static_cast<std::size_t>(ClusterTree::right(i));
        const Matrix P = blkdiag(PW[a], PW[b]);
        Dt[s] = symmetrize(blkdiag(DW[a], DW[b]) + P * A.d(i) * P.transpose());
        if (i != 0) Zt[s] = P * A.u(i);
        for (std::size_t c : {a, b}) {
          Dt[c].resize(0, 0);
          DW[c].resize(0, 0);
          PW[c].resize(0, 0);
        }
      }
      lv.max_block = std::max(lv.max_block, Dt[s].rows());

      auto t0 = detail::Clock::now();
      const SymmetricEig eig(Dt[s]);
      lv.gap_violations += detail::count_in_gap(eig.values, req.spectral_gap);
      if (i == 0) {
        out.D[s] = detail::apply_at(eig, req.f, i);
        lv.feval_s += detail::seconds_since(t0);
        continue;
      }
      Matrix fD = detail::apply_at(eig, req.f, i);
      lv.feval_s += detail::seconds_since(t0);

      t0 = detail::Clock::now();
      KrylovBasis K;
      try {
        K = rational_arnoldi(Dt[s], Zt[s], req.poles, req.defl_tol, &eig);
      } catch (const pole_collision_error& e) {
        throw pole_collision_error("matfun: " + detail::node_label(i) + ": " + e.what());
      }
      const Matrix& W = K.W;
      DW[s] = symmetrize(W.transpose() * Dt[s] * W);
      PW[s] = W.transpose() * Zt[s];
      lv.krylov_s += detail::seconds_since(t0);
      lv.max_basis = std::max(lv.max_basis, K.dim());
      lv.total_basis += K.dim();
      lv.deflated += K.deflated;

      t0 = detail::Clock::now();
      if (K.dim() > 0) {
        const SymmetricEig small(DW[s]);
        lv.gap_violations += detail::count_in_gap(small.values, req.spectral_gap);
        fD -= W * detail::apply_at(small, req.f, i) * W.transpose();
      }
      out.D[s] = symmetrize(fD);
      out.U[s] = W;
      lv.feval_s += detail::seconds_since(t0);
      Zt[s].resize(0, 0);
    }
  }

  for (const auto& lv : dg.levels) {
    dg.max_basis = std::max(dg.max_basis, lv.max_basis);
    dg.deflated += lv.deflated;
    dg.gap_violations += lv.gap_violations;
    dg.krylov_s += lv.krylov_s;
    dg.feval_s += lv.feval_s;
  }
  dg.total_s = detail::seconds_since(t_start);
  if (diag) *diag = std::move(dg);
  return out;
}

/// HSS in, HSS out: from_hss, matfun_telescopic, to_standard, to_hss.
inline HssMatrix matfun_hss(const HssMatrix& H, const ScalarFunction& f, const PoleList& poles, double defl_tol,
                            MatFunDiagnostics* diag = nullptr) {
  if (!H.symmetric) throw contract_error("matfun_hss: H must be symmetric");
  MatFunRequest req{from_hss(H), f, poles, defl_tol, std::nullopt, std::nullopt};
  return to_hss(to_standard(matfun_telescopic(req, diag)));
}

/// 4 L times the sampled sup error of the least-squares fit of f with the
/// given poles on the intervals (grid_size points in total).
inline double error_bound_estimate(const ScalarFunction& f, const PoleList& poles,
                                   const std::vector<FitInterval>& intervals, int L, int grid_size = 10000) {
  if (L < 0) throw contract_error("error_bound_estimate: L must be nonnegative");
  return 4.0 * L * sampled_fit_error(f, poles, fit_grid(intervals, grid_size));
}

inline double error_bound_estimate(const ScalarFunction& f, const PoleList& poles, double lambda_min,
                                   double lambda_max, int L, int grid_size = 10000) {
  return error_bound_estimate(f, poles, {{lambda_min, lambda_max}}, L, grid_size);
}

}  // namespace hssfun
