// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hssfun/experiment.hpp"

using namespace hssfun;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void guarded(int id, const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

double num(const Record& r, const char* key) { return r.at(key).get<double>(); }

ExperimentSpec base(const std::string& function, const std::string& matrix, Eigen::Index n) {
  ExperimentSpec s;
  s.function = function;
  s.matrix = matrix;
  s.n = n;
  s.threshold = 256;
  s.tol = 1e-12;
  s.eps = 1e-8;
  s.check_dense = true;
  return s;
}

double spread(const Vector& v) { return std::max(std::abs(v.minCoeff()), std::abs(v.maxCoeff())); }

// ------------------------------------------------------------------ 1-5

void inverse_exactness() {
  const Record r = run_experiment(base("invert", "laplacian", 1024));
  const double err = num(r, "err");
  const double t = num(r, "time_total_s") - num(r, "time_dense_check_s");
  report(1, "Laplacian inverse n=1024", err <= 1e-10 && t < 10.0,
         "err " + sci(err) + " (<= 1e-10), " + sci(t) + " s (< 10 s)");
}

void fractional_inverse() {
  ExperimentSpec s = base("invert", "glfrac", 1024);
  s.alpha = 1.5;
  const Record r = run_experiment(s);
  const auto rank = r.at("hss_rank_in").get<Eigen::Index>();
  const double err = num(r, "err");
  report(2, "GL fractional inverse n=1024", rank >= 24 && rank <= 35 && err <= 1e-9,
         "hss rank " + std::to_string(rank) + " (in [24, 35]), err " + sci(err) + " (<= 1e-9)");
}

void matrix_exponential() {
  std::vector<double> errs;
  std::string detail;
  bool ok = true;
  for (int a : {0, 2, 4}) {
    ExperimentSpec s = base("expm", "tridiag", 1024);
    s.spectrum = "uniform:-1e" + std::to_string(a) + ":0";
    const Record r = run_experiment(s);
    const double err = num(r, "err");
    errs.push_back(err);
    ok = ok && err <= 1e-7;
    detail += "a=" + std::to_string(a) + " k=" + std::to_string(r.at("k").get<int>()) + " err " + sci(err) + "; ";
  }
  const double growth = errs.back() / errs.front();
  ok = ok && growth <= 100.0;
  detail += "err(a=4)/err(a=0) " + sci(growth) + " (<= 100), err(a=2)/err(a=0) " + sci(errs[1] / errs[0]);
  report(3, "matrix exponential, uniform spectra", ok, detail);
}

void inverse_sqrt() {
  ExperimentSpec s = base("invsqrt", "laplacian", 1024);
  s.poles = "50";
  const Record r = run_experiment(s);
  const double err = num(r, "err");
  report(4, "Laplacian inverse square root, 50 poles", err <= 1e-9, "err " + sci(err) + " (<= 1e-9)");
}

void sign_function() {
  ExperimentSpec s = base("sign", "tridiag", 1024);
  s.spectrum = "logsym:-3";
  const Record r3 = run_experiment(s);
  s.spectrum = "logsym:-9";
  const Record r9 = run_experiment(s);
  const double e3 = num(r3, "err"), e9 = num(r9, "err");
  const bool c3 = r3.at("converged").get<bool>(), c9 = r9.at("converged").get<bool>();
  const bool ok3 = e3 <= 1e-7, ok9 = e9 > 1e-3 && !c9;
  report(5, "sign function, log-spaced spectra", ok3 && ok9,
         "a=-3: k=" + std::to_string(r3.at("k").get<int>()) + " err " + sci(e3) + " (<= 1e-7)" +
             (c3 ? " converged" : " not converged") + "; a=-9: err " + sci(e9) + " (> 1e-3), " +
             (c9 ? "converged (expected flag)" : "flagged not converged"));
}

// ------------------------------------------------------------------ 6

// Random SPD-or-indefinite symmetric HSS matrix together with its dense form.
struct RandomCase {
  HssMatrix H;
  Matrix A;
  Vector eigs;
};

RandomCase random_case(Rng& rng, bool spd) {
  std::uniform_int_distribution<Eigen::Index> nd(64, 512), rd(1, 8);
  std::uniform_int_distribution<int> td(0, 2);
  const Eigen::Index n = nd(rng), t = Eigen::Index{16} << td(rng);
  RandomCase c{random_hss(ClusterTree::build(n, t), rd(rng), rng, true), Matrix(), Vector()};
  c.A = hss_to_dense(c.H);
  c.eigs = Eigen::SelfAdjointEigenSolver<Matrix>(c.A, Eigen::EigenvaluesOnly).eigenvalues();
  if (spd) {
    const double shift = 1.0 - c.eigs.minCoeff() + 0.01 * spread(c.eigs);
    shift_diagonal(c.H, shift);
    c.A.diagonal().array() += shift;
    c.eigs.array() += shift;
  }
  return c;
}

MatFunRequest request_for(const HssMatrix& H, const ScalarFunction& f, const PoleList& poles) {
  return {from_hss(H), f, poles, 0.0, std::nullopt, std::nullopt};
}

void error_bound_suite() {
  Rng rng(2024);
  double worst_exact = 0.0, worst_ratio = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const RandomCase c = random_case(rng, false);
    const double lo = c.eigs.minCoeff(), hi = c.eigs.maxCoeff(), w = hi - lo;
    // Real poles outside the spectrum plus one conjugate pair.
    std::uniform_real_distribution<double> u(0.1, 1.0), coef(-1.0, 1.0);
    PoleList poles{Pole::real(lo - u(rng) * w), Pole::real(hi + u(rng) * w)};
    const double re = lo + u(rng) * w, im = u(rng) * w;
    poles.push_back(Pole::complex(re, im));
    poles.push_back(Pole::complex(re, -im));
    const double c0 = coef(rng), c1 = coef(rng);
    const Cplx cp(coef(rng), coef(rng));
    const double x0 = poles[0].value.real(), x1 = poles[1].value.real();
    const Cplx xi = poles[2].value;
    const ScalarFunction r = fn::custom("rational", {Interval{}}, [=](double x) {
      return c0 / (x - x0) + c1 / (x - x1) + 2.0 * (cp / (Cplx(x, 0.0) - xi)).real();
    });
    const Matrix R = to_dense(matfun_telescopic(request_for(c.H, r, poles)));
    worst_exact = std::max(worst_exact, rel_fro_error(R, matfun_dense(c.A, r)));

    const RandomCase s = random_case(rng, true);
    const double a = s.eigs.minCoeff(), b = s.eigs.maxCoeff();
    const PoleList mp = poles_markov(4, a, b);
    const Matrix F = to_dense(matfun_telescopic(request_for(s.H, fn::invsqrt(), mp)));
    const double measured = norm2(F - matfun_dense(s.A, fn::invsqrt()));
    const double bound = 4.0 * std::max(s.H.tree.depth(), 1) * sampled_fit_error(fn::invsqrt(), mp, fit_grid({{a, b}}));
    worst_ratio = std::max(worst_ratio, measured / (1.1 * bound));
  }
  report(6, "error bound property suite (20 random HSS)", worst_exact <= 1e-9 && worst_ratio <= 1.0,
         "rational f worst rel err " + sci(worst_exact) + " (<= 1e-9); invsqrt worst err/(1.1*bound) " +
             sci(worst_ratio) + " (<= 1)");
}

// ------------------------------------------------------------------ 7

void conversion_suite() {
  Rng rng(77);
  std::uniform_int_distribution<Eigen::Index> nd(16, 512), rd(1, 10);
  std::uniform_int_distribution<int> td(0, 3);
  double chain1 = 0.0, chain2 = 0.0, blocks = 0.0, idem = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = nd(rng), t = Eigen::Index{8} << td(rng);
    const bool sym = trial % 2 == 0;
    const HssMatrix H = random_hss(ClusterTree::build(n, t), rd(rng), rng, sym);
    const Matrix A = hss_to_dense(H);
    const TelescopicDecomposition T = from_hss(H);
    chain1 = std::max(chain1, rel_fro_error(to_dense(T), A));
    chain2 = std::max(chain2, rel_fro_error(hss_to_dense(to_hss(to_standard(T))), A));
    for (const auto& [leaf, blk] : principal_submatrices(T)) {
      const Range r = T.tree.range(leaf);
      blocks = std::max(blocks, rel_fro_error(blk, A.block(r.lo, r.lo, r.size(), r.size())));
    }
    const TelescopicDecomposition N = random_telescopic(ClusterTree::build(n, t), rd(rng), rng, sym);
    const TelescopicDecomposition S1 = to_standard(N), S2 = to_standard(S1);
    double num2 = 0.0, den = 0.0;
    for (std::size_t i = 0; i < S1.D.size(); ++i) {
      num2 += (S2.D[i] - S1.D[i]).squaredNorm();
      den += S1.D[i].squaredNorm();
    }
    idem = std::max(idem, std::sqrt(num2 / den));
  }
  const bool ok = chain1 <= 1e-11 && chain2 <= 1e-11 && blocks <= 1e-11 && idem <= 1e-13;
  report(7, "conversion suite (50 random HSS)", ok,
         "from_hss->to_dense " + sci(chain1) + ", ->to_standard->to_hss " + sci(chain2) + ", principal blocks " +
             sci(blocks) + " (each <= 1e-11); to_standard idempotence " + sci(idem) + " (<= 1e-13)");
}

// ------------------------------------------------------------------ 8

void krylov_suite() {
  Rng rng(5);
  std::normal_distribution<double> g;
  double ortho = 0.0, exact = 0.0, blockdiag = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 40 + 10 * trial, b = 1 + trial % 3;
    const Matrix D = random_symmetric(n, rng);
    const Matrix Z = random_matrix(n, b, rng);
    const double s = spread(Eigen::SelfAdjointEigenSolver<Matrix>(D, Eigen::EigenvaluesOnly).eigenvalues());
    PoleList poles{Pole::real(-2.0 * s - 1.0), Pole::inf(), Pole::complex(0.3, 0.5), Pole::complex(0.3, -0.5),
                   Pole::real(3.0 * s + 1.0)};
    const KrylovBasis K = rational_arnoldi(D, Z, poles, 0.0);
    const Matrix& W = K.W;
    const double d = static_cast<double>(K.dim());
    ortho = std::max(ortho, (W.transpose() * W - Matrix::Identity(K.dim(), K.dim())).norm() / d);
    for (std::size_t j = 0; j < poles.size(); ++j) {
      const Pole& p = poles[j];
      if (p.infinite) continue;
      const CMatrix Y = (D.cast<Cplx>() - p.value * CMatrix::Identity(n, n)).partialPivLu().solve(Z.cast<Cplx>());
      const CMatrix Wc = W.cast<Cplx>();
      exact = std::max(exact, (Y - Wc * (Wc.adjoint() * Y)).norm() / Y.norm());
    }

    std::vector<Matrix> Ds, Zs;
    for (int blk = 0; blk < 3; ++blk) {
      Ds.push_back(random_symmetric(12 + 3 * blk, rng));
      Zs.push_back(random_matrix(12 + 3 * blk, 1, rng));
    }
    const PoleList bp{Pole::real(-20.0), Pole::complex(0.0, 2.0), Pole::complex(0.0, -2.0), Pole::inf()};
    const BlockDiagReport rep = check_blockdiag_property(Ds, Zs, bp);
    blockdiag = std::max(blockdiag, rep.dim_blockwise == rep.dim_monolithic ? rep.distance : 1.0);
  }
  report(8, "rational Krylov suite", ortho <= 1e-12 && exact <= 1e-10 && blockdiag <= 1e-10,
         "||W^T W - I||/d " + sci(ortho) + " (<= 1e-12), pole residual " + sci(exact) +
             ", block-diagonal subspace distance " + sci(blockdiag) + " (<= 1e-10)");
}

// ------------------------------------------------------------------ 9

void complexity_smoke() {
  std::vector<double> times;
  std::string detail;
  for (Eigen::Index n : {4096, 8192, 16384}) {
    ExperimentSpec s = base("invsqrt", "laplacian", n);
    s.check_dense = false;
    s.convert = false;
    s.poles = "20";
    double best = kInf;
    for (int rep = 0; rep < 3; ++rep) best = std::min(best, num(run_experiment(s), "time_matfun_s"));
    times.push_back(best);
    detail += "n=" + std::to_string(n) + " " + sci(best) + " s; ";
  }
  const double r1 = times[1] / times[0], r2 = times[2] / times[1];
  detail += "ratios " + sci(r1) + ", " + sci(r2) + " (<= 3)";
  report(9, "complexity smoke test, invsqrt with k=20", r1 <= 3.0 && r2 <= 3.0, detail);
}

}  // namespace

int main() {
  guarded(1, "Laplacian inverse n=1024", inverse_exactness);
  guarded(2, "GL fractional inverse n=1024", fractional_inverse);
  guarded(3, "matrix exponential, uniform spectra", matrix_exponential);
  guarded(4, "Laplacian inverse square root, 50 poles", inverse_sqrt);
  guarded(5, "sign function, log-spaced spectra", sign_function);
  guarded(6, "error bound property suite (20 random HSS)", error_bound_suite);
  guarded(7, "conversion suite (50 random HSS)", conversion_suite);
  guarded(8, "rational Krylov suite", krylov_suite);
  guarded(9, "complexity smoke test, invsqrt with k=20", complexity_smoke);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
