#pragma once

// Experiment driver behind the hssfun command line tool: build a test matrix,
// compress it, choose poles, run matfun and report one flat record.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "cluster_tree.hpp"
#include "dense.hpp"
#include "errors.hpp"
#include "generators.hpp"
#include "hss.hpp"
#include "matfun.hpp"
#include "poles.hpp"
#include "rational_fit.hpp"
#include "serialization.hpp"
#include "spectrum.hpp"
#include "telescopic.hpp"

namespace hssfun {

inline constexpr Eigen::Index kMaxDenseCheck = 8192;

struct ExperimentSpec {
  std::string function = "invert";  // invert | expm | invsqrt | sign | custom
  std::string custom_fn;            // fn::by_name id, for custom
  std::string matrix = "laplacian";  // laplacian | glfrac | tridiag | gmrf_like | csv:PATH
  Eigen::Index n = 1024;
  double alpha = 1.5;
  std::string spectrum;  // tridiag: PATH, uniform:LO:HI or logsym:A
  std::string poles = "auto";  // auto | K | json:PATH
  double eps = 1e-8;
  Eigen::Index threshold = 256;
  double tol = 1e-12;  // compression
  std::optional<double> defl_tol;  // default eps / 100
  int markov_cap = 60;
  int sign_cap = 17;     // conjugate pairs
  int custom_cap = 60;   // AAA degree
  bool check_dense = false;
  bool convert = true;   // to_standard + to_hss on the result
  std::uint64_t seed = 0;
  std::string save;      // json:PATH for the result

  void validate() const {
    static const std::vector<std::string> fns{"invert", "expm", "invsqrt", "sign", "custom"};
    if (std::find(fns.begin(), fns.end(), function) == fns.end())
      throw contract_error("unknown function '" + function + "'");
    if (function == "custom" && custom_fn.empty()) throw contract_error("custom needs a function name (--fn)");
    if (matrix.rfind("csv:", 0) != 0 && matrix != "laplacian" && matrix != "glfrac" && matrix != "tridiag" &&
        matrix != "gmrf_like")
      throw contract_error("unknown matrix '" + matrix + "'");
    if (n < 2 && matrix.rfind("csv:", 0) != 0) throw contract_error("n must be at least 2");
    if (matrix == "tridiag" && spectrum.empty()) throw contract_error("tridiag needs --spectrum");
    if (!(eps > 0.0 && eps < 1.0)) throw contract_error("eps must lie in (0, 1)");
    if (threshold < 1) throw contract_error("threshold must be positive");
    if (!(tol >= 0.0)) throw contract_error("tol must be nonnegative");
    if (defl_tol && !(*defl_tol >= 0.0)) throw contract_error("defl_tol must be nonnegative");
    if (markov_cap < 1 || sign_cap < 1 || custom_cap < 1) throw contract_error("pole caps must be positive");
    if (check_dense && n > kMaxDenseCheck && matrix.rfind("csv:", 0) != 0)
      throw contract_error("check_dense is limited to n <= " + std::to_string(kMaxDenseCheck));
    if (!save.empty() && save.rfind("json:", 0) != 0) throw contract_error("save target must be json:PATH");
  }
};

/// Flat report.  Keys keep insertion order so CSV columns and JSON members
/// line up; null marks a value that was not computed.
using Record = nlohmann::ordered_json;

namespace detail {

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw parse_error(what + ": '" + s + "' is not a number");
  }
}

inline std::vector<double> read_numbers(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw error("cannot open spectrum file '" + path + "'");
  std::vector<double> v;
  std::string tok;
  while (is >> tok) {
    std::replace(tok.begin(), tok.end(), ',', ' ');
    std::istringstream parts(tok);
    std::string p;
    while (parts >> p) v.push_back(parse_double(p, "spectrum file '" + path + "'"));
  }
  if (v.empty()) throw parse_error("spectrum file '" + path + "' is empty");
  return v;
}

inline std::vector<double> make_spectrum(const std::string& s, Eigen::Index n) {
  if (s.rfind("uniform:", 0) == 0) {
    const auto rest = s.substr(8);
    const auto c = rest.find(':');
    if (c == std::string::npos) throw parse_error("spectrum: expected uniform:LO:HI");
    return uniform_spectrum(n, parse_double(rest.substr(0, c), "spectrum"), parse_double(rest.substr(c + 1), "spectrum"));
  }
  if (s.rfind("logsym:", 0) == 0) return logsym_spectrum(n, parse_double(s.substr(7), "spectrum"));
  return read_numbers(s);
}

struct Spectral {
  double lo = 0.0, hi = 0.0;  // enclosing interval
  double min_abs = 0.0;       // smallest |eigenvalue| (0 if unknown / singular)
  bool exact = false;
};

struct BuiltMatrix {
  HssMatrix H;
  Matrix dense;  // only kept for the dense check
  std::optional<Spectral> known;
  std::string label;
};

inline BuiltMatrix build_matrix(const ExperimentSpec& s, bool keep_dense) {
  const double tol = s.tol;
  BuiltMatrix out{HssMatrix(ClusterTree::build(2, 1)), Matrix(), std::nullopt, s.matrix};
  auto from_sparse = [&](const SparseMatrix& A) {
    out.H = compress_sparse(A, ClusterTree::build(A.rows(), s.threshold), tol, true);
    if (keep_dense) out.dense = Matrix(A);
  };
  auto from_dense = [&](Matrix A) {
    out.H = compress_dense(A, ClusterTree::build(A.rows(), s.threshold), tol, true);
    if (keep_dense) out.dense = std::move(A);
  };
  if (s.matrix == "laplacian") {
    from_sparse(laplacian_sparse(s.n));
    const auto [lo, hi] = laplacian_spectrum_bounds(s.n);
    out.known = Spectral{lo, hi, lo, true};
  } else if (s.matrix == "glfrac") {
    from_dense(gen_gl_fractional(s.n, s.alpha));
    out.label += ":" + format_double(s.alpha);
  } else if (s.matrix == "tridiag") {
    const auto eigs = make_spectrum(s.spectrum, s.n);
    if (static_cast<Eigen::Index>(eigs.size()) != s.n)
      throw contract_error("spectrum has " + std::to_string(eigs.size()) + " values, n is " + std::to_string(s.n));
    from_sparse(tridiag_spectrum_sparse(eigs, s.seed));
    Spectral sp{*std::min_element(eigs.begin(), eigs.end()), *std::max_element(eigs.begin(), eigs.end()), kInf, true};
    for (double e : eigs) sp.min_abs = std::min(sp.min_abs, std::abs(e));
    out.known = sp;
    out.label += ":" + s.spectrum;
  } else if (s.matrix == "gmrf_like") {
    from_sparse(gmrf_like_sparse(s.n, s.seed));
  } else {
    Matrix A = read_csv_matrix(s.matrix.substr(4));
    require_symmetric(A, "csv matrix");
    if (A.rows() > kMaxDenseCheck && keep_dense)
      throw contract_error("check_dense is limited to n <= " + std::to_string(kMaxDenseCheck));
    from_dense(std::move(A));
  }
  return out;
}

/// Lanczos estimates, with the small end refined through an exact inverse
/// when the function needs it.
inline Spectral estimate_spectral(const TelescopicDecomposition& T, bool need_small_end) {
  Spectral sp;
  const auto [rlo, rhi] = lanczos_extremes(T.size(), [&](const Matrix& X) { return telescopic_matvec(T, X); });
  const double w = std::max(rhi - rlo, 1e-300), margin = 0.05;
  sp.lo = rlo - margin * w;
  sp.hi = rhi + margin * w;
  if (!need_small_end) return sp;
  if (rlo > 0.0) {
    sp.lo = refine_lower_bound_spd(T);
    sp.min_abs = sp.lo;
  } else {
    sp.min_abs = smallest_magnitude_estimate(T);
  }
  return sp;
}

struct PoleChoice {
  ScalarFunction f;
  PoleList poles;
  std::string strategy;
  std::vector<FitInterval> intervals;
  std::optional<std::pair<double, double>> gap;
  double shift = 0.0;
  double f_sup = 1.0;
  double approx_error = 0.0;  // relative to f_sup
  bool converged = true;
};

inline bool is_integer(const std::string& s) {
  int v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

inline int explicit_k(const std::string& s) {
  const int k = std::stoi(s);
  if (k < 1) throw contract_error("pole count must be positive");
  return k;
}

inline double sup_on(const ScalarFunction& f, const std::vector<double>& grid) {
  double m = 0.0;
  for (double x : grid) m = std::max(m, std::abs(f(x)));
  return m;
}

inline PoleChoice choose_poles(const ExperimentSpec& s, const Spectral& sp, int L) {
  PoleChoice c;
  const std::string& p = s.poles;
  const bool is_auto = p == "auto", is_k = is_integer(p), is_file = p.rfind("json:", 0) == 0;
  if (!is_auto && !is_k && !is_file) throw contract_error("poles must be auto, an integer or json:PATH");
  const int Lc = std::max(L, 1);
  std::optional<double> fit_error;  // closed-form error when the strategy has one

  if (s.function == "invert") {
    c.f = fn::inv();
    if (sp.lo <= 0.0 && sp.hi >= 0.0) {
      if (!(sp.min_abs > 0.0)) throw domain_error("invert: spectrum estimate contains 0");
      c.intervals = {{sp.lo, -sp.min_abs}, {sp.min_abs, sp.hi}};
    } else {
      c.intervals = {{sp.lo, sp.hi}};
    }
    if (is_auto) {
      c.poles = PoleList{Pole::real(0.0)};
      c.strategy = "exact";
    } else if (is_k) {
      c.poles = PoleList{Pole::real(0.0)};
      for (int i = 1; i < explicit_k(p); ++i) c.poles.push_back(Pole::inf());
      c.strategy = "exact";
    }
  } else if (s.function == "expm") {
    c.f = fn::exp();
    c.shift = std::max(sp.hi, 0.0);
    c.intervals = {{sp.lo - c.shift, sp.hi - c.shift}};
    if (is_auto || is_k) {
      c.poles = poles_exp(is_auto ? pole_count_exp(s.eps, Lc) : explicit_k(p));
      c.strategy = "cf_exp";
    }
  } else if (s.function == "invsqrt") {
    c.f = fn::invsqrt();
    if (!(sp.lo > 0.0)) throw domain_error("invsqrt: matrix is not positive definite (lower bound " + format_double(sp.lo) + ")");
    c.intervals = {{sp.lo, sp.hi}};
    if (is_auto || is_k) {
      const int k = is_auto ? std::min(pole_count_markov(s.eps, Lc, sp.lo, sp.hi, 1.0 / std::sqrt(sp.lo)), s.markov_cap)
                            : explicit_k(p);
      c.poles = poles_markov(k, sp.lo, sp.hi);
      c.strategy = "zolotarev_markov";
    }
  } else if (s.function == "sign") {
    c.f = fn::sign();
    const double a = sp.min_abs, b = std::max(std::abs(sp.lo), std::abs(sp.hi));
    if (!(a > 0.0)) throw domain_error("sign: spectrum estimate contains 0");
    c.intervals = {{-b, -a}, {a, b}};
    c.gap = std::make_pair(-a, a);
    if (is_auto || is_k) {
      int pairs = 0;
      if (is_auto) {
        const SignPoleCount cnt = pole_count_sign(s.eps, a, b, s.sign_cap);
        pairs = cnt.pairs;
        fit_error = cnt.error;
      } else {
        pairs = explicit_k(p);
        fit_error = sign_approximation_error(pairs, a, b);
      }
      c.poles = poles_sign(pairs, a, b);
      c.strategy = "zolotarev_sign";
    }
  } else {
    c.f = fn::by_name(s.custom_fn);
    c.intervals = {{sp.lo, sp.hi}};
    if (is_auto || is_k) {
      const auto r = aaa(c.f, fit_grid(c.intervals, 2000), s.eps, is_auto ? s.custom_cap : explicit_k(p));
      c.poles = r.pole_list();
      c.strategy = "aaa";
      c.converged = r.converged;
    }
  }
  if (is_file) {
    c.poles = PoleList::from_json_file(p.substr(5));
    c.strategy = "file";
  }

  const auto grid = fit_grid(c.intervals);
  c.f_sup = std::max(sup_on(c.f, grid), std::numeric_limits<double>::min());
  c.approx_error = fit_error ? *fit_error : sampled_fit_error(c.f, c.poles, grid) / c.f_sup;
  c.converged = c.converged && c.approx_error <= s.eps;
  return c;
}

inline void scale_telescopic(TelescopicDecomposition& T, double c) {
  for (auto& D : T.D) D *= c;
}

}  // namespace detail

/// Runs one experiment.  Errors are rethrown with the experiment label.
inline Record run_experiment(const ExperimentSpec& s) {
  s.validate();
  const std::string label = s.function + "/" + s.matrix + "/n=" + std::to_string(s.n);
  try {
    Record rec;
    const auto t_all = detail::Clock::now();

    auto t0 = detail::Clock::now();
    detail::BuiltMatrix M = detail::build_matrix(s, s.check_dense);
    const double t_build = detail::seconds_since(t0);
    const Eigen::Index n = M.H.size();
    const int L = M.H.tree.depth();

    t0 = detail::Clock::now();
    TelescopicDecomposition T = from_hss(M.H);
    const double t_convert_in = detail::seconds_since(t0);

    t0 = detail::Clock::now();
    const bool small_end = s.function != "expm";
    const detail::Spectral sp = M.known ? *M.known : detail::estimate_spectral(T, small_end);
    const double t_bounds = detail::seconds_since(t0);

    t0 = detail::Clock::now();
    const detail::PoleChoice pc = detail::choose_poles(s, sp, L);
    const double t_poles = detail::seconds_since(t0);

    if (pc.shift != 0.0) {
      HssMatrix Hs = M.H;
      shift_diagonal(Hs, -pc.shift);
      T = from_hss(Hs);
    }

    MatFunRequest req{std::move(T), pc.f, pc.poles, s.defl_tol.value_or(s.eps / 100.0),
                      std::make_pair(sp.lo, sp.hi), pc.gap};
    MatFunDiagnostics dg;
    t0 = detail::Clock::now();
    TelescopicDecomposition R = matfun_telescopic(req, &dg);
    const double t_matfun = detail::seconds_since(t0);
    if (pc.shift != 0.0) detail::scale_telescopic(R, std::exp(pc.shift));

    Eigen::Index telescopic_rank_out = 0;
    for (Eigen::Index i = 1; i < R.tree.node_count(); ++i) telescopic_rank_out = std::max(telescopic_rank_out, R.u(i).cols());

    std::optional<HssMatrix> out_hss;
    double t_convert_out = 0.0;
    if (s.convert) {
      t0 = detail::Clock::now();
      out_hss = to_hss(to_standard(R));
      t_convert_out = detail::seconds_since(t0);
    }

    std::optional<double> err;
    double t_dense = 0.0;
    if (s.check_dense) {
      t0 = detail::Clock::now();
      const Matrix exact = matfun_dense(M.dense, pc.f);
      const Matrix approx = out_hss ? hss_to_dense(*out_hss) : to_dense(R);
      err = rel_fro_error(approx, exact);
      t_dense = detail::seconds_since(t0);
    }

    if (!s.save.empty()) {
      const std::string path = s.save.substr(5);
      if (out_hss) write_json_file(path, hss_to_json(*out_hss));
      else write_json_file(path, telescopic_to_json(R));
    }

    const double bound = 4.0 * std::max(L, 1) * pc.approx_error * pc.f_sup;
    rec["function"] = s.function == "custom" ? "custom:" + s.custom_fn : s.function;
    rec["matrix"] = M.label;
    rec["n"] = n;
    rec["threshold"] = s.threshold;
    rec["depth"] = L;
    rec["seed"] = s.seed;
    rec["eps"] = s.eps;
    rec["tol"] = s.tol;
    rec["defl_tol"] = req.defl_tol;
    rec["hss_rank_in"] = hss_rank(M.H, s.tol);
    rec["basis_rank_in"] = M.H.max_basis_rank();
    rec["pole_strategy"] = pc.strategy;
    rec["k"] = pc.poles.size();
    rec["lambda_min"] = sp.lo;
    rec["lambda_max"] = sp.hi;
    rec["min_abs_eig"] = sp.min_abs;
    rec["spectrum_exact"] = sp.exact;
    rec["shift"] = pc.shift;
    rec["telescopic_rank_out"] = telescopic_rank_out;
    rec["hss_rank_out"] = out_hss ? Record(out_hss->max_basis_rank()) : Record(nullptr);
    rec["max_basis"] = dg.max_basis;
    rec["deflated"] = dg.deflated;
    rec["gap_violations"] = dg.gap_violations;
    rec["approx_error"] = pc.approx_error;
    rec["err_bound_estimate"] = bound;
    rec["err"] = err ? Record(*err) : Record(nullptr);
    rec["converged"] = pc.converged;
    rec["time_build_s"] = t_build;
    rec["time_convert_in_s"] = t_convert_in;
    rec["time_bounds_s"] = t_bounds;
    rec["time_poles_s"] = t_poles;
    rec["time_matfun_s"] = t_matfun;
    rec["time_krylov_s"] = dg.krylov_s;
    rec["time_feval_s"] = dg.feval_s;
    rec["time_convert_out_s"] = t_convert_out;
    rec["time_dense_check_s"] = t_dense;
    rec["time_total_s"] = detail::seconds_since(t_all);
    return rec;
  } catch (const domain_error& e) {
    throw domain_error(label + ": " + e.what());
  } catch (const pole_collision_error& e) {
    throw pole_collision_error(label + ": " + e.what());
  } catch (const parse_error& e) {
    throw parse_error(label + ": " + e.what());
  } catch (const contract_error& e) {
    throw contract_error(label + ": " + e.what());
  } catch (const error& e) {
    throw error(label + ": " + e.what());
  }
}

// ---------------------------------------------------------------- output

namespace detail {

inline std::string csv_cell(const Record& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) return std::isfinite(v.get<double>()) ? format_double(v.get<double>()) : "";
  if (v.is_number()) return v.dump();
  std::string s = v.get<std::string>();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

}  // namespace detail

inline std::string record_csv_header(const Record& r) {
  std::string h;
  for (auto it = r.begin(); it != r.end(); ++it) h += (h.empty() ? "" : ",") + it.key();
  return h;
}

inline std::string record_csv_row(const Record& r) {
  std::string row;
  bool first = true;
  for (auto it = r.begin(); it != r.end(); ++it) {
    row += (first ? "" : ",") + detail::csv_cell(it.value());
    first = false;
  }
  return row;
}

/// JSON with every double written at 17 significant digits.
inline std::string record_json(const Record& r) {
  std::string s = "{\n";
  bool first = true;
  for (auto it = r.begin(); it != r.end(); ++it) {
    s += first ? "" : ",\n";
    first = false;
    const Record& v = it.value();
    s += "  " + Record(it.key()).dump() + ": " + (v.is_number_float() && std::isfinite(v.get<double>()) ? format_double(v.get<double>()) : v.dump());
  }
  return s + "\n}\n";
}

/// Writes csv:PATH or json:PATH.
inline void write_record(const std::string& target, const Record& r) {
  const bool csv = target.rfind("csv:", 0) == 0, js = target.rfind("json:", 0) == 0;
  if (!csv && !js) throw contract_error("output must be csv:PATH or json:PATH");
  const std::string path = target.substr(csv ? 4 : 5);
  std::ofstream os(path);
  if (!os) throw error("cannot write '" + path + "'");
  if (csv) os << record_csv_header(r) << '\n' << record_csv_row(r) << '\n';
  else os << record_json(r);
}

}  // namespace hssfun
