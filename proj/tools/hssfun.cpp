// hssfun: f(A) for compressed test matrices, one experiment per run.
//
//   hssfun sign --matrix tridiag --spectrum logsym:-3 --n 1024 --check-dense --out json:sign.json
//
// Exit status: 0 ok, 2 accuracy target not met, 1 error.

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "hssfun/experiment.hpp"

int main(int argc, char** argv) {
  hssfun::ExperimentSpec spec;
  std::string out;
  double defl_tol = -1.0;
  bool no_convert = false, quiet = false;

  CLI::App app{"Matrix functions of symmetric HSS matrices"};
  app.add_option("function", spec.function, "invert | expm | invsqrt | sign | custom")
      ->required()
      ->check(CLI::IsMember({"invert", "expm", "invsqrt", "sign", "custom"}));
  app.add_option("--matrix", spec.matrix, "laplacian | glfrac | tridiag | gmrf_like | csv:PATH")
      ->capture_default_str();
  app.add_option("--n", spec.n, "Matrix size (ignored for csv:)")->capture_default_str();
  app.add_option("--alpha", spec.alpha, "Fractional order for glfrac, in (1, 2)")->capture_default_str();
  app.add_option("--spectrum", spec.spectrum, "tridiag eigenvalues: PATH, uniform:LO:HI or logsym:A");
  app.add_option("--poles", spec.poles, "auto | K | json:PATH")->capture_default_str();
  app.add_option("--eps", spec.eps, "Target relative accuracy")->capture_default_str();
  app.add_option("--threshold", spec.threshold, "Leaf size bound of the cluster tree")->capture_default_str();
  app.add_option("--tol", spec.tol, "HSS compression tolerance")->capture_default_str();
  app.add_option("--defl-tol", defl_tol, "Krylov deflation tolerance (default eps/100)");
  app.add_option("--fn", spec.custom_fn, "Function for custom: inv exp invsqrt sqrt sign log1p_over_x pow:G");
  app.add_option("--markov-cap", spec.markov_cap, "Largest automatic pole count for invsqrt")->capture_default_str();
  app.add_option("--sign-cap", spec.sign_cap, "Largest automatic number of conjugate pole pairs for sign")
      ->capture_default_str();
  app.add_option("--max-degree", spec.custom_cap, "AAA degree limit for custom")->capture_default_str();
  app.add_flag("--check-dense", spec.check_dense, "Compare with the dense result (n <= 8192)");
  app.add_flag("--no-convert", no_convert, "Skip to_standard/to_hss on the result");
  app.add_option("--out", out, "csv:PATH | json:PATH (record also printed to stdout)");
  app.add_option("--save", spec.save, "json:PATH for the resulting HSS matrix");
  app.add_option("--seed", spec.seed, "Seed for randomized generators")->capture_default_str();
  app.add_flag("-q,--quiet", quiet, "Do not print the record");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  if (defl_tol >= 0.0) spec.defl_tol = defl_tol;
  spec.convert = !no_convert;

  try {
    const hssfun::Record rec = hssfun::run_experiment(spec);
    if (!out.empty()) hssfun::write_record(out, rec);
    if (!quiet) std::cout << hssfun::record_json(rec);
    if (!rec["converged"].get<bool>()) {
      std::cerr << "hssfun: accuracy target " << spec.eps << " not met (approx_error "
                << hssfun::format_double(rec["approx_error"].get<double>()) << ")\n";
      return 2;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "hssfun: " << e.what() << '\n';
    return 1;
  }
}
