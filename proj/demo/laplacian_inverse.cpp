// Inverts the 1D Laplacian through its telescopic decomposition and compares
// with the dense inverse.  Usage: demo_laplacian_inverse [n] [threshold]

#include <cstdio>
#include <cstdlib>

#include "hssfun/generators.hpp"
#include "hssfun/hss.hpp"
#include "hssfun/matfun.hpp"
#include "hssfun/telescopic.hpp"

int main(int argc, char** argv) {
  using namespace hssfun;
  const Eigen::Index n = argc > 1 ? std::atol(argv[1]) : 1024;
  const Eigen::Index t = argc > 2 ? std::atol(argv[2]) : 256;
  if (n < 2 || t < 1) {
    std::fprintf(stderr, "usage: %s [n >= 2] [threshold >= 1]\n", argv[0]);
    return 1;
  }

  const SparseMatrix A = laplacian_sparse(n);
  const HssMatrix H = compress_sparse(A, ClusterTree::build(n, t), 1e-12, true);
  std::printf("n = %ld, depth %d, HSS rank %ld\n", static_cast<long>(n), H.tree.depth(),
              static_cast<long>(hss_rank(H, 1e-12)));

  // One pole at 0 makes the rational Krylov update exact for 1/x.
  MatFunDiagnostics diag;
  MatFunRequest req{from_hss(H), fn::inv(), PoleList{Pole::real(0.0)}, 0.0, std::nullopt, std::nullopt};
  const TelescopicDecomposition Ainv = matfun_telescopic(req, &diag);
  std::printf("matfun: %.3f s, largest basis %ld\n", diag.total_s, static_cast<long>(diag.max_basis));

  if (n <= 4096) {
    const Matrix exact = Matrix(A).inverse();
    std::printf("relative Frobenius error %.3e\n", rel_fro_error(hss_to_dense(to_hss(to_standard(Ainv))), exact));
  }
  return 0;
}
