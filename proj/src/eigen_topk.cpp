#include <lapacke.h>

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "factorpred/errors.hpp"
#include "factorpred/linalg.hpp"

namespace factorpred {

EigenPairs top_eigenpairs(const Eigen::MatrixXd& sym, Eigen::Index k) {
  const Eigen::Index n = sym.rows();
  if (sym.cols() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "eigensolver input is not square");
  }
  if (k < 1 || k > n) {
    throw Error(ErrorCode::kInvalidOrder, "cannot extract " + std::to_string(k) +
                                              " eigenpairs from a " + std::to_string(n) +
                                              "x" + std::to_string(n) + " matrix");
  }

  // Householder reduction in Eigen, MRRR on the tridiagonal in LAPACK. The
  // tridiagonal solver needs no level-3 BLAS kernels.
  const Eigen::Tridiagonalization<Eigen::MatrixXd> tri(sym);
  Eigen::VectorXd diag = tri.diagonal();
  Eigen::VectorXd off = Eigen::VectorXd::Zero(n);
  off.head(n - 1) = tri.subDiagonal();

  Eigen::VectorXd w(n);
  Eigen::MatrixXd z(n, k);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(k));
  lapack_int found = 0;
  lapack_int tryrac = 1;
  const auto ln = static_cast<lapack_int>(n);
  const lapack_int info = LAPACKE_dstemr(
      LAPACK_COL_MAJOR, 'V', 'I', ln, diag.data(), off.data(), 0.0, 0.0,
      static_cast<lapack_int>(n - k + 1), ln, &found, w.data(), z.data(), ln,
      static_cast<lapack_int>(k), isuppz.data(), &tryrac);
  if (info != 0 || found != k) {
    throw Error(ErrorCode::kSolverFailure,
                "symmetric eigensolver failed (dstemr info " + std::to_string(info) + ")");
  }
  z = tri.matrixQ() * z;

  EigenPairs out;
  out.values.resize(k);
  out.vectors.resize(n, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    out.values[i] = w[k - 1 - i];
    out.vectors.col(i) = z.col(k - 1 - i);
  }
  return out;
}

void fix_column_signs(Eigen::MatrixXd& columns) {
  for (Eigen::Index c = 0; c < columns.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < columns.rows(); ++r) {
      const double mag = std::abs(columns(r, c));
      if (mag > best) {
        best = mag;
        arg = r;
      }
    }
    if (columns(arg, c) < 0.0) columns.col(c) *= -1.0;
  }
}

}  // namespace factorpred
