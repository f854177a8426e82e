#pragma once

#include <Eigen/Dense>

namespace factorpred {

struct EigenPairs {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // unit-norm columns, matching `values`
};

/// Largest `k` eigenpairs of a symmetric matrix. Only the lower triangle of
/// `sym` is read. Throws kSolverFailure if the solver does not converge.
EigenPairs top_eigenpairs(const Eigen::MatrixXd& sym, Eigen::Index k);

/// Negates each column so that its entry of largest magnitude is positive
/// (ties go to the lowest row index).
void fix_column_signs(Eigen::MatrixXd& columns);

}  // namespace factorpred
