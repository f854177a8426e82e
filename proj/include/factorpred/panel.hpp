#pragma once

#include <Eigen/Dense>

namespace factorpred {

/// Noisy discrete curve observations. Rows are observations (t = 1..T+1),
/// columns are sampling points; `grid` holds the sampling points in
/// increasing order. Construction validates every invariant, so any
/// CurvePanel in hand has at least two rows, one column, finite values and
/// a strictly increasing grid of matching length.
class CurvePanel {
 public:
  CurvePanel(Eigen::MatrixXd values, Eigen::VectorXd grid);

  /// Panel on the equidistant grid of `values.cols()` points in [lo, hi].
  static CurvePanel on_equidistant_grid(Eigen::MatrixXd values, double lo = 0.0,
                                        double hi = 1.0);

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  const Eigen::VectorXd& grid() const noexcept { return grid_; }
  Eigen::Index n_obs() const noexcept { return values_.rows(); }
  Eigen::Index n_points() const noexcept { return values_.cols(); }

  friend bool operator==(const CurvePanel& a, const CurvePanel& b) {
    return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
           a.values_ == b.values_ && a.grid_ == b.grid_;
  }

 private:
  Eigen::MatrixXd values_;
  Eigen::VectorXd grid_;
};

/// p equidistant points s_j = lo + (hi - lo) * j / (p - 1); a single point sits at lo.
Eigen::VectorXd equidistant_grid(Eigen::Index p, double lo = 0.0, double hi = 1.0);

}  // namespace factorpred
