#include "factorpred/panel.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "factorpred/errors.hpp"

namespace factorpred {

CurvePanel::CurvePanel(Eigen::MatrixXd values, Eigen::VectorXd grid)
    : values_(std::move(values)), grid_(std::move(grid)) {
  if (values_.rows() < 2) {
    throw Error(ErrorCode::kDegeneratePanel,
                "panel needs at least 2 rows, got " + std::to_string(values_.rows()));
  }
  if (values_.cols() < 1) {
    throw Error(ErrorCode::kInvalidInput, "panel needs at least 1 column");
  }
  if (grid_.size() != values_.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "grid has " + std::to_string(grid_.size()) + " points but panel has " +
                    std::to_string(values_.cols()) + " columns");
  }
  for (Eigen::Index j = 0; j < grid_.size(); ++j) {
    if (!std::isfinite(grid_[j])) {
      throw Error(ErrorCode::kInvalidInput, "grid point " + std::to_string(j + 1) + " is not finite");
    }
    if (j > 0 && !(grid_[j] > grid_[j - 1])) {
      throw Error(ErrorCode::kInvalidInput,
                  "grid not strictly increasing at point " + std::to_string(j + 1));
    }
  }
  for (Eigen::Index j = 0; j < values_.cols(); ++j) {
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
      if (!std::isfinite(values_(i, j))) {
        throw Error(ErrorCode::kInvalidInput, "non-finite value at row " + std::to_string(i + 1) +
                                                  ", column " + std::to_string(j + 1));
      }
    }
  }
}

CurvePanel CurvePanel::on_equidistant_grid(Eigen::MatrixXd values, double lo, double hi) {
  Eigen::VectorXd grid = equidistant_grid(values.cols(), lo, hi);
  return CurvePanel(std::move(values), std::move(grid));
}

Eigen::VectorXd equidistant_grid(Eigen::Index p, double lo, double hi) {
  Eigen::VectorXd grid(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    grid[j] = p == 1 ? lo : lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(p - 1);
  }
  return grid;
}

}  // namespace factorpred
