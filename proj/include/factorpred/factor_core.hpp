#pragma once

#include <Eigen/Dense>

#include "factorpred/panel.hpp"

namespace factorpred {

/// Rank tolerance: eigenvalue l counts as nonzero when gamma_l > kRankTolerance * gamma_1.
inline constexpr double kRankTolerance = 1e-12;

/// Estimated factor structure of a curve panel.
///
/// `scores` is the (T+1) x L matrix F-hat = sqrt(T+1) * E-hat, where the
/// columns of E-hat are the leading unit eigenvectors of the scaled Gram
/// matrix of the centered observations. Hence scores' * scores / (T+1) is
/// the identity. `eigenvalues` are the matching Gram eigenvalues in
/// decreasing order.
struct FactorFit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd scores;
  Eigen::VectorXd eigenvalues;
  int order = 0;
  int n_obs = 0;

  /// The same fit restricted to its leading `k` factors.
  FactorFit leading(int k) const;
};

struct RotationDiagnostic {
  Eigen::MatrixXd h_matrix;
  double deviation = 0.0;  // ||H'H - I||_F
};

/// Which symmetric matrix is decomposed. Both give the same fit; kAuto picks
/// the smaller one, i.e. the Gram matrix when T+1 <= p.
enum class EigenRoute { kAuto, kGram, kCovariance };

/// Columnwise sample mean over all rows (divisor T+1).
Eigen::VectorXd estimate_mean(const CurvePanel& panel);

/// Subtracts `mean` from every row.
CurvePanel center(const CurvePanel& panel, const Eigen::VectorXd& mean);

/// (1/(T+1)) Z Z', the scaled inner products between observations.
Eigen::MatrixXd gram(const CurvePanel& panel);

/// Centers the panel and extracts `order` factors. Each score column is
/// signed so that its largest-magnitude entry is positive.
FactorFit estimate_factors(const CurvePanel& panel, int order,
                           EigenRoute route = EigenRoute::kAuto);

/// H = (1/(T+1)) Lambda-hat^{-1} F-hat' F B'B together with ||H'H - I||_F.
RotationDiagnostic compute_rotation(const FactorFit& fit, const Eigen::MatrixXd& true_scores,
                                    const Eigen::MatrixXd& loadings);

/// max |scores' scores / n_obs - I|.
double orthonormality_error(const FactorFit& fit);

/// Factor estimation for "training block plus one new row" panels.
///
/// The training rows' mean and centered cross-product are accumulated once;
/// each call to fit_with() forms the augmented panel's statistics by an exact
/// one-row update and decomposes them from scratch. Results agree with
/// estimate_factors() on the augmented panel.
class AugmentedFactorEstimator {
 public:
  explicit AugmentedFactorEstimator(const CurvePanel& training);

  FactorFit fit_with(const Eigen::VectorXd& new_row, int order) const;

  /// The augmented panel itself (training rows followed by `new_row`).
  CurvePanel augmented(const Eigen::VectorXd& new_row) const;

  Eigen::Index n_train() const noexcept { return training_.rows(); }
  Eigen::Index n_points() const noexcept { return training_.cols(); }

 private:
  Eigen::MatrixXd training_;
  Eigen::VectorXd grid_;
  Eigen::VectorXd train_mean_;
  Eigen::MatrixXd train_scatter_;  // lower triangle of sum (z - m)(z - m)'; empty on the Gram route
};

}  // namespace factorpred
