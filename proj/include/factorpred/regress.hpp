#pragma once

#include <vector>

#include <Eigen/Dense>

#include "factorpred/factor_core.hpp"
#include "factorpred/panel.hpp"

namespace factorpred {

inline constexpr int kDefaultMaxOrder = 25;

/// A least-squares design counts as singular when its smallest singular
/// value falls below this fraction of the largest.
inline constexpr double kConditionTolerance = 1e-10;

struct GcvPoint {
  int ell = 0;
  double gcv = 0.0;
  double residual_ss = 0.0;
};

/// OLS of a response on an intercept plus score columns.
struct ScoreRegression {
  double intercept = 0.0;
  Eigen::VectorXd slope;
  Eigen::VectorXd fitted;
  Eigen::VectorXd residuals;
  double residual_ss = 0.0;
  double min_singular_value = 0.0;
  int order = 0;
  std::vector<GcvPoint> gcv_trace;  // filled by order selection only
};

struct OrderSelection {
  int order = 0;
  std::vector<GcvPoint> trace;  // ell = 1 .. l_max_used
  int l_max_requested = 0;
  int l_max_used = 0;
  bool capped = false;  // l_max lowered to the admissible maximum
};

struct PredictionResult {
  double prediction = 0.0;
  int order_used = 0;
  Eigen::VectorXd score_new;
  /// (1/(T+1)) f_new' F' Y_(-) after centering the response, plus its mean.
  double formula_prediction = 0.0;
  std::vector<GcvPoint> gcv_trace;  // empty unless the order was selected
};

/// Least squares via Householder QR. Requires T > L + 1 and a design whose
/// condition number stays below 1 / kConditionTolerance.
ScoreRegression ols_on_scores(const Eigen::MatrixXd& scores, const Eigen::VectorXd& response);

/// (residual_ss / T) / (1 - ell / T)^2.
double gcv_score(double residual_ss, int n_train, int ell);

/// Largest admissible l_max for T training rows and p sampling points.
int admissible_max_order(int n_train, int n_points);

/// GCV order selection. Factors are estimated once at order l_max on all
/// panel rows; the leading ell score columns of the first T rows (T =
/// response length) are then regressed for ell = 1..l_max. The panel may
/// hold T or T+1 rows. Ties within 1e-12 of the response variance go to the
/// smallest ell.
OrderSelection select_order(const CurvePanel& panel, const Eigen::VectorXd& response,
                            int l_max = kDefaultMaxOrder);

/// Same sweep on an existing fit (which must cover at least T rows).
OrderSelection select_order_for_fit(const FactorFit& fit, const Eigen::VectorXd& response,
                                    int l_max);

/// Predicts Y_{T+1} for the last panel row. Factors are re-estimated on all
/// T+1 rows; the prediction is a-hat + b-hat' f-hat_{T+1} from OLS on the T
/// training rows.
PredictionResult predict_next(const CurvePanel& panel_with_new, const Eigen::VectorXd& response,
                              int order);

/// predict_next on an existing fit of the T+1 rows, using its leading `order` factors.
PredictionResult predict_with_fit(const FactorFit& fit, const Eigen::VectorXd& response,
                                  int order);

/// Full pipeline: one factor fit at l_max, GCV order selection, prediction.
PredictionResult fit_predict(const CurvePanel& panel_with_new, const Eigen::VectorXd& response,
                             int l_max = kDefaultMaxOrder);

/// fit_predict for a training block plus one new row, reusing the block's
/// cached statistics.
PredictionResult fit_predict(const AugmentedFactorEstimator& estimator,
                             const Eigen::VectorXd& new_row, const Eigen::VectorXd& response,
                             int l_max = kDefaultMaxOrder);

}  // namespace factorpred
