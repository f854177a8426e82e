#include "factorpred/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "factorpred/errors.hpp"

namespace factorpred {

namespace {

Eigen::MatrixXd design_with_intercept(const Eigen::MatrixXd& scores) {
  Eigen::MatrixXd design(scores.rows(), scores.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(scores.cols()) = scores;
  return design;
}

// Extreme singular values of the leading k x k block of the R factor.
std::pair<double, double> singular_range(const Eigen::MatrixXd& qr_matrix, Eigen::Index k) {
  const Eigen::MatrixXd r = qr_matrix.topLeftCorner(k, k).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
  const auto& s = svd.singularValues();
  return {s[k - 1], s[0]};
}

void check_response(const Eigen::VectorXd& response) {
  if (!response.allFinite()) {
    throw Error(ErrorCode::kInvalidInput, "response contains non-finite values");
  }
}

int capped_order(int l_max, int n_train, int n_points) {
  if (l_max < 1) {
    throw Error(ErrorCode::kInvalidOrder, "l_max must be at least 1, got " + std::to_string(l_max));
  }
  const int cap = admissible_max_order(n_train, n_points);
  if (cap < 1) {
    throw Error(ErrorCode::kInvalidOrder, "no admissible order for T = " +
                                              std::to_string(n_train) + ", p = " +
                                              std::to_string(n_points));
  }
  return std::min(l_max, cap);
}

void check_rows(Eigen::Index panel_rows, Eigen::Index n_train) {
  if (panel_rows != n_train + 1) {
    throw Error(ErrorCode::kDimensionMismatch,
                "panel has " + std::to_string(panel_rows) + " rows; expected response length + 1 = " +
                    std::to_string(n_train + 1));
  }
}

}  // namespace

ScoreRegression ols_on_scores(const Eigen::MatrixXd& scores, const Eigen::VectorXd& response) {
  const auto n = scores.rows();
  const auto k = scores.cols();
  if (response.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                "scores have " + std::to_string(n) + " rows, response has " +
                    std::to_string(response.size()) + " values");
  }
  if (n <= k + 1) {
    throw Error(ErrorCode::kInvalidOrder, "need more than " + std::to_string(k + 1) +
                                              " rows for " + std::to_string(k) +
                                              " scores plus intercept, got " + std::to_string(n));
  }
  check_response(response);

  const Eigen::MatrixXd design = design_with_intercept(scores);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
  const auto [smin, smax] = singular_range(qr.matrixQR(), k + 1);
  if (!(smin > kConditionTolerance * smax)) {
    std::ostringstream msg;
    msg << "least-squares design is rank deficient: smallest singular value " << smin
        << " (largest " << smax << ")";
    throw Error(ErrorCode::kIllConditioned, msg.str());
  }

  const Eigen::VectorXd qty = qr.householderQ().adjoint() * response;
  const Eigen::VectorXd coef = qr.matrixQR()
                                   .topLeftCorner(k + 1, k + 1)
                                   .triangularView<Eigen::Upper>()
                                   .solve(qty.head(k + 1));

  ScoreRegression out;
  out.intercept = coef[0];
  out.slope = coef.tail(k);
  out.fitted = design * coef;
  out.residuals = response - out.fitted;
  out.residual_ss = out.residuals.squaredNorm();
  out.min_singular_value = smin;
  out.order = static_cast<int>(k);
  return out;
}

double gcv_score(double residual_ss, int n_train, int ell) {
  if (ell < 1 || ell >= n_train) {
    throw Error(ErrorCode::kInvalidOrder, "GCV needs 0 < ell < T; got ell = " +
                                              std::to_string(ell) + ", T = " +
                                              std::to_string(n_train));
  }
  if (!(residual_ss >= 0.0) || !std::isfinite(residual_ss)) {
    throw Error(ErrorCode::kInvalidInput, "residual sum of squares must be finite and >= 0");
  }
  const double t = static_cast<double>(n_train);
  const double shrink = 1.0 - static_cast<double>(ell) / t;
  return residual_ss / t / (shrink * shrink);
}

int admissible_max_order(int n_train, int n_points) {
  return std::min(n_train - 2, n_points - 1);
}

OrderSelection select_order_for_fit(const FactorFit& fit, const Eigen::VectorXd& response,
                                    int l_max) {
  const auto n_train = static_cast<int>(response.size());
  if (fit.n_obs != n_train && fit.n_obs != n_train + 1) {
    throw Error(ErrorCode::kDimensionMismatch,
                "fit covers " + std::to_string(fit.n_obs) + " rows; response has " +
                    std::to_string(n_train) + " values");
  }
  check_response(response);
  const int allowed = std::min(capped_order(l_max, n_train, static_cast<int>(fit.mean.size())),
                               fit.order);

  OrderSelection out;
  out.l_max_requested = l_max;
  out.capped = allowed < l_max;

  // One QR of [1, F_1..F_lmax] serves every nested model: the residual of
  // the first ell + 1 columns is the tail of Q'y beyond position ell.
  const Eigen::MatrixXd design =
      design_with_intercept(fit.scores.topRows(n_train).leftCols(allowed));
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::VectorXd qty = qr.householderQ().adjoint() * response;
  Eigen::VectorXd tail(n_train + 1);
  tail[n_train] = 0.0;
  for (int i = n_train - 1; i >= 0; --i) tail[i] = tail[i + 1] + qty[i] * qty[i];

  // Adding columns only worsens conditioning: if the full design passes,
  // every nested one does; otherwise the sweep stops at the first failure.
  const auto well_conditioned = [&](int ell) {
    const auto [smin, smax] = singular_range(qr.matrixQR(), ell + 1);
    return smin > kConditionTolerance * smax;
  };
  const bool all_ok = well_conditioned(allowed);
  for (int ell = 1; ell <= allowed; ++ell) {
    if (!all_ok && !well_conditioned(ell)) break;
    const double rss = tail[ell + 1];
    out.trace.push_back({ell, gcv_score(rss, n_train, ell), rss});
  }
  if (out.trace.empty()) {
    throw Error(ErrorCode::kSelectionFailed, "no order in 1.." + std::to_string(allowed) +
                                                 " gives a well-conditioned regression");
  }
  out.l_max_used = static_cast<int>(out.trace.size());

  const double scale = (response.array() - response.mean()).square().mean();
  const double tol = 1e-12 * std::max(scale, std::numeric_limits<double>::min());
  double best = std::numeric_limits<double>::infinity();
  for (const auto& point : out.trace) best = std::min(best, point.gcv);
  for (const auto& point : out.trace) {
    if (point.gcv <= best + tol) {
      out.order = point.ell;
      break;
    }
  }
  return out;
}

OrderSelection select_order(const CurvePanel& panel, const Eigen::VectorXd& response,
                            int l_max) {
  const auto n_train = response.size();
  if (panel.n_obs() != n_train && panel.n_obs() != n_train + 1) {
    throw Error(ErrorCode::kDimensionMismatch,
                "panel has " + std::to_string(panel.n_obs()) + " rows; response has " +
                    std::to_string(n_train) + " values");
  }
  const int used =
      capped_order(l_max, static_cast<int>(n_train), static_cast<int>(panel.n_points()));
  return select_order_for_fit(estimate_factors(panel, used), response, l_max);
}

PredictionResult predict_with_fit(const FactorFit& fit, const Eigen::VectorXd& response,
                                  int order) {
  const auto n_train = response.size();
  check_rows(fit.n_obs, n_train);
  if (order < 1 || order > fit.order) {
    throw Error(ErrorCode::kInvalidOrder, "order " + std::to_string(order) +
                                              " outside the fitted range 1.." +
                                              std::to_string(fit.order));
  }
  const Eigen::MatrixXd scores = fit.scores.leftCols(order);
  const ScoreRegression reg = ols_on_scores(scores.topRows(n_train), response);

  PredictionResult out;
  out.order_used = order;
  out.score_new = scores.row(n_train).transpose();
  out.prediction = reg.intercept + reg.slope.dot(out.score_new);

  const double mean = response.mean();
  const Eigen::VectorXd projected =
      scores.topRows(n_train).transpose() * (response.array() - mean).matrix();
  out.formula_prediction =
      mean + out.score_new.dot(projected) / static_cast<double>(n_train + 1);
  return out;
}

PredictionResult predict_next(const CurvePanel& panel_with_new, const Eigen::VectorXd& response,
                              int order) {
  check_rows(panel_with_new.n_obs(), response.size());
  check_response(response);
  return predict_with_fit(estimate_factors(panel_with_new, order), response, order);
}

namespace {

PredictionResult predict_selected(const FactorFit& fit, const Eigen::VectorXd& response,
                                  int l_max) {
  OrderSelection selection = select_order_for_fit(fit, response, l_max);
  PredictionResult out = predict_with_fit(fit, response, selection.order);
  out.gcv_trace = std::move(selection.trace);
  return out;
}

}  // namespace

PredictionResult fit_predict(const CurvePanel& panel_with_new, const Eigen::VectorXd& response,
                             int l_max) {
  const auto n_train = response.size();
  check_rows(panel_with_new.n_obs(), n_train);
  check_response(response);
  const int used = capped_order(l_max, static_cast<int>(n_train),
                                static_cast<int>(panel_with_new.n_points()));
  return predict_selected(estimate_factors(panel_with_new, used), response, l_max);
}

PredictionResult fit_predict(const AugmentedFactorEstimator& estimator,
                             const Eigen::VectorXd& new_row, const Eigen::VectorXd& response,
                             int l_max) {
  const auto n_train = response.size();
  check_rows(estimator.n_train() + 1, n_train);
  check_response(response);
  const int used = capped_order(l_max, static_cast<int>(n_train),
                                static_cast<int>(estimator.n_points()));
  return predict_selected(estimator.fit_with(new_row, used), response, l_max);
}

}  // namespace factorpred
