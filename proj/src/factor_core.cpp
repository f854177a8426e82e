#include "factorpred/factor_core.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <utility>

#include "factorpred/errors.hpp"
#include "factorpred/linalg.hpp"

namespace factorpred {

namespace {

constexpr double kOrthonormalityBound = 1e-10;

void check_order(int order, Eigen::Index n, Eigen::Index p) {
  if (order < 1 || order > std::min(n, p)) {
    throw Error(ErrorCode::kInvalidOrder,
                "factor order " + std::to_string(order) + " outside [1, min(T+1, p) = " +
                    std::to_string(std::min(n, p)) + "]");
  }
}

// Below this leading eigenvalue the centered panel is treated as all-zero:
// every entry would be at rounding level relative to the raw data.
double degenerate_floor(double max_abs, Eigen::Index p) {
  const double rounding = 1e-14 * max_abs;
  return static_cast<double>(p) * rounding * rounding;
}

void check_spectrum(const Eigen::VectorXd& values, int order, double floor) {
  const double lead = values[0];
  if (!(lead > floor)) {
    throw Error(ErrorCode::kDegeneratePanel,
                "panel has no variation after centering (leading eigenvalue " +
                    std::to_string(lead) + ")");
  }
  for (int l = 0; l < order; ++l) {
    if (!(values[l] > kRankTolerance * lead)) {
      std::ostringstream msg;
      msg.precision(6);
      msg << "requested " << order << " factors but eigenvalue " << (l + 1) << " = "
          << values[l] << " is below the rank tolerance (" << kRankTolerance << " * "
          << lead << ")";
      throw Error(ErrorCode::kRankDeficient, msg.str());
    }
  }
}

FactorFit finish(const Eigen::MatrixXd& unit_vectors, Eigen::VectorXd values,
                 Eigen::VectorXd mean, int order) {
  const auto n = unit_vectors.rows();
  FactorFit fit;
  fit.mean = std::move(mean);
  fit.scores = std::sqrt(static_cast<double>(n)) * unit_vectors;
  fix_column_signs(fit.scores);
  fit.eigenvalues = std::move(values);
  fit.order = order;
  fit.n_obs = static_cast<int>(n);

  const double err = orthonormality_error(fit);
  if (!(err < kOrthonormalityBound)) {
    throw Error(ErrorCode::kSolverFailure,
                "estimated scores not orthonormal (max deviation " + std::to_string(err) + ")");
  }
  return fit;
}

FactorFit factors_via_gram(const Eigen::MatrixXd& centered, Eigen::VectorXd mean, int order,
                           double floor) {
  const auto n = centered.rows();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  g.selfadjointView<Eigen::Lower>().rankUpdate(centered, 1.0 / static_cast<double>(n));
  EigenPairs pairs = top_eigenpairs(g, order);
  check_spectrum(pairs.values, order, floor);
  return finish(pairs.vectors, std::move(pairs.values), std::move(mean), order);
}

// `cov_lower` holds (in its lower triangle) Z_c' Z_c / n. An eigenvector v
// of it maps to the Gram eigenvector Z_c v / sqrt(n * gamma). A Rayleigh-Ritz
// pass in the mapped subspace restores orthonormality to rounding level.
FactorFit factors_via_covariance(const Eigen::MatrixXd& centered, const Eigen::MatrixXd& cov_lower,
                                 Eigen::VectorXd mean, int order, double floor) {
  const auto n = centered.rows();
  const double dn = static_cast<double>(n);
  EigenPairs pairs = top_eigenpairs(cov_lower, order);
  check_spectrum(pairs.values, order, floor);

  const Eigen::VectorXd inv_norm = (dn * pairs.values.array()).rsqrt().matrix();
  const Eigen::MatrixXd mapped = centered * (pairs.vectors * inv_norm.asDiagonal());

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(mapped);
  const Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(n, order);
  const Eigen::MatrixXd projected = centered.transpose() * basis;
  const Eigen::MatrixXd small = projected.transpose() * projected / dn;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(small);
  if (ritz.info() != Eigen::Success) {
    throw Error(ErrorCode::kSolverFailure, "Rayleigh-Ritz refinement did not converge");
  }
  Eigen::VectorXd values = ritz.eigenvalues().reverse();
  const Eigen::MatrixXd rotation = ritz.eigenvectors().rowwise().reverse();
  check_spectrum(values, order, floor);
  return finish(basis * rotation, std::move(values), std::move(mean), order);
}

}  // namespace

FactorFit FactorFit::leading(int k) const {
  if (k < 1 || k > order) {
    throw Error(ErrorCode::kInvalidOrder, "cannot take " + std::to_string(k) +
                                              " leading factors of an order-" +
                                              std::to_string(order) + " fit");
  }
  FactorFit out;
  out.mean = mean;
  out.scores = scores.leftCols(k);
  out.eigenvalues = eigenvalues.head(k);
  out.order = k;
  out.n_obs = n_obs;
  return out;
}

Eigen::VectorXd estimate_mean(const CurvePanel& panel) {
  return panel.values().colwise().mean().transpose();
}

CurvePanel center(const CurvePanel& panel, const Eigen::VectorXd& mean) {
  if (mean.size() != panel.n_points()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "mean has length " + std::to_string(mean.size()) + " but panel has " +
                    std::to_string(panel.n_points()) + " columns");
  }
  Eigen::MatrixXd centered = panel.values().rowwise() - mean.transpose();
  return CurvePanel(std::move(centered), panel.grid());
}

Eigen::MatrixXd gram(const CurvePanel& panel) {
  const auto n = panel.n_obs();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  g.selfadjointView<Eigen::Lower>().rankUpdate(panel.values(), 1.0 / static_cast<double>(n));
  return g.selfadjointView<Eigen::Lower>();
}

FactorFit estimate_factors(const CurvePanel& panel, int order, EigenRoute route) {
  const auto n = panel.n_obs();
  const auto p = panel.n_points();
  check_order(order, n, p);

  Eigen::VectorXd mean = estimate_mean(panel);
  const Eigen::MatrixXd centered = panel.values().rowwise() - mean.transpose();
  const double floor = degenerate_floor(panel.values().cwiseAbs().maxCoeff(), p);

  if (route == EigenRoute::kAuto) route = n <= p ? EigenRoute::kGram : EigenRoute::kCovariance;
  if (route == EigenRoute::kGram) return factors_via_gram(centered, std::move(mean), order, floor);

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(),
                                                 1.0 / static_cast<double>(n));
  return factors_via_covariance(centered, cov, std::move(mean), order, floor);
}

RotationDiagnostic compute_rotation(const FactorFit& fit, const Eigen::MatrixXd& true_scores,
                                    const Eigen::MatrixXd& loadings) {
  if (true_scores.rows() != fit.n_obs || true_scores.cols() != fit.order) {
    throw Error(ErrorCode::kDimensionMismatch,
                "true scores are " + std::to_string(true_scores.rows()) + "x" +
                    std::to_string(true_scores.cols()) + ", expected " +
                    std::to_string(fit.n_obs) + "x" + std::to_string(fit.order));
  }
  if (loadings.rows() != fit.mean.size() || loadings.cols() != fit.order) {
    throw Error(ErrorCode::kDimensionMismatch,
                "loadings are " + std::to_string(loadings.rows()) + "x" +
                    std::to_string(loadings.cols()) + ", expected " +
                    std::to_string(fit.mean.size()) + "x" + std::to_string(fit.order));
  }
  const double lead = fit.eigenvalues.size() > 0 ? fit.eigenvalues[0] : 0.0;
  for (Eigen::Index l = 0; l < fit.eigenvalues.size(); ++l) {
    if (!(fit.eigenvalues[l] > kRankTolerance * lead) || !(lead > 0.0)) {
      throw Error(ErrorCode::kRankDeficient,
                  "eigenvalue " + std::to_string(l + 1) + " is numerically zero; H undefined");
    }
  }

  RotationDiagnostic out;
  out.h_matrix = fit.eigenvalues.cwiseInverse().asDiagonal() *
                 (fit.scores.transpose() * true_scores) * (loadings.transpose() * loadings) /
                 static_cast<double>(fit.n_obs);
  const Eigen::MatrixXd gap = out.h_matrix.transpose() * out.h_matrix -
                              Eigen::MatrixXd::Identity(fit.order, fit.order);
  out.deviation = gap.norm();
  return out;
}

double orthonormality_error(const FactorFit& fit) {
  const auto k = fit.scores.cols();
  const Eigen::MatrixXd cross =
      fit.scores.transpose() * fit.scores / static_cast<double>(fit.scores.rows());
  return (cross - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
}

AugmentedFactorEstimator::AugmentedFactorEstimator(const CurvePanel& training)
    : training_(training.values()), grid_(training.grid()) {
  const auto n = training_.rows() + 1;
  const auto p = training_.cols();
  if (n > p) {
    train_mean_ = training_.colwise().mean().transpose();
    const Eigen::MatrixXd centered = training_.rowwise() - train_mean_.transpose();
    train_scatter_ = Eigen::MatrixXd::Zero(p, p);
    train_scatter_.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  }
}

CurvePanel AugmentedFactorEstimator::augmented(const Eigen::VectorXd& new_row) const {
  if (new_row.size() != training_.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "new row has " + std::to_string(new_row.size()) + " values, panel has " +
                    std::to_string(training_.cols()) + " columns");
  }
  Eigen::MatrixXd values(training_.rows() + 1, training_.cols());
  values.topRows(training_.rows()) = training_;
  values.row(training_.rows()) = new_row.transpose();
  return CurvePanel(std::move(values), grid_);
}

FactorFit AugmentedFactorEstimator::fit_with(const Eigen::VectorXd& new_row, int order) const {
  if (train_scatter_.size() == 0) {
    return estimate_factors(augmented(new_row), order, EigenRoute::kGram);
  }
  if (new_row.size() != training_.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "new row has " + std::to_string(new_row.size()) + " values, panel has " +
                    std::to_string(training_.cols()) + " columns");
  }
  if (!new_row.allFinite()) {
    throw Error(ErrorCode::kInvalidInput, "new row contains non-finite values");
  }
  const auto n_train = training_.rows();
  const auto n = n_train + 1;
  const auto p = training_.cols();
  check_order(order, n, p);
  const double dn = static_cast<double>(n);

  // Adding z to a block with mean m and centered scatter S gives mean
  // m + d/n and scatter S + (n_train/n) d d', with d = z - m.
  const Eigen::VectorXd shift = new_row - train_mean_;
  Eigen::VectorXd mean = train_mean_ + shift / dn;
  Eigen::MatrixXd cov = train_scatter_;
  cov.selfadjointView<Eigen::Lower>().rankUpdate(shift, static_cast<double>(n_train) / dn);
  cov /= dn;

  Eigen::MatrixXd centered(n, p);
  centered.topRows(n_train) = training_.rowwise() - mean.transpose();
  centered.row(n_train) = (new_row - mean).transpose();

  const double max_abs =
      std::max(training_.cwiseAbs().maxCoeff(), new_row.cwiseAbs().maxCoeff());
  return factors_via_covariance(centered, cov, std::move(mean), order,
                                degenerate_floor(max_abs, p));
}

}  // namespace factorpred
