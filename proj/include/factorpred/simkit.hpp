#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "factorpred/panel.hpp"

namespace factorpred {

using RealFunction = std::function<double(double)>;

struct Domain {
  double lo = 0.0;
  double hi = 1.0;
  double length() const { return hi - lo; }
};

/// Data-generating process for simulated curves:
///   X_t(s) = mu(s) + sum_l sqrt(lambda_l) f_tl phi_l(s),  f_tl ~ N(0, 1)
///   Z_t(s_j) = X_t(s_j) + U_tj
///   Y_t = int beta(s) X_t(s) ds + eps_t = a + b' f_t + eps_t
/// with U_t Gaussian of standard deviation sigma_u (AR(1) along the grid
/// when rho > 0) and eps_t ~ N(0, sigma_eps^2).
struct GroundTruth {
  Domain domain;
  std::vector<double> eigenvalues;
  std::vector<RealFunction> eigenfunctions;
  RealFunction mean_fn;
  RealFunction slope_fn;
  double sigma_u = 0.0;
  double sigma_eps = 0.0;
  double rho = 0.0;

  int true_order() const { return static_cast<int>(eigenvalues.size()); }

  /// Throws kInvalidInput on mismatched sizes, missing functions, negative
  /// or increasing eigenvalues, negative noise levels or rho outside [0, 0.9].
  void validate() const;
};

enum class SlopeKind { kSmooth, kRough };

/// 10 sin^3(2 pi s^3).
double beta_smooth(double s);

/// -1/eps^2 on [x0 - eps, x0), +1/eps^2 on [x0, x0 + eps], 0 elsewhere.
double beta_rough(double s, double x0 = 18.0, double eps = 0.24);

/// First `count` functions of the trigonometric basis 1, sqrt2 sin(2 pi k u),
/// sqrt2 cos(2 pi k u), ... with u = (s - lo) / |D|, scaled to be
/// orthonormal in L2(domain).
std::vector<RealFunction> fourier_basis(int count, Domain domain);

/// Default design: 21 Fourier eigenfunctions with eigenvalues l^-2 on the
/// unit interval. The smooth slope lives on [0, 1]; the rough slope on
/// [0, 24], where the same curves are observed on a 24-hour clock (so the
/// operator eigenvalues scale by 24).
GroundTruth default_ground_truth(SlopeKind slope, double sigma_u, double sigma_eps,
                                 double rho = 0.0);

/// Same family truncated to `order` factors with eigenvalues scale * l^-2.
GroundTruth low_rank_ground_truth(int order, double scale, SlopeKind slope, double sigma_u,
                                  double sigma_eps);

/// Low-rank design for rotation diagnostics and rate experiments:
/// low_rank_ground_truth(order, kDiagnosticScale, ...).
inline constexpr double kDiagnosticScale = 1.0;
GroundTruth diagnostic_ground_truth(int order, SlopeKind slope, double sigma_u, double sigma_eps);

/// Composite trapezoid rule on an increasing grid.
double trapezoid(const Eigen::VectorXd& grid, const Eigen::VectorXd& values);

/// Quadrature grid for true_coefficients(): at least 4001 points and at
/// least 10x the resolution of a p-point observation grid.
Eigen::VectorXd quadrature_grid(const Domain& domain, Eigen::Index p);

struct Coefficients {
  double intercept = 0.0;   // a = int mu beta
  Eigen::VectorXd slope;    // b_l = sqrt(lambda_l) int beta phi_l
};

Coefficients true_coefficients(const GroundTruth& truth, const Eigen::VectorXd& grid);

/// ||beta||_{L2} by trapezoid quadrature on `grid`.
double slope_norm(const GroundTruth& truth, const Eigen::VectorXd& grid);

/// T training rows followed by n_test test rows.
struct SimulatedDataset {
  CurvePanel panel;            // noisy Z
  Eigen::MatrixXd signal;      // X(s_j) without noise
  Eigen::MatrixXd scores;      // generating f_t
  Eigen::MatrixXd loadings;    // B(s) = (sqrt(lambda_l) phi_l(s_j))
  Eigen::VectorXd response;    // Y_t for all rows
  Eigen::VectorXd oracle;      // a + b' f_t for the test rows
  Coefficients coefficients;
  int n_train = 0;
  int n_test = 0;
  std::uint64_t seed = 0;

  CurvePanel training_panel() const;
  Eigen::VectorXd training_response() const;
  /// Training rows plus test row j (0-based), i.e. a T+1 row panel.
  CurvePanel panel_with_test(int j) const;
};

/// Draws a dataset on the equidistant p-point grid of the truth's domain.
/// Scores, measurement noise and regression errors come from separate
/// random streams derived from `seed`, so the oracle depends on the seed
/// alone.
SimulatedDataset simulate(const GroundTruth& truth, int n_train, int p, int n_test,
                          std::uint64_t seed);

/// Mean squared difference between oracle values and predictions.
double sse(const Eigen::VectorXd& oracle, const Eigen::VectorXd& predictions);

struct Cell {
  int n_train = 0;
  int p = 0;
};

struct ReplicationRecord {
  int index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  double sse = 0.0;
  double l_hat = 0.0;  // median selected order over the test rows
  std::string error;
};

struct CellReport {
  Cell cell;
  double sigma_u = 0.0;
  double sigma_eps = 0.0;
  std::vector<ReplicationRecord> replications;
  double mean_sse = 0.0;
  double median_l_hat = 0.0;
  int replications_ok = 0;
  bool valid = false;  // at most 10% of replications failed
};

struct PredictionReport {
  std::vector<CellReport> cells;
  bool valid = false;
};

struct MonteCarloOptions {
  int n_test = 100;
  int l_max = 25;
  int threads = 0;  // 0: default_thread_count()
};

/// For every cell, runs `replications` simulate -> fit_predict -> sse
/// pipelines with seeds base_seed + replication index. Pipeline errors are
/// recorded per replication. Results do not depend on the thread count.
PredictionReport monte_carlo(const GroundTruth& truth, const std::vector<Cell>& cells,
                             int replications, std::uint64_t base_seed,
                             const MonteCarloOptions& options = {});

struct RotationRecord {
  Cell cell;
  int index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  double deviation = 0.0;  // ||H'H - I||_F
  std::string error;
};

/// For every cell and replication r, simulates T+1 curves with seed
/// base_seed + r, estimates the truth's number of factors and records the
/// rotation diagnostic against the generating scores and loadings. Records
/// are ordered by cell, then replication.
std::vector<RotationRecord> rotation_study(const GroundTruth& truth, const std::vector<Cell>& cells,
                                           int replications, std::uint64_t base_seed,
                                           int threads = 0);

/// FACTORPRED_THREADS if set to a positive integer, else the hardware concurrency.
int default_thread_count();

double median(std::vector<double> values);

}  // namespace factorpred
