#include "factorpred/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <utility>

#include "factorpred/errors.hpp"

namespace factorpred {

namespace {

// Independent stream per purpose: scores, measurement noise, regression errors.
enum class Stream : std::uint32_t { kScores = 1, kNoise = 2, kErrors = 3 };

std::mt19937_64 make_stream(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

Eigen::VectorXd evaluate(const RealFunction& fn, const Eigen::VectorXd& grid) {
  Eigen::VectorXd out(grid.size());
  for (Eigen::Index j = 0; j < grid.size(); ++j) out[j] = fn(grid[j]);
  return out;
}

GroundTruth fourier_truth(int order, double scale, SlopeKind slope, double sigma_u,
                          double sigma_eps, double rho) {
  GroundTruth truth;
  truth.domain = slope == SlopeKind::kSmooth ? Domain{0.0, 1.0} : Domain{0.0, 24.0};
  const Domain d = truth.domain;
  for (int l = 1; l <= order; ++l) {
    truth.eigenvalues.push_back(scale * d.length() / (static_cast<double>(l) * l));
  }
  truth.eigenfunctions = fourier_basis(order, d);
  truth.mean_fn = [d](double s) {
    const double u = (s - d.lo) / d.length();
    return 1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * u);
  };
  if (slope == SlopeKind::kSmooth) {
    truth.slope_fn = [](double s) { return beta_smooth(s); };
  } else {
    truth.slope_fn = [](double s) { return beta_rough(s); };
  }
  truth.sigma_u = sigma_u;
  truth.sigma_eps = sigma_eps;
  truth.rho = rho;
  return truth;
}

}  // namespace

void GroundTruth::validate() const {
  if (!(domain.hi > domain.lo)) throw Error(ErrorCode::kInvalidInput, "empty domain");
  if (eigenfunctions.size() != eigenvalues.size()) {
    throw Error(ErrorCode::kInvalidInput, "eigenvalue and eigenfunction counts differ");
  }
  if (!mean_fn || !slope_fn) {
    throw Error(ErrorCode::kInvalidInput, "mean and slope functions are required");
  }
  for (std::size_t l = 0; l < eigenvalues.size(); ++l) {
    if (!eigenfunctions[l]) {
      throw Error(ErrorCode::kInvalidInput, "eigenfunction " + std::to_string(l + 1) + " missing");
    }
    if (!(eigenvalues[l] >= 0.0) || (l > 0 && eigenvalues[l] > eigenvalues[l - 1])) {
      throw Error(ErrorCode::kInvalidInput, "eigenvalues must be non-negative and non-increasing");
    }
  }
  if (!(sigma_u >= 0.0) || !(sigma_eps >= 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "noise levels must be non-negative");
  }
  if (!(rho >= 0.0 && rho <= 0.9)) {
    throw Error(ErrorCode::kInvalidInput, "rho must lie in [0, 0.9]");
  }
}

double beta_smooth(double s) {
  const double v = std::sin(2.0 * std::numbers::pi * s * s * s);
  return 10.0 * v * v * v;
}

double beta_rough(double s, double x0, double eps) {
  const double height = 1.0 / (eps * eps);
  if (s >= x0 - eps && s < x0) return -height;
  if (s >= x0 && s <= x0 + eps) return height;
  return 0.0;
}

std::vector<RealFunction> fourier_basis(int count, Domain domain) {
  std::vector<RealFunction> basis;
  const double norm = 1.0 / std::sqrt(domain.length());
  for (int l = 0; l < count; ++l) {
    if (l == 0) {
      basis.emplace_back([norm](double) { return norm; });
      continue;
    }
    const double freq = 2.0 * std::numbers::pi * static_cast<double>((l + 1) / 2);
    const bool use_sin = l % 2 == 1;
    basis.emplace_back([=](double s) {
      const double u = (s - domain.lo) / domain.length();
      return norm * std::numbers::sqrt2 * (use_sin ? std::sin(freq * u) : std::cos(freq * u));
    });
  }
  return basis;
}

GroundTruth default_ground_truth(SlopeKind slope, double sigma_u, double sigma_eps, double rho) {
  return fourier_truth(21, 1.0, slope, sigma_u, sigma_eps, rho);
}

GroundTruth low_rank_ground_truth(int order, double scale, SlopeKind slope, double sigma_u,
                                  double sigma_eps) {
  return fourier_truth(order, scale, slope, sigma_u, sigma_eps, 0.0);
}

GroundTruth diagnostic_ground_truth(int order, SlopeKind slope, double sigma_u,
                                    double sigma_eps) {
  return low_rank_ground_truth(order, kDiagnosticScale, slope, sigma_u, sigma_eps);
}

double trapezoid(const Eigen::VectorXd& grid, const Eigen::VectorXd& values) {
  if (grid.size() != values.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "quadrature grid and values differ in length");
  }
  double total = 0.0;
  for (Eigen::Index j = 1; j < grid.size(); ++j) {
    total += 0.5 * (grid[j] - grid[j - 1]) * (values[j] + values[j - 1]);
  }
  return total;
}

Eigen::VectorXd quadrature_grid(const Domain& domain, Eigen::Index p) {
  const Eigen::Index n = std::max<Eigen::Index>(4001, 10 * (p - 1) + 1);
  return equidistant_grid(n, domain.lo, domain.hi);
}

Coefficients true_coefficients(const GroundTruth& truth, const Eigen::VectorXd& grid) {
  truth.validate();
  const Eigen::VectorXd beta = evaluate(truth.slope_fn, grid);
  Coefficients out;
  out.intercept = trapezoid(grid, evaluate(truth.mean_fn, grid).cwiseProduct(beta));
  out.slope.resize(truth.true_order());
  for (int l = 0; l < truth.true_order(); ++l) {
    const Eigen::VectorXd phi = evaluate(truth.eigenfunctions[l], grid);
    out.slope[l] = std::sqrt(truth.eigenvalues[l]) * trapezoid(grid, beta.cwiseProduct(phi));
  }
  return out;
}

double slope_norm(const GroundTruth& truth, const Eigen::VectorXd& grid) {
  const Eigen::VectorXd beta = evaluate(truth.slope_fn, grid);
  return std::sqrt(trapezoid(grid, beta.cwiseAbs2()));
}

CurvePanel SimulatedDataset::training_panel() const {
  return CurvePanel(panel.values().topRows(n_train), panel.grid());
}

Eigen::VectorXd SimulatedDataset::training_response() const {
  return response.head(n_train);
}

CurvePanel SimulatedDataset::panel_with_test(int j) const {
  if (j < 0 || j >= n_test) {
    throw Error(ErrorCode::kInvalidInput, "test row " + std::to_string(j) + " out of range");
  }
  Eigen::MatrixXd values(n_train + 1, panel.n_points());
  values.topRows(n_train) = panel.values().topRows(n_train);
  values.row(n_train) = panel.values().row(n_train + j);
  return CurvePanel(std::move(values), panel.grid());
}

SimulatedDataset simulate(const GroundTruth& truth, int n_train, int p, int n_test,
                          std::uint64_t seed) {
  truth.validate();
  if (n_train < 10 || p < 4 || n_test < 0) {
    throw Error(ErrorCode::kInvalidInput, "simulation needs T >= 10, p >= 4, n_test >= 0; got T = " +
                                              std::to_string(n_train) + ", p = " +
                                              std::to_string(p) + ", n_test = " +
                                              std::to_string(n_test));
  }
  const int rows = n_train + n_test;
  const int order = truth.true_order();
  const Eigen::VectorXd grid = equidistant_grid(p, truth.domain.lo, truth.domain.hi);

  Eigen::MatrixXd loadings(p, order);
  for (int l = 0; l < order; ++l) {
    loadings.col(l) = std::sqrt(truth.eigenvalues[l]) * evaluate(truth.eigenfunctions[l], grid);
  }
  const Eigen::VectorXd mean = evaluate(truth.mean_fn, grid);

  std::normal_distribution<double> normal(0.0, 1.0);
  auto score_rng = make_stream(seed, Stream::kScores);
  Eigen::MatrixXd scores(rows, order);
  for (int t = 0; t < rows; ++t) {
    for (int l = 0; l < order; ++l) scores(t, l) = normal(score_rng);
  }
  Eigen::MatrixXd signal = scores * loadings.transpose();
  signal.rowwise() += mean.transpose();

  auto noise_rng = make_stream(seed, Stream::kNoise);
  const double innovation = truth.sigma_u * std::sqrt(1.0 - truth.rho * truth.rho);
  Eigen::MatrixXd noisy = signal;
  for (int t = 0; t < rows; ++t) {
    double u = truth.sigma_u * normal(noise_rng);
    noisy(t, 0) += u;
    for (int j = 1; j < p; ++j) {
      u = truth.rho * u + innovation * normal(noise_rng);
      noisy(t, j) += u;
    }
  }

  Coefficients coef = true_coefficients(truth, quadrature_grid(truth.domain, p));
  const Eigen::VectorXd clean = (scores * coef.slope).array() + coef.intercept;

  auto error_rng = make_stream(seed, Stream::kErrors);
  Eigen::VectorXd response(rows);
  for (int t = 0; t < rows; ++t) response[t] = clean[t] + truth.sigma_eps * normal(error_rng);

  SimulatedDataset out{CurvePanel(std::move(noisy), grid),
                       std::move(signal),
                       std::move(scores),
                       std::move(loadings),
                       std::move(response),
                       clean.tail(n_test),
                       std::move(coef),
                       n_train,
                       n_test,
                       seed};
  return out;
}

double sse(const Eigen::VectorXd& oracle, const Eigen::VectorXd& predictions) {
  if (oracle.size() != predictions.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "oracle has " + std::to_string(oracle.size()) + " values, predictions " +
                    std::to_string(predictions.size()));
  }
  if (oracle.size() == 0) throw Error(ErrorCode::kInvalidInput, "SSE of an empty test block");
  return (oracle - predictions).squaredNorm() / static_cast<double>(oracle.size());
}

double median(std::vector<double> values) {
  if (values.empty()) return std::nan("");
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace factorpred
