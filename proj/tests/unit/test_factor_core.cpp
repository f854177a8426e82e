#include <gtest/gtest.h>

#include <random>

#include "../support/oracles.hpp"
#include "factorpred/errors.hpp"
#include "factorpred/factor_core.hpp"
#include "factorpred/linalg.hpp"

using namespace factorpred;

namespace {

CurvePanel panel_of(const Eigen::MatrixXd& values) { return CurvePanel::on_equidistant_grid(values); }

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no factorpred::Error thrown";
  return ErrorCode::kConfig;
}

// mu + F B' with F centered and orthonormal in sample.
Eigen::MatrixXd exact_factor_panel(const Eigen::MatrixXd& f, const Eigen::MatrixXd& b,
                                   std::mt19937_64& rng) {
  Eigen::MatrixXd z = f * b.transpose();
  z.rowwise() += oracle::gaussian(1, b.rows(), rng).row(0);
  return z;
}

}  // namespace

TEST(EstimateMean, TwoRows) {
  Eigen::MatrixXd v(2, 2);
  v << 1, 2, 3, 4;
  EXPECT_TRUE(estimate_mean(panel_of(v)).isApprox(Eigen::Vector2d(2, 3)));
}

TEST(EstimateMean, IdenticalRowsGiveTheRow) {
  Eigen::RowVector3d r(0.5, -1.25, 7.0);
  Eigen::MatrixXd v = r.replicate(4, 1);
  EXPECT_EQ(estimate_mean(panel_of(v)), r.transpose());
}

TEST(EstimateMean, MatchesColumnSumLoop) {
  std::mt19937_64 rng(11);
  const Eigen::MatrixXd v = oracle::gaussian(5, 3, rng);
  EXPECT_LT((estimate_mean(panel_of(v)) - oracle::column_means(v)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CurvePanelValidation, RejectsNonFiniteWithCoordinates) {
  Eigen::MatrixXd v = Eigen::MatrixXd::Ones(3, 2);
  v(1, 1) = std::nan("");
  try {
    panel_of(v);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("column 2"), std::string::npos) << e.what();
  }
}

TEST(CurvePanelValidation, ShapeAndGrid) {
  EXPECT_EQ(code_of([] { panel_of(Eigen::MatrixXd::Ones(1, 3)); }), ErrorCode::kDegeneratePanel);
  EXPECT_EQ(code_of([] { CurvePanel(Eigen::MatrixXd::Ones(3, 2), Eigen::Vector3d(0, 1, 2)); }),
            ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([] { CurvePanel(Eigen::MatrixXd::Ones(3, 2), Eigen::Vector2d(1, 1)); }),
            ErrorCode::kInvalidInput);
}

TEST(Center, Example) {
  Eigen::MatrixXd v(2, 2);
  v << 1, 2, 3, 4;
  Eigen::MatrixXd expected(2, 2);
  expected << -1, -1, 1, 1;
  EXPECT_EQ(center(panel_of(v), Eigen::Vector2d(2, 3)).values(), expected);
}

TEST(Center, ZeroMeanIsIdentity) {
  Eigen::MatrixXd v(2, 3);
  v << 1, -2, 0.5, -1, 2, -0.5;
  EXPECT_EQ(center(panel_of(v), Eigen::Vector3d::Zero()).values(), v);
}

TEST(Center, ColumnSumsVanish) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd v = 100.0 * oracle::gaussian(17, 9, rng);
    const CurvePanel p = panel_of(v);
    const Eigen::MatrixXd c = center(p, estimate_mean(p)).values();
    const double bound = 1e-9 * 17 * v.cwiseAbs().maxCoeff();
    EXPECT_LT(c.colwise().sum().cwiseAbs().maxCoeff(), bound);
  }
}

TEST(Center, RejectsWrongLength) {
  EXPECT_EQ(code_of([] { center(panel_of(Eigen::MatrixXd::Ones(3, 2)), Eigen::Vector3d::Zero()); }),
            ErrorCode::kDimensionMismatch);
}

TEST(Gram, TwoByTwo) {
  Eigen::MatrixXd v(2, 2);
  v << 1, 1, -1, -1;
  Eigen::MatrixXd expected(2, 2);
  expected << 1, -1, -1, 1;
  EXPECT_TRUE(gram(panel_of(v)).isApprox(expected));
}

TEST(Gram, ZeroPanel) {
  EXPECT_EQ(gram(panel_of(Eigen::MatrixXd::Zero(3, 4))), Eigen::MatrixXd::Zero(3, 3));
}

TEST(Gram, MatchesDoubleLoop) {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd v = oracle::gaussian(6, 4, rng);
  EXPECT_LT((gram(panel_of(v)) - oracle::gram_loops(v)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Gram, SymmetricPositiveSemidefinite) {
  std::mt19937_64 rng(7);
  for (const auto [n, p] : {std::pair{8, 3}, std::pair{5, 12}, std::pair{12, 12}}) {
    const CurvePanel raw = panel_of(oracle::gaussian(n, p, rng));
    const Eigen::MatrixXd g = gram(center(raw, estimate_mean(raw)));
    EXPECT_EQ(g, g.transpose());
    const auto eig = oracle::jacobi_eigen(g);
    EXPECT_GE(eig.values.minCoeff(), -1e-10 * eig.values[0]);
  }
}

TEST(EstimateFactors, RankOneExample) {
  Eigen::MatrixXd v(2, 2);
  v << 1, 1, -1, -1;
  const FactorFit fit = estimate_factors(panel_of(v), 1);
  ASSERT_EQ(fit.scores.rows(), 2);
  EXPECT_NEAR(fit.scores(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(fit.scores(1, 0), -1.0, 1e-12);
  EXPECT_NEAR(fit.eigenvalues[0], 2.0, 1e-12);
  EXPECT_EQ(fit.order, 1);
  EXPECT_EQ(fit.n_obs, 2);
}

TEST(EstimateFactors, RecoversTrueFactorSpace) {
  std::mt19937_64 rng(13);
  for (const auto [n, p] : {std::pair{20, 8}, std::pair{9, 30}}) {
    const Eigen::MatrixXd f = oracle::centered_orthonormal(n, 3, rng);
    const Eigen::MatrixXd b = oracle::gaussian(p, 3, rng);
    const Eigen::MatrixXd z = exact_factor_panel(f, b, rng);
    const FactorFit fit = estimate_factors(panel_of(z), 3);
    EXPECT_LT(oracle::subspace_gap(fit.scores, f), 1e-8);

    // Same subspace as the leading eigenvectors of a full Jacobi decomposition.
    Eigen::MatrixXd c = z;
    c.rowwise() -= oracle::column_means(z).transpose();
    const auto eig = oracle::jacobi_eigen(oracle::gram_loops(c));
    EXPECT_LT(oracle::subspace_gap(fit.scores, eig.vectors.leftCols(3)), 1e-8);
  }
}

TEST(EstimateFactors, EigenvaluesMatchFullDecomposition) {
  std::mt19937_64 rng(17);
  const Eigen::MatrixXd z = oracle::gaussian(10, 4, rng);
  const FactorFit fit = estimate_factors(panel_of(z), 2);
  Eigen::MatrixXd c = z;
  c.rowwise() -= oracle::column_means(z).transpose();
  const auto eig = oracle::jacobi_eigen(oracle::gram_loops(c));
  EXPECT_LT((fit.eigenvalues - eig.values.head(2)).cwiseAbs().maxCoeff(), 1e-10);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> reference(oracle::gram_loops(c));
  EXPECT_LT((fit.eigenvalues - reference.eigenvalues().reverse().head(2)).cwiseAbs().maxCoeff(),
            1e-10);
}

TEST(EstimateFactors, GramAndCovarianceRoutesAgree) {
  std::mt19937_64 rng(19);
  for (const auto [n, p, order] : {std::tuple{30, 7, 4}, std::tuple{12, 25, 5}, std::tuple{60, 60, 6}}) {
    const CurvePanel panel = panel_of(oracle::gaussian(n, p, rng));
    const FactorFit a = estimate_factors(panel, order, EigenRoute::kGram);
    const FactorFit b = estimate_factors(panel, order, EigenRoute::kCovariance);
    EXPECT_LT((a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff(), 1e-10 * a.eigenvalues[0]);
    EXPECT_LT((a.scores - b.scores).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((a.mean - b.mean).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(EstimateFactors, OrthonormalityAndOrdering) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> dim(2, 40);
  for (int rep = 0; rep < 60; ++rep) {
    const int n = dim(rng), p = dim(rng);
    const int order = std::uniform_int_distribution<int>(1, std::min(n - 1, p))(rng);
    const Eigen::MatrixXd z = oracle::gaussian(n, p, rng);
    for (auto route : {EigenRoute::kAuto, EigenRoute::kGram, EigenRoute::kCovariance}) {
      const FactorFit fit = estimate_factors(panel_of(z), order, route);
      EXPECT_LT(orthonormality_error(fit), 1e-10);
      EXPECT_GT(fit.eigenvalues[order - 1], 0.0);
      for (int l = 1; l < order; ++l) EXPECT_GE(fit.eigenvalues[l - 1], fit.eigenvalues[l]);
    }
  }
}

TEST(EstimateFactors, LargePanelsStayOrthonormal) {
  std::mt19937_64 rng(29);
  for (const auto [n, p] : {std::pair{1001, 400}, std::pair{300, 500}}) {
    Eigen::MatrixXd z = oracle::gaussian(n, p, rng);
    z += oracle::gaussian(n, 3, rng) * 5.0 * oracle::gaussian(3, p, rng);
    const FactorFit fit = estimate_factors(panel_of(z), 25);
    EXPECT_LT(orthonormality_error(fit), 1e-10);
  }
}

TEST(EstimateFactors, SignConvention) {
  std::mt19937_64 rng(31);
  const FactorFit fit = estimate_factors(panel_of(oracle::gaussian(15, 6, rng)), 4);
  for (Eigen::Index c = 0; c < fit.scores.cols(); ++c) {
    Eigen::Index arg = 0;
    fit.scores.col(c).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(fit.scores(arg, c), 0.0);
  }
}

TEST(EstimateFactors, BitwiseDeterministic) {
  std::mt19937_64 rng(37);
  const CurvePanel panel = panel_of(oracle::gaussian(40, 50, rng));
  const FactorFit a = estimate_factors(panel, 5);
  const FactorFit b = estimate_factors(panel, 5);
  EXPECT_EQ(a.scores, b.scores);
  EXPECT_EQ(a.eigenvalues, b.eigenvalues);
}

TEST(EstimateFactors, RankDeficiencyNamesEigenvalue) {
  std::mt19937_64 rng(41);
  const Eigen::MatrixXd z = oracle::gaussian(10, 2, rng) * oracle::gaussian(2, 6, rng);
  try {
    estimate_factors(panel_of(z), 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRankDeficient);
    EXPECT_NE(std::string(e.what()).find("eigenvalue 3"), std::string::npos) << e.what();
  }
  EXPECT_NO_THROW(estimate_factors(panel_of(z), 2));
}

TEST(EstimateFactors, ConstantPanelIsDegenerate) {
  const Eigen::MatrixXd z = Eigen::RowVector3d(1, 2, 3).replicate(5, 1);
  EXPECT_EQ(code_of([&] { estimate_factors(panel_of(z), 1); }), ErrorCode::kDegeneratePanel);
}

TEST(EstimateFactors, OrderOutOfRange) {
  const Eigen::MatrixXd z = Eigen::MatrixXd::Random(5, 3);
  EXPECT_EQ(code_of([&] { estimate_factors(panel_of(z), 0); }), ErrorCode::kInvalidOrder);
  EXPECT_EQ(code_of([&] { estimate_factors(panel_of(z), 4); }), ErrorCode::kInvalidOrder);
}

TEST(EstimateFactors, SubspaceInvariantUnderFactorRotation) {
  std::mt19937_64 rng(43);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd f = oracle::gaussian(40, 3, rng);
    const Eigen::MatrixXd g = oracle::random_orthogonal(3, rng);
    const Eigen::MatrixXd b = oracle::gaussian(15, 3, rng);
    const Eigen::MatrixXd z1 = f * b.transpose();
    const Eigen::MatrixXd z2 = (f * g.transpose()) * b.transpose();
    const FactorFit a = estimate_factors(panel_of(z1), 3);
    const FactorFit c = estimate_factors(panel_of(z2), 3);
    EXPECT_LT(oracle::subspace_gap(a.scores, c.scores), 1e-8);
  }
}

TEST(AugmentedEstimator, MatchesDirectFit) {
  std::mt19937_64 rng(47);
  for (const auto [n, p] : {std::pair{30, 8}, std::pair{8, 30}, std::pair{50, 49}}) {
    const Eigen::MatrixXd train = oracle::gaussian(n, p, rng);
    const Eigen::VectorXd row = oracle::gaussian(p, 1, rng);
    const AugmentedFactorEstimator est(panel_of(train));
    const FactorFit incremental = est.fit_with(row, 4);
    const FactorFit direct = estimate_factors(est.augmented(row), 4);
    EXPECT_LT((incremental.scores - direct.scores).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((incremental.eigenvalues - direct.eigenvalues).cwiseAbs().maxCoeff(),
              1e-10 * direct.eigenvalues[0]);
    EXPECT_LT((incremental.mean - direct.mean).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(orthonormality_error(incremental), 1e-10);
  }
}

TEST(AugmentedEstimator, RejectsBadRow) {
  const AugmentedFactorEstimator est(panel_of(Eigen::MatrixXd::Random(20, 4)));
  EXPECT_EQ(code_of([&] { est.fit_with(Eigen::VectorXd::Zero(3), 1); }),
            ErrorCode::kDimensionMismatch);
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(4);
  bad[2] = std::numeric_limits<double>::infinity();
  EXPECT_EQ(code_of([&] { est.fit_with(bad, 1); }), ErrorCode::kInvalidInput);
}

TEST(ComputeRotation, RankOneIsPlusOrMinusOne) {
  std::mt19937_64 rng(53);
  const Eigen::MatrixXd f = oracle::centered_orthonormal(25, 1, rng);
  Eigen::VectorXd b = oracle::gaussian(7, 1, rng);
  const double lambda = b.squaredNorm();
  const Eigen::MatrixXd z = exact_factor_panel(f, b, rng);
  const FactorFit fit = estimate_factors(panel_of(z), 1);
  const RotationDiagnostic rd = compute_rotation(fit, f, b);
  EXPECT_NEAR(std::abs(rd.h_matrix(0, 0)), 1.0, 1e-8);
  EXPECT_LT(rd.deviation, 1e-8);
  EXPECT_NEAR(fit.eigenvalues[0], lambda, 1e-8 * lambda);
}

TEST(ComputeRotation, OrthogonalWhenLoadingsAreOrthonormal) {
  std::mt19937_64 rng(59);
  const Eigen::MatrixXd f = oracle::centered_orthonormal(30, 3, rng);
  const Eigen::MatrixXd b = oracle::random_orthogonal(9, rng).leftCols(3);
  const FactorFit fit = estimate_factors(panel_of(f * b.transpose()), 3);
  const RotationDiagnostic rd = compute_rotation(fit, f, b);
  EXPECT_LT(rd.deviation, 1e-8);
  EXPECT_LT((rd.h_matrix * rd.h_matrix.transpose() - Eigen::Matrix3d::Identity()).norm(), 1e-8);
  EXPECT_GE(rd.deviation, 0.0);
}

TEST(ComputeRotation, RejectsMismatchedShapes) {
  std::mt19937_64 rng(61);
  const FactorFit fit = estimate_factors(panel_of(oracle::gaussian(12, 5, rng)), 2);
  EXPECT_EQ(code_of([&] { compute_rotation(fit, Eigen::MatrixXd::Zero(12, 3), Eigen::MatrixXd::Zero(5, 2)); }),
            ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([&] { compute_rotation(fit, Eigen::MatrixXd::Zero(11, 2), Eigen::MatrixXd::Zero(5, 2)); }),
            ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([&] { compute_rotation(fit, Eigen::MatrixXd::Zero(12, 2), Eigen::MatrixXd::Zero(4, 2)); }),
            ErrorCode::kDimensionMismatch);
  FactorFit singular = fit;
  singular.eigenvalues[1] = 0.0;
  EXPECT_EQ(code_of([&] { compute_rotation(singular, Eigen::MatrixXd::Zero(12, 2), Eigen::MatrixXd::Zero(5, 2)); }),
            ErrorCode::kRankDeficient);
}

TEST(TopEigenpairs, MatchesJacobiOnLargerMatrices) {
  std::mt19937_64 rng(67);
  for (int n : {8, 120, 260}) {
    const Eigen::MatrixXd a = oracle::gaussian(n, n / 2 + 1, rng);
    const Eigen::MatrixXd s = a * a.transpose();
    const EigenPairs top = top_eigenpairs(s, 6);
    const auto ref = oracle::jacobi_eigen(s);
    EXPECT_LT((top.values - ref.values.head(6)).cwiseAbs().maxCoeff(), 1e-10 * ref.values[0]);
    const Eigen::MatrixXd resid = s * top.vectors - top.vectors * top.values.asDiagonal();
    EXPECT_LT(resid.cwiseAbs().maxCoeff(), 1e-10 * ref.values[0]);
  }
}
