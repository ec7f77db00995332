#include "gkdiff/errors.hpp"
#include "gkdiff/linalg.hpp"
#include "gkdiff/models.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace gkdiff;

TEST(Lyapunov, MatchesKroneckerSolveOnRandomHurwitzMatrices) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 5;
    Matrix A(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) A(i, j) = g(rng);
    }
    // Shift the spectrum into the left half-plane.
    const double shift = Eigen::EigenSolver<Matrix>(A).eigenvalues().real().maxCoeff();
    A -= (shift + 0.5) * Matrix::Identity(n, n);
    Matrix S(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) S(i, j) = g(rng);
    }
    const Matrix Q = S * S.transpose();
    const Matrix X = linalg::solve_lyapunov(A, Q);
    const Matrix ref = oracle::lyapunov_kron(A, Q);
    EXPECT_LT((X - ref).cwiseAbs().maxCoeff(), 1e-9 * (1.0 + ref.cwiseAbs().maxCoeff()));
    EXPECT_LT((X - X.transpose()).cwiseAbs().maxCoeff(), 1e-14 * (1.0 + X.norm()));
  }
}

TEST(Lyapunov, PsdFactorHandlesSingularMatrices) {
  Matrix P = Matrix::Zero(3, 3);
  P(0, 0) = 2.0;
  P(2, 2) = 1.0;
  const Matrix L = linalg::psd_factor(P);
  EXPECT_LT((L * L.transpose() - P).norm(), 1e-14);
}

TEST(Models, CatalogStationaryCovarianceIsIsotropic) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.2, 5.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double beta = u(rng);
    const std::vector<LinearGaussianModel> models{
        build_ou(u(rng), beta), build_magnetic(u(rng), u(rng), beta),
        build_gle({u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}, beta),
        build_genou(oracle::random_skew(4, rng), u(rng), u(rng), beta)};
    for (const auto& m : models) {
      const Matrix sigma = stationary_covariance(m).covariance();
      const Matrix expected = Matrix::Identity(m.state_dim(), m.state_dim()) / beta;
      EXPECT_LT((sigma - expected).cwiseAbs().maxCoeff(), 1e-12) << m.label();
    }
  }
}

TEST(Models, RejectsBadParametersWithFieldName) {
  try {
    build_ou(-1.0, 1.0);
    FAIL() << "expected ParameterError";
  } catch (const ParameterError& ex) {
    EXPECT_EQ(ex.field(), "gamma");
  }
  EXPECT_THROW(build_ou(1.0, 0.0), ParameterError);
  EXPECT_THROW(build_magnetic(1.0, 0.0, 1.0), ParameterError);
  EXPECT_THROW(build_gle({1.0}, {1.0, 2.0}, 1.0), ParameterError);
  EXPECT_THROW(build_gle({}, {}, 1.0), ParameterError);
  EXPECT_THROW(build_gle({1.0}, {-1.0}, 1.0), ParameterError);
  Matrix not_skew = reference_skew_matrix();
  not_skew(0, 1) = 2.0;
  EXPECT_THROW(build_genou(not_skew, 1.0, 1.0, 1.0), ParameterError);
  EXPECT_THROW(build_genou(Matrix::Zero(2, 3), 1.0, 1.0, 1.0), ParameterError);
}

TEST(Models, NonHurwitzDriftIsNotErgodic) {
  Matrix B(1, 1);
  B << 0.5;
  EXPECT_THROW(LinearGaussianModel("custom", OuParams{}, B, Matrix::Identity(1, 1), 1.0,
                                   Matrix::Identity(1, 1)),
               ErgodicityError);
  EXPECT_FALSE(is_hurwitz(B));
}

TEST(Models, ShapeMismatchIsRejected) {
  EXPECT_THROW(LinearGaussianModel("custom", OuParams{}, -Matrix::Identity(2, 2),
                                   Matrix::Identity(3, 3), 1.0, Matrix::Identity(2, 2)),
               DimensionError);
  EXPECT_THROW(LinearGaussianModel("custom", OuParams{}, -Matrix::Identity(2, 2),
                                   Matrix::Identity(2, 2), 1.0, Matrix::Identity(2, 3)),
               DimensionError);
}

TEST(Models, ReferenceSkewMatrixHasNullDirection) {
  const Matrix J = reference_skew_matrix();
  EXPECT_EQ((J + J.transpose()).norm(), 0.0);
  EXPECT_EQ((J * reference_null_direction()).norm(), 0.0);
}

TEST(Models, FrictionRescalingKeepsKernelShape) {
  const LinearGaussianModel gle = build_gle({1.0, 2.0}, {1.0, 4.0}, 2.0);
  EXPECT_DOUBLE_EQ(friction(gle), 2.0);
  const LinearGaussianModel scaled = with_friction(gle, 8.0);
  EXPECT_NEAR(friction(scaled), 8.0, 1e-12);
  const auto& p = std::get<GleParams>(scaled.params());
  EXPECT_NEAR(p.lambdas[1] / p.lambdas[0], 2.0, 1e-14);
  EXPECT_EQ(p.alphas, (std::vector<double>{1.0, 4.0}));

  EXPECT_DOUBLE_EQ(friction(with_friction(build_magnetic(1.0, 1.0, 1.0), 3.0)), 3.0);
  EXPECT_DOUBLE_EQ(dissipation_scale(build_genou(reference_skew_matrix(), 1.0, 7.0, 1.0)), 7.0);
  EXPECT_DOUBLE_EQ(dissipation_scale(gle), 1.0);
  EXPECT_THROW(with_friction(gle, 0.0), ParameterError);
}

TEST(Models, GaussianMeasureValidatesCovariance) {
  Matrix bad(2, 2);
  bad << 1, 2, 2, 1;
  EXPECT_THROW(GaussianMeasure{bad}, Error);
  Matrix asym(2, 2);
  asym << 1, 0.5, 0, 1;
  EXPECT_THROW(GaussianMeasure{asym}, Error);
}
