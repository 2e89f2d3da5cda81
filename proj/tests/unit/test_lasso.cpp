#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "kof/errors.hpp"
#include "kof/lasso.hpp"

using namespace kof;
using kof::testing::gaussian;

namespace {

// Columns with X'X / T = I.
Eigen::MatrixXd orthonormal_design(Eigen::Index t, Eigen::Index p, std::uint64_t seed) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(t, p, seed));
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(t, p);
  return q * std::sqrt(static_cast<double>(t));
}

}  // namespace

TEST(Lasso, KktHoldsAlongThePath) {
  Eigen::MatrixXd x = gaussian(60, 30, 1);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(30);
  beta.head(4) << 2.0, -1.5, 1.0, 0.5;
  Eigen::VectorXd y = x * beta + gaussian(60, 1, 2).col(0);
  auto path = lasso_path(x, y);
  ASSERT_EQ(path.lambdas.size(), 100u);
  EXPECT_TRUE(path.converged);
  for (std::size_t k = 0; k < path.lambdas.size(); ++k) {
    EXPECT_LE(lasso_kkt_residual(x, y, path.coefficients[k], path.lambdas[k]), 1e-7) << k;
  }
  EXPECT_NEAR(path.lambdas.back() / path.lambdas.front(), 1e-3, 1e-12);
}

TEST(Lasso, FirstGridPointIsExactlyZero) {
  Eigen::MatrixXd x = gaussian(40, 10, 3);
  Eigen::VectorXd y = gaussian(40, 1, 4).col(0);
  auto path = lasso_path(x, y);
  EXPECT_EQ(path.coefficients.front().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_NEAR(path.lambdas.front(), (x.transpose() * y).cwiseAbs().maxCoeff() / 40.0, 1e-14);
}

TEST(Lasso, OrthogonalResponseNeverEnters) {
  Eigen::MatrixXd q = orthonormal_design(30, 4, 5);
  Eigen::VectorXd y = q.col(3);
  Eigen::MatrixXd x = q.leftCols(3);
  auto path = lasso_path(x, y);
  EXPECT_TRUE(path.lambdas.empty() || path.coefficients.back().cwiseAbs().maxCoeff() < 1e-12);
  EXPECT_LT(path.entry_lambda.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Lasso, SingleOrthonormalFeatureFollowsSoftThreshold) {
  const Eigen::Index t = 50;
  Eigen::MatrixXd q = orthonormal_design(t, 2, 6);
  Eigen::MatrixXd x = q.col(0);
  Eigen::VectorXd y = 2.0 * q.col(0) + 0.7 * q.col(1);  // X'y / T = 2
  auto path = lasso_path(x, y);
  ASSERT_NEAR(path.lambdas.front(), 2.0, 1e-12);
  // Entry at lambda_max itself is excluded (b = 0 there); next grid point.
  EXPECT_DOUBLE_EQ(path.entry_lambda(0), path.lambdas[1]);
  for (std::size_t k = 0; k < path.lambdas.size(); ++k) {
    EXPECT_NEAR(path.coefficients[k](0), std::max(2.0 - path.lambdas[k], 0.0), 1e-9);
  }
}

TEST(Lasso, EntryMatchesSoftThresholdOnOrthonormalDesign) {
  const Eigen::Index t = 80, p = 6;
  Eigen::MatrixXd x = orthonormal_design(t, p, 7);
  Eigen::VectorXd c(p);
  c << 3.0, -2.0, 1.2, 0.6, -0.3, 0.05;
  Eigen::VectorXd y = x * c;
  auto path = lasso_path(x, y);
  for (Eigen::Index j = 0; j < p; ++j) {
    // Closed form: b_j(lambda) != 0 iff lambda < |c_j|.
    double expect = 0.0;
    for (double l : path.lambdas) {
      if (l < std::abs(c(j)) - 1e-12) {
        expect = l;
        break;
      }
    }
    EXPECT_DOUBLE_EQ(path.entry_lambda(j), expect) << j;
  }
}

TEST(Lasso, CoefficientsShrinkTowardLeastSquares) {
  Eigen::MatrixXd x = gaussian(200, 5, 8);
  Eigen::VectorXd y = x * Eigen::VectorXd::LinSpaced(5, -1.0, 1.0) + 0.1 * gaussian(200, 1, 9).col(0);
  LassoOptions options;
  options.min_ratio = 1e-6;
  auto path = lasso_path(x, y, options);
  Eigen::VectorXd ols = x.colPivHouseholderQr().solve(y);
  EXPECT_LT((path.coefficients.back() - ols).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Lasso, RejectsBadInput) {
  Eigen::MatrixXd x = gaussian(10, 3, 10);
  Eigen::VectorXd y = gaussian(9, 1, 11).col(0);
  EXPECT_THROW(lasso_path(x, y), DomainError);
  LassoOptions options;
  options.grid_size = 5;
  EXPECT_THROW(lasso_path(x, gaussian(10, 1, 1).col(0), options), DomainError);
  x(0, 0) = std::nan("");
  EXPECT_THROW(lasso_path(x, gaussian(10, 1, 1).col(0)), DomainError);
}

TEST(Lasso, ZeroColumnStaysOut) {
  Eigen::MatrixXd x = gaussian(30, 4, 12);
  x.col(2).setZero();
  Eigen::VectorXd y = x.col(0) + x.col(1);
  auto path = lasso_path(x, y);
  EXPECT_EQ(path.entry_lambda(2), 0.0);
  for (const auto& b : path.coefficients) EXPECT_EQ(b(2), 0.0);
}
