#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "kof/errors.hpp"
#include "kof/huber.hpp"

using namespace kof;
using kof::testing::gaussian;

TEST(Huber, CleanLinearDataMatchesOls) {
  Eigen::MatrixXd x = gaussian(200, 3, 1);
  Eigen::VectorXd y = (x * Eigen::Vector3d(1.0, -2.0, 0.25)).array() + 0.5;
  auto fit = huber_fit(x, y);
  Eigen::VectorXd ols = ols_fit(x, y);
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.intercept, ols(0), 1e-6);
  for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(fit.coefficients(j), ols(j + 1), 1e-6);
}

TEST(Huber, GrossOutlierBarelyMovesTheFit) {
  const Eigen::Index t = 200;
  Eigen::MatrixXd x = gaussian(t, 2, 2);
  Eigen::VectorXd y = x * Eigen::Vector2d(1.0, -1.0) + gaussian(t, 1, 3).col(0);
  auto clean_fit = huber_fit(x, y);
  Eigen::VectorXd clean_ols = ols_fit(x, y);
  Eigen::VectorXd dirty = y;
  dirty(17) += 1000.0;
  auto robust = huber_fit(x, dirty);
  Eigen::VectorXd ols = ols_fit(x, dirty);
  const double ols_shift = (ols - clean_ols).tail(2).norm();
  const double huber_shift = (robust.coefficients - clean_fit.coefficients).norm();
  EXPECT_GT(ols_shift, 0.5);
  EXPECT_LT(huber_shift, 0.1 * ols_shift);
}

TEST(Huber, ConstantResponse) {
  Eigen::MatrixXd x = gaussian(30, 2, 4);
  Eigen::VectorXd y = Eigen::VectorXd::Constant(30, -0.75);
  auto fit = huber_fit(x, y);
  EXPECT_NEAR(fit.intercept, -0.75, 1e-12);
  EXPECT_LT(fit.coefficients.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(fit.converged);
}

TEST(Huber, RankDeficientDesignIsJittered) {
  Eigen::MatrixXd x = gaussian(50, 3, 5);
  x.col(2) = x.col(0);
  Eigen::VectorXd y = x.col(0) + 0.1 * gaussian(50, 1, 6).col(0);
  auto fit = huber_fit(x, y);
  EXPECT_TRUE(fit.jittered);
  EXPECT_TRUE(fit.coefficients.allFinite());
  EXPECT_NEAR(fit.coefficients(0) + fit.coefficients(2), 1.0, 0.1);
}

TEST(Huber, NeedsMoreRowsThanRegressors) {
  Eigen::MatrixXd x = gaussian(3, 3, 7);
  EXPECT_THROW(huber_fit(x, x.col(0)), DomainError);
}

TEST(Huber, MedianOfEvenAndOdd) {
  EXPECT_DOUBLE_EQ(median(Eigen::Vector3d(3.0, 1.0, 2.0)), 2.0);
  EXPECT_DOUBLE_EQ(median(Eigen::Vector4d(4.0, 1.0, 3.0, 2.0)), 2.5);
}
