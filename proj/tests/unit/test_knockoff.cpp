#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "kof/errors.hpp"
#include "kof/knockoff.hpp"
#include "kof/linalg.hpp"

using namespace kof;
using kof::testing::gaussian;

namespace {

Eigen::MatrixXd correlated(Eigen::Index rows, const Eigen::MatrixXd& sigma, std::uint64_t seed) {
  Eigen::MatrixXd z = gaussian(rows, sigma.rows(), seed);
  Eigen::MatrixXd l = sigma.llt().matrixL();
  return z * l.transpose();
}

MomentEstimate known(const Eigen::MatrixXd& sigma) {
  MomentEstimate m;
  m.mean = Eigen::VectorXd::Zero(sigma.rows());
  m.covariance = sigma;
  return m;
}

Eigen::MatrixXd cross_moment(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.transpose() * b / static_cast<double>(a.rows());
}

}  // namespace

TEST(Moments, IndependentColumnsHaveSmallCovariance) {
  auto est = estimate_moments(gaussian(100000, 2, 1));
  EXPECT_LT(std::abs(est.covariance(0, 1)), 0.02);
  EXPECT_EQ(est.shrinkage_used, 0.0);
}

TEST(Moments, DuplicatedColumnForcesShrinkage) {
  Eigen::MatrixXd x = gaussian(200, 3, 2);
  x.col(2) = x.col(0);
  auto est = estimate_moments(x);
  EXPECT_GT(est.shrinkage_used, 0.0);
  const double floor = kEigenFloorFraction * est.covariance.trace() / 3.0;
  EXPECT_GE(min_eigenvalue(est.covariance), floor * (1.0 - 1e-6));
}

TEST(Moments, SingleUnitColumn) {
  auto est = estimate_moments(gaussian(50000, 1, 3));
  ASSERT_EQ(est.covariance.rows(), 1);
  EXPECT_NEAR(est.covariance(0, 0), 1.0, 0.03);
  EXPECT_EQ(est.shrinkage_used, 0.0);
}

TEST(Moments, ZeroVarianceColumnIsNamed) {
  Eigen::MatrixXd x = gaussian(20, 3, 4);
  x.col(1).setConstant(0.5);
  try {
    estimate_moments(x);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("column 1"), std::string::npos);
  }
}

TEST(SolveS, IdentityGivesOnes) {
  Eigen::VectorXd s = solve_s_equi(Eigen::MatrixXd::Identity(3, 3));
  EXPECT_TRUE(s.isApprox(Eigen::VectorXd::Ones(3), 1e-12));
}

TEST(SolveS, TwoByTwoCorrelations) {
  Eigen::MatrixXd c(2, 2);
  c << 1.0, 0.9, 0.9, 1.0;
  Eigen::VectorXd s = solve_s_equi(c);
  EXPECT_NEAR(s(0), 0.2, 1e-12);
  EXPECT_NEAR(s(1), 0.2, 1e-12);
  c << 1.0, -0.5, -0.5, 1.0;
  s = solve_s_equi(c);
  EXPECT_NEAR(s(0), 1.0, 1e-12);
}

TEST(SolveS, ScalesWithVariance) {
  Eigen::MatrixXd c(2, 2);
  c << 4.0, 1.8, 1.8, 1.0;  // correlation 0.9
  Eigen::VectorXd s = solve_s_equi(c);
  EXPECT_NEAR(s(0), 0.8, 1e-12);
  EXPECT_NEAR(s(1), 0.2, 1e-12);
}

TEST(SolveS, RejectsIndefinite) {
  Eigen::MatrixXd c(2, 2);
  c << 1.0, 1.0, 1.0, 1.0;
  EXPECT_THROW(solve_s_equi(c), DomainError);
}

TEST(Knockoffs, IdentityCovarianceGivesFreshGaussians) {
  const Eigen::Index t = 100000;
  Eigen::MatrixXd x = gaussian(t, 3, 5);
  auto k = sample_knockoffs(x, known(Eigen::MatrixXd::Identity(3, 3)), Eigen::VectorXd::Ones(3), 6);
  Eigen::MatrixXd xk = cross_moment(x, k.knockoffs);
  Eigen::MatrixXd kk = cross_moment(k.knockoffs, k.knockoffs);
  EXPECT_LT(xk.cwiseAbs().maxCoeff(), 0.02);
  EXPECT_LT((kk - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 0.02);
  EXPECT_LT(k.knockoffs.colwise().mean().cwiseAbs().maxCoeff(), 0.02);
}

TEST(Knockoffs, ZeroDecouplingCopiesOriginals) {
  Eigen::MatrixXd x = gaussian(100, 4, 7);
  auto k = sample_knockoffs(x, estimate_moments(x), Eigen::VectorXd::Zero(4), 8);
  EXPECT_EQ(k.knockoffs, x);
}

TEST(Knockoffs, CrossCovarianceMatchesTarget) {
  Eigen::MatrixXd sigma(3, 3);
  sigma << 1.0, 0.6, 0.3, 0.6, 1.0, 0.5, 0.3, 0.5, 1.0;
  Eigen::MatrixXd x = correlated(100000, sigma, 9);
  Eigen::VectorXd s = solve_s_equi(sigma);
  auto k = sample_knockoffs(x, known(sigma), s, 10);
  Eigen::MatrixXd target = sigma;
  target.diagonal() -= s;
  EXPECT_LT((cross_moment(x, k.knockoffs) - target).cwiseAbs().maxCoeff(), 0.05);
}

TEST(Knockoffs, OversizedDecouplingIsRejected) {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 1.0, 0.9, 0.9, 1.0;
  Eigen::MatrixXd x = correlated(100, sigma, 11);
  EXPECT_THROW(sample_knockoffs(x, known(sigma), Eigen::VectorXd::Constant(2, 0.5), 12), DomainError);
}

TEST(Knockoffs, SeededAndReproducible) {
  Eigen::MatrixXd x = standardize_columns(gaussian(80, 5, 13)).values;
  auto a = build_knockoffs(x, 14);
  auto b = build_knockoffs(x, 14);
  auto c = build_knockoffs(x, 15);
  EXPECT_EQ(a.knockoffs, b.knockoffs);
  EXPECT_NE(a.knockoffs, c.knockoffs);
  EXPECT_EQ(a.seed, 14u);
}

TEST(Knockoffs, JointGramTargetLayout) {
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(2, 2);
  sigma(0, 1) = sigma(1, 0) = 0.25;
  Eigen::VectorXd s(2);
  s << 0.5, 0.4;
  Eigen::MatrixXd g = joint_gram_target(sigma, s);
  ASSERT_EQ(g.rows(), 4);
  EXPECT_EQ(g.topLeftCorner(2, 2), sigma);
  EXPECT_EQ(g.bottomRightCorner(2, 2), sigma);
  EXPECT_DOUBLE_EQ(g(0, 2), 0.5);
  EXPECT_DOUBLE_EQ(g(1, 3), 0.6);
  EXPECT_DOUBLE_EQ(g(0, 3), 0.25);
  EXPECT_EQ(g.topRightCorner(2, 2), g.bottomLeftCorner(2, 2));
}
