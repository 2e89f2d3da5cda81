#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace kof {

// Eigenvalue floor, as a fraction of the mean variance, imposed by the
// diagonal shrinkage in estimate_moments.
inline constexpr double kEigenFloorFraction = 1e-3;
// Most negative eigenvalue of the conditional covariance tolerated before
// clipping; anything lower means s is too large for the covariance.
inline constexpr double kConditionalPsdTolerance = 1e-10;

struct MomentEstimate {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  double shrinkage_used = 0.0;
};

struct KnockoffSample {
  Eigen::MatrixXd originals;
  Eigen::MatrixXd knockoffs;
  Eigen::VectorXd s;
  std::uint64_t seed = 0;
};

/// Sample mean and covariance. The covariance is shrunk toward its diagonal,
/// (1 - g) S + g diag(S), with the smallest g in [0, 1] whose minimum
/// eigenvalue reaches kEigenFloorFraction * trace(S) / N.
MomentEstimate estimate_moments(const Eigen::MatrixXd& x);

/// Equicorrelated decoupling vector: s_j = min(2 lambda_min(C), 1) * Sigma_jj,
/// where C is the correlation matrix of `covariance`.
Eigen::VectorXd solve_s_equi(const Eigen::MatrixXd& covariance);

/// Draws each knockoff row from the Gaussian conditional of x~ given x:
///   mean  x - diag(s) Sigma^-1 (x - mu)
///   cov   2 diag(s) - diag(s) Sigma^-1 diag(s)
KnockoffSample sample_knockoffs(const Eigen::MatrixXd& x, const MomentEstimate& moments,
                                const Eigen::VectorXd& s, std::uint64_t seed);

/// estimate_moments -> solve_s_equi -> sample_knockoffs on already
/// standardized columns.
KnockoffSample build_knockoffs(const Eigen::MatrixXd& x, std::uint64_t seed);

/// [[Sigma, Sigma - diag(s)], [Sigma - diag(s), Sigma]].
Eigen::MatrixXd joint_gram_target(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& s);

}  // namespace kof
