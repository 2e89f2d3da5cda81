#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace kof {

/// Solution path of  min_b  1/(2T) ||y - X b||^2 + lambda ||b||_1
/// on a log-spaced grid from lambda_max = ||X'y||_inf / T down to
/// lambda_max * min_ratio.
struct LassoPath {
  std::vector<double> lambdas;                // strictly decreasing
  Eigen::VectorXd entry_lambda;               // largest grid lambda with b_j != 0, else 0
  std::vector<Eigen::VectorXd> coefficients;  // one per lambda
  bool converged = true;
};

struct LassoOptions {
  std::size_t grid_size = 100;
  double min_ratio = 1e-3;
  // Target for the subgradient residual; kept below the 1e-7 contract so
  // accumulated rounding in the gradient does not cross it.
  double kkt_tolerance = 1e-9;
  std::size_t max_sweeps = 20000;  // per grid point
};

inline constexpr double kLassoActiveThreshold = 1e-12;

LassoPath lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const LassoOptions& options = {});

/// Largest violation of the subgradient optimality conditions at `beta`,
/// recomputed from scratch.
double lasso_kkt_residual(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                          double lambda);

}  // namespace kof
