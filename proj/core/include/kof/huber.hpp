#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace kof {

struct HuberOptions {
  double tuning = 1.345;  // in units of the robust residual scale
  double tolerance = 1e-8;
  std::size_t max_iterations = 100;
  double ridge_jitter = 1e-8;
};

struct RobustFit {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
  double scale = 0.0;  // 1.4826 * MAD of the final residuals
  std::size_t iterations = 0;
  bool converged = false;
  bool jittered = false;  // design was rank deficient

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    return intercept + row.dot(coefficients);
  }
};

/// Huber M-estimate with intercept, solved by iteratively reweighted least
/// squares starting from OLS. The scale is the normalized MAD of the current
/// residuals and is re-estimated every iteration.
RobustFit huber_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const HuberOptions& options = {});

/// Ordinary least squares with intercept; coefficient 0 is the intercept.
Eigen::VectorXd ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

double median(Eigen::VectorXd values);

}  // namespace kof
