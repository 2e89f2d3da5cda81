#pragma once

#include <Eigen/Dense>

namespace kof {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Standardized {
  MatrixXd values;
  VectorXd mean;
  VectorXd scale;
};

// Centers each column and divides by its population standard deviation, so
// that X_j'X_j / T == 1. Throws DomainError on a zero-variance column.
Standardized standardize_columns(const MatrixXd& x);

// Centered and scaled copy of y; a constant y maps to the zero vector.
VectorXd standardize_vector(const VectorXd& y);

// Unbiased (T - 1) sample covariance.
MatrixXd sample_covariance(const MatrixXd& x);

double min_eigenvalue(const MatrixXd& symmetric);

bool all_finite(const MatrixXd& m);

}  // namespace kof
