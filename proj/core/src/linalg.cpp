#include "kof/linalg.hpp"

#include <cmath>
#include <string>

#include "kof/errors.hpp"

namespace kof {

Standardized standardize_columns(const MatrixXd& x) {
  const auto t = static_cast<double>(x.rows());
  if (x.rows() < 2) throw DomainError("standardize_columns: need at least 2 rows");
  Standardized out;
  out.mean = x.colwise().mean().transpose();
  out.values = x.rowwise() - out.mean.transpose();
  out.scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double sd = std::sqrt(out.values.col(j).squaredNorm() / t);
    if (!(sd > 0.0) || !std::isfinite(sd)) {
      throw DomainError("column " + std::to_string(j) + " has zero variance");
    }
    out.scale(j) = sd;
    out.values.col(j) /= sd;
  }
  return out;
}

VectorXd standardize_vector(const VectorXd& y) {
  const double mean = y.mean();
  VectorXd centered = y.array() - mean;
  const double sd = std::sqrt(centered.squaredNorm() / static_cast<double>(y.size()));
  // Relative guard: floating-point noise on a constant series must not be blown up.
  if (!(sd > 1e-14 * std::max(1.0, std::abs(mean)))) return VectorXd::Zero(y.size());
  return centered / sd;
}

MatrixXd sample_covariance(const MatrixXd& x) {
  const MatrixXd centered = x.rowwise() - x.colwise().mean();
  return (centered.transpose() * centered) / static_cast<double>(x.rows() - 1);
}

double min_eigenvalue(const MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

bool all_finite(const MatrixXd& m) { return m.allFinite(); }

}  // namespace kof
