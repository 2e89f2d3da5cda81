#include "kof/huber.hpp"

#include <algorithm>
#include <cmath>

#include "kof/errors.hpp"

namespace kof {

namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd a(x.rows(), x.cols() + 1);
  a.col(0).setOnes();
  a.rightCols(x.cols()) = x;
  return a;
}

Eigen::VectorXd weighted_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                               double jitter) {
  Eigen::MatrixXd normal = a.transpose() * w.asDiagonal() * a;
  normal.diagonal().array() += jitter;
  const Eigen::VectorXd rhs = a.transpose() * (w.asDiagonal() * y);
  return normal.ldlt().solve(rhs);
}

double mad_scale(const Eigen::VectorXd& residuals) {
  const double med = median(residuals);
  return 1.4826 * median((residuals.array() - med).abs().matrix());
}

}  // namespace

double median(Eigen::VectorXd values) {
  if (values.size() == 0) throw DomainError("median of empty vector");
  auto* data = values.data();
  const auto n = static_cast<std::size_t>(values.size());
  std::nth_element(data, data + n / 2, data + n);
  const double upper = data[n / 2];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(data, data + n / 2);
  return 0.5 * (lower + upper);
}

Eigen::VectorXd ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return with_intercept(x).colPivHouseholderQr().solve(y);
}

RobustFit huber_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const HuberOptions& options) {
  if (x.rows() != y.size()) throw DomainError("huber_fit: X and y row counts differ");
  if (x.cols() >= x.rows()) throw DomainError("huber_fit: need more observations than regressors");
  if (!x.allFinite() || !y.allFinite()) throw DomainError("huber_fit: non-finite input");

  const Eigen::MatrixXd a = with_intercept(x);
  RobustFit fit;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  fit.jittered = qr.rank() < a.cols();
  const double jitter = fit.jittered ? options.ridge_jitter : 0.0;

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(y.size());
  Eigen::VectorXd beta = fit.jittered ? weighted_solve(a, y, ones, jitter) : qr.solve(y);

  for (std::size_t iter = 1; iter <= options.max_iterations; ++iter) {
    const Eigen::VectorXd residuals = y - a * beta;
    const double scale = mad_scale(residuals);
    fit.iterations = iter;
    if (!(scale > 0.0)) {
      // More than half the residuals are exactly zero: already a fixed point.
      fit.converged = true;
      break;
    }
    const double c = options.tuning * scale;
    Eigen::VectorXd w(y.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double r = std::abs(residuals(i));
      w(i) = r <= c ? 1.0 : c / r;
    }
    const Eigen::VectorXd next = weighted_solve(a, y, w, jitter);
    const double change = (next - beta).norm();
    beta = next;
    if (change <= options.tolerance * std::max(beta.norm(), 1e-300)) {
      fit.converged = true;
      break;
    }
  }

  fit.intercept = beta(0);
  fit.coefficients = beta.tail(x.cols());
  fit.scale = mad_scale(y - a * beta);
  return fit;
}

}  // namespace kof
