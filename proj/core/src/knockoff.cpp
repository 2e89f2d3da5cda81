#include "kof/knockoff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kof/errors.hpp"
#include "kof/linalg.hpp"
#include "kof/random.hpp"

namespace kof {

namespace {

Eigen::MatrixXd shrink(const Eigen::MatrixXd& cov, const Eigen::VectorXd& diag, double gamma) {
  Eigen::MatrixXd out = (1.0 - gamma) * cov;
  out.diagonal() += gamma * diag;
  return out;
}

}  // namespace

MomentEstimate estimate_moments(const Eigen::MatrixXd& x) {
  if (x.rows() < 2 || x.cols() < 1) throw DomainError("estimate_moments: need T >= 2 and N >= 1");
  if (!x.allFinite()) throw DomainError("estimate_moments: non-finite input");

  MomentEstimate out;
  out.mean = x.colwise().mean().transpose();
  Eigen::MatrixXd cov = sample_covariance(x);
  cov = 0.5 * (cov + cov.transpose());
  const Eigen::VectorXd diag = cov.diagonal();
  for (Eigen::Index j = 0; j < diag.size(); ++j) {
    if (!(diag(j) > 0.0)) throw DomainError("estimate_moments: column " + std::to_string(j) + " has zero variance");
  }

  const double floor = kEigenFloorFraction * diag.sum() / static_cast<double>(diag.size());
  double gamma = 0.0;
  if (min_eigenvalue(cov) < floor) {
    // lambda_min is concave in gamma, so the feasible set is an interval
    // ending at 1 (when 1 is feasible at all); bisect for its left end.
    double lo = 0.0, hi = 1.0;
    for (int iter = 0; iter < 60; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (min_eigenvalue(shrink(cov, diag, mid)) >= floor) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    gamma = hi;
    cov = shrink(cov, diag, gamma);
  }
  out.covariance = std::move(cov);
  out.shrinkage_used = gamma;
  return out;
}

Eigen::VectorXd solve_s_equi(const Eigen::MatrixXd& covariance) {
  if (covariance.rows() != covariance.cols() || covariance.rows() == 0) {
    throw DomainError("solve_s_equi: covariance must be square and non-empty");
  }
  const Eigen::VectorXd diag = covariance.diagonal();
  if ((diag.array() <= 0.0).any()) throw DomainError("solve_s_equi: covariance is not positive definite");
  const Eigen::VectorXd inv_sd = diag.array().rsqrt();
  Eigen::MatrixXd corr = inv_sd.asDiagonal() * covariance * inv_sd.asDiagonal();
  corr = 0.5 * (corr + corr.transpose());
  const double lambda_min = min_eigenvalue(corr);
  if (!(lambda_min > 0.0)) throw DomainError("solve_s_equi: covariance is not positive definite");
  const double s_corr = std::min(2.0 * lambda_min, 1.0);
  return s_corr * diag;
}

KnockoffSample sample_knockoffs(const Eigen::MatrixXd& x, const MomentEstimate& moments,
                                const Eigen::VectorXd& s, std::uint64_t seed) {
  const Eigen::Index n = x.cols();
  if (moments.covariance.rows() != n || moments.mean.size() != n || s.size() != n) {
    throw DomainError("sample_knockoffs: dimension mismatch");
  }
  if ((s.array() < 0.0).any() || !s.allFinite()) throw DomainError("sample_knockoffs: s must be finite and >= 0");

  Eigen::LLT<Eigen::MatrixXd> llt(moments.covariance);
  if (llt.info() != Eigen::Success) throw DomainError("sample_knockoffs: covariance is not positive definite");
  // Sigma^-1 diag(s)
  const Eigen::MatrixXd inv_s = llt.solve(Eigen::MatrixXd(s.asDiagonal()));

  Eigen::MatrixXd cond_cov = -(s.asDiagonal() * inv_s);
  cond_cov.diagonal() += 2.0 * s;
  cond_cov = 0.5 * (cond_cov + cond_cov.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cond_cov);
  Eigen::VectorXd evals = eig.eigenvalues();
  const double scale = std::max(1.0, s.maxCoeff());
  if (evals.minCoeff() < -kConditionalPsdTolerance * scale) {
    throw DomainError("sample_knockoffs: conditional covariance is not PSD (s too large)");
  }
  evals = evals.cwiseMax(0.0);
  const Eigen::MatrixXd root = eig.eigenvectors() * evals.cwiseSqrt().asDiagonal();

  const Eigen::MatrixXd centered = x.rowwise() - moments.mean.transpose();
  Eigen::MatrixXd knockoffs = x - centered * inv_s;

  Rng rng(seed);
  Eigen::MatrixXd z(x.rows(), n);
  fill_standard_normal(rng, z);
  knockoffs += z * root.transpose();

  return KnockoffSample{x, std::move(knockoffs), s, seed};
}

KnockoffSample build_knockoffs(const Eigen::MatrixXd& x, std::uint64_t seed) {
  const MomentEstimate moments = estimate_moments(x);
  const Eigen::VectorXd s = solve_s_equi(moments.covariance);
  return sample_knockoffs(x, moments, s, seed);
}

Eigen::MatrixXd joint_gram_target(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& s) {
  const Eigen::Index n = covariance.rows();
  Eigen::MatrixXd g(2 * n, 2 * n);
  Eigen::MatrixXd off = covariance;
  off.diagonal() -= s;
  g.topLeftCorner(n, n) = covariance;
  g.bottomRightCorner(n, n) = covariance;
  g.topRightCorner(n, n) = off;
  g.bottomLeftCorner(n, n) = off;
  return g;
}

}  // namespace kof
