#include "kof/lasso.hpp"

#include <algorithm>
#include <cmath>

#include "kof/errors.hpp"

namespace kof {

namespace {

double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

double coordinate_violation(double grad, double beta, double lambda) {
  if (beta == 0.0) return std::max(0.0, std::abs(grad) - lambda);
  return std::abs(grad - (beta > 0.0 ? lambda : -lambda));
}

// Coordinate descent with covariance updates: grad = c - G beta is kept in
// sync after every coordinate move.
constexpr std::size_t kSweepsBetweenPolish = 25;

class Solver {
 public:
  Solver(const Eigen::MatrixXd& gram, const Eigen::VectorXd& xty) : gram_(gram), xty_(xty) {
    beta_ = Eigen::VectorXd::Zero(xty.size());
    grad_ = xty;
  }

  bool solve(double lambda, const LassoOptions& opt) {
    const Eigen::Index p = beta_.size();
    grad_ = xty_ - gram_ * beta_;
    for (std::size_t sweep = 0; sweep < opt.max_sweeps; ++sweep) {
      // Full pass, then iterate on the active set until it roughly settles.
      sweep_coordinates(lambda, nullptr);
      active_.clear();
      for (Eigen::Index j = 0; j < p; ++j) {
        if (beta_(j) != 0.0) active_.push_back(j);
      }
      for (std::size_t inner = 0; inner < kSweepsBetweenPolish; ++inner) {
        const double change = sweep_coordinates(lambda, &active_);
        if (change < 0.1 * opt.kkt_tolerance) break;
      }
      if (max_violation(lambda) <= opt.kkt_tolerance) return true;
      if (polish(lambda) && max_violation(lambda) <= opt.kkt_tolerance) return true;
    }
    return max_violation(lambda) <= opt.kkt_tolerance;
  }

  const Eigen::VectorXd& beta() const { return beta_; }

 private:
  double sweep_coordinates(double lambda, const std::vector<Eigen::Index>* subset) {
    double max_change = 0.0;
    auto update = [&](Eigen::Index j) {
      const double gjj = gram_(j, j);
      if (gjj <= 0.0) return;
      const double old = beta_(j);
      const double updated = soft_threshold(grad_(j) + gjj * old, lambda) / gjj;
      const double delta = updated - old;
      if (delta != 0.0) {
        beta_(j) = updated;
        grad_.noalias() -= delta * gram_.col(j);
        max_change = std::max(max_change, std::abs(delta) * gjj);
      }
    };
    if (subset) {
      for (Eigen::Index j : *subset) update(j);
    } else {
      for (Eigen::Index j = 0; j < beta_.size(); ++j) update(j);
    }
    return max_change;
  }

  // With the active set and signs fixed, the optimality conditions are the
  // linear system G_AA b_A = c_A - lambda * sign_A. Accepted only when the
  // solution keeps its signs and does not worsen the KKT residual.
  bool polish(double lambda) {
    if (active_.empty()) return false;
    const auto k = static_cast<Eigen::Index>(active_.size());
    Eigen::MatrixXd g(k, k);
    Eigen::VectorXd rhs(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      const Eigen::Index j = active_[static_cast<std::size_t>(a)];
      for (Eigen::Index b = 0; b < k; ++b) g(a, b) = gram_(j, active_[static_cast<std::size_t>(b)]);
      rhs(a) = xty_(j) - (beta_(j) > 0.0 ? lambda : -lambda);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
    if (ldlt.info() != Eigen::Success) return false;
    const Eigen::VectorXd solution = ldlt.solve(rhs);
    if (!solution.allFinite()) return false;
    for (Eigen::Index a = 0; a < k; ++a) {
      const Eigen::Index j = active_[static_cast<std::size_t>(a)];
      if ((solution(a) > 0.0) != (beta_(j) > 0.0) || solution(a) == 0.0) return false;
    }
    const double before = max_violation(lambda);
    Eigen::VectorXd candidate = beta_;
    for (Eigen::Index a = 0; a < k; ++a) candidate(active_[static_cast<std::size_t>(a)]) = solution(a);
    const Eigen::VectorXd candidate_grad = xty_ - gram_ * candidate;
    double after = 0.0;
    for (Eigen::Index j = 0; j < candidate.size(); ++j) {
      after = std::max(after, coordinate_violation(candidate_grad(j), candidate(j), lambda));
    }
    if (after > before) return false;
    beta_ = std::move(candidate);
    grad_ = candidate_grad;
    return true;
  }

  double max_violation(double lambda) const {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < beta_.size(); ++j) {
      worst = std::max(worst, coordinate_violation(grad_(j), beta_(j), lambda));
    }
    return worst;
  }

  const Eigen::MatrixXd& gram_;
  const Eigen::VectorXd& xty_;
  Eigen::VectorXd beta_;
  Eigen::VectorXd grad_;
  std::vector<Eigen::Index> active_;
};

}  // namespace

LassoPath lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const LassoOptions& options) {
  if (x.rows() != y.size()) throw DomainError("lasso_path: X and y row counts differ");
  if (options.grid_size < 10) throw DomainError("lasso_path: grid_size must be >= 10");
  if (!x.allFinite() || !y.allFinite()) throw DomainError("lasso_path: non-finite input");

  const double t = static_cast<double>(x.rows());
  const Eigen::MatrixXd gram = (x.transpose() * x) / t;
  const Eigen::VectorXd xty = (x.transpose() * y) / t;
  const double lambda_max = xty.cwiseAbs().maxCoeff();

  LassoPath path;
  path.entry_lambda = Eigen::VectorXd::Zero(x.cols());
  if (!(lambda_max > 0.0)) return path;  // y orthogonal to every column

  const double log_step = std::log(options.min_ratio) / static_cast<double>(options.grid_size - 1);
  path.lambdas.reserve(options.grid_size);
  for (std::size_t k = 0; k < options.grid_size; ++k) {
    path.lambdas.push_back(lambda_max * std::exp(log_step * static_cast<double>(k)));
  }
  path.lambdas.front() = lambda_max;

  Solver solver(gram, xty);
  path.coefficients.reserve(options.grid_size);
  for (std::size_t k = 0; k < path.lambdas.size(); ++k) {
    const double lambda = path.lambdas[k];
    if (k == 0) {
      path.coefficients.push_back(Eigen::VectorXd::Zero(x.cols()));
      continue;
    }
    path.converged = solver.solve(lambda, options) && path.converged;
    const Eigen::VectorXd& beta = solver.beta();
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
      if (path.entry_lambda(j) == 0.0 && std::abs(beta(j)) > kLassoActiveThreshold) path.entry_lambda(j) = lambda;
    }
    path.coefficients.push_back(beta);
  }
  return path;
}

double lasso_kkt_residual(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                          double lambda) {
  const Eigen::VectorXd grad = x.transpose() * (y - x * beta) / static_cast<double>(x.rows());
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    worst = std::max(worst, coordinate_violation(grad(j), beta(j), lambda));
  }
  return worst;
}

}  // namespace kof
