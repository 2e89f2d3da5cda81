#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace kof {

struct ForestConfig {
  std::size_t n_trees = 100;
  std::size_t max_depth = 0;  // 0: unbounded
  std::size_t min_leaf = 5;
  std::size_t mtry = 0;       // 0: ceil(p / 3)
};

struct TreeNode {
  // Leaf when feature < 0.
  int feature = -1;
  double threshold = 0.0;
  double value = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
};

/// Bagged CART regression forest.
struct ForestModel {
  ForestConfig config;
  std::size_t mtry = 0;
  // Total in-bag squared-error decrease per feature, normalized to sum to 1
  // (all zeros when no split happened).
  Eigen::VectorXd importance;
  std::uint64_t seed = 0;
  std::vector<RegressionTree> trees;

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
};

/// Tree k draws its bootstrap and feature subsets from derive_seed(seed, {k}),
/// so the model is identical for any worker count.
ForestModel fit_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestConfig& config,
                       std::uint64_t seed, unsigned workers = 1);

}  // namespace kof
