#include "kof/forest.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

#include "kof/errors.hpp"
#include "kof/parallel.hpp"
#include "kof/random.hpp"

namespace kof {

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double decrease = 0.0;
  std::size_t left_count = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestConfig& config, std::size_t mtry,
              Rng& rng)
      : x_(x), y_(y), config_(config), mtry_(mtry), rng_(rng), features_(static_cast<std::size_t>(x.cols())) {
    std::iota(features_.begin(), features_.end(), 0);
    importance_ = Eigen::VectorXd::Zero(x.cols());
  }

  RegressionTree build(std::vector<std::size_t> sample) {
    samples_ = std::move(sample);
    RegressionTree tree;
    struct Pending {
      std::int32_t node;
      std::size_t begin, end, depth;
    };
    std::vector<Pending> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, 0, samples_.size(), 0});
    while (!stack.empty()) {
      const Pending job = stack.back();
      stack.pop_back();
      TreeNode& node = tree.nodes[static_cast<std::size_t>(job.node)];
      node.value = mean(job.begin, job.end);
      const bool depth_ok = config_.max_depth == 0 || job.depth < config_.max_depth;
      if (!depth_ok || job.end - job.begin < 2 * config_.min_leaf) continue;
      const Split split = best_split(job.begin, job.end, node.value);
      if (split.feature < 0) continue;

      importance_(split.feature) += split.decrease;
      const auto mid = partition(job.begin, job.end, split);
      node.feature = split.feature;
      node.threshold = split.threshold;
      const auto left = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      tree.nodes[static_cast<std::size_t>(job.node)].left = left;
      tree.nodes[static_cast<std::size_t>(job.node)].right = left + 1;
      stack.push_back({left + 1, mid, job.end, job.depth + 1});
      stack.push_back({left, job.begin, mid, job.depth + 1});
    }
    return tree;
  }

  const Eigen::VectorXd& importance() const { return importance_; }

 private:
  double mean(std::size_t begin, std::size_t end) const {
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += y_(static_cast<Eigen::Index>(samples_[i]));
    return sum / static_cast<double>(end - begin);
  }

  Split best_split(std::size_t begin, std::size_t end, double node_mean) {
    const std::size_t n = end - begin;
    // Partial Fisher-Yates draws the mtry candidate features.
    for (std::size_t k = 0; k < mtry_; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, features_.size() - 1);
      std::swap(features_[k], features_[pick(rng_)]);
    }
    Split best;
    double sse = 0.0, raw = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double v = y_(static_cast<Eigen::Index>(samples_[i]));
      sse += (v - node_mean) * (v - node_mean);
      raw += v * v;
    }
    // Constant response (up to rounding in the mean): nothing to split.
    if (sse <= 1e-20 * raw) return best;
    pairs_.resize(n);
    for (std::size_t k = 0; k < mtry_; ++k) {
      const auto f = static_cast<Eigen::Index>(features_[k]);
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = static_cast<Eigen::Index>(samples_[begin + i]);
        pairs_[i] = {x_(row, f), y_(row) - node_mean};
        total += pairs_[i].second;
      }
      std::sort(pairs_.begin(), pairs_.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      const double parent = total * total / static_cast<double>(n);
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += pairs_[i].second;
        const std::size_t n_left = i + 1;
        if (n_left < config_.min_leaf) continue;
        if (n - n_left < config_.min_leaf) break;
        if (!(pairs_[i].first < pairs_[i + 1].first)) continue;
        const double right_sum = total - left_sum;
        const double decrease = left_sum * left_sum / static_cast<double>(n_left) +
                                right_sum * right_sum / static_cast<double>(n - n_left) - parent;
        if (decrease > best.decrease) {
          best.feature = static_cast<int>(f);
          best.threshold = 0.5 * (pairs_[i].first + pairs_[i + 1].first);
          best.decrease = decrease;
          best.left_count = n_left;
        }
      }
    }
    if (!(best.decrease > 1e-12 * sse)) best.feature = -1;
    return best;
  }

  std::size_t partition(std::size_t begin, std::size_t end, const Split& split) {
    auto first = samples_.begin() + static_cast<std::ptrdiff_t>(begin);
    auto last = samples_.begin() + static_cast<std::ptrdiff_t>(end);
    auto mid = std::stable_partition(first, last, [&](std::size_t row) {
      return x_(static_cast<Eigen::Index>(row), split.feature) <= split.threshold;
    });
    return static_cast<std::size_t>(mid - samples_.begin());
  }

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  const ForestConfig& config_;
  std::size_t mtry_;
  Rng& rng_;
  std::vector<std::size_t> features_;
  std::vector<std::size_t> samples_;
  std::vector<std::pair<double, double>> pairs_;
  Eigen::VectorXd importance_;
};

}  // namespace

double RegressionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  std::size_t k = 0;
  while (nodes[k].feature >= 0) {
    k = static_cast<std::size_t>(row(nodes[k].feature) <= nodes[k].threshold ? nodes[k].left : nodes[k].right);
  }
  return nodes[k].value;
}

double ForestModel::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  double sum = 0.0;
  for (const auto& tree : trees) sum += tree.predict(row);
  return trees.empty() ? 0.0 : sum / static_cast<double>(trees.size());
}

ForestModel fit_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestConfig& config,
                       std::uint64_t seed, unsigned workers) {
  if (x.rows() != y.size()) throw DomainError("fit_forest: X and y row counts differ");
  if (x.cols() == 0) throw DomainError("fit_forest: no features");
  if (config.min_leaf == 0 || config.n_trees == 0) throw DomainError("fit_forest: min_leaf and n_trees must be positive");
  if (static_cast<std::size_t>(x.rows()) < 2 * config.min_leaf) throw DomainError("fit_forest: need T >= 2 * min_leaf");
  if (!x.allFinite() || !y.allFinite()) throw DomainError("fit_forest: non-finite input");

  const auto p = static_cast<std::size_t>(x.cols());
  ForestModel model;
  model.config = config;
  model.seed = seed;
  model.mtry = config.mtry == 0 ? (p + 2) / 3 : std::min(config.mtry, p);
  model.trees.resize(config.n_trees);

  std::vector<Eigen::VectorXd> per_tree(config.n_trees);
  parallel_for(config.n_trees, workers, [&](std::size_t k) {
    Rng rng(derive_seed(seed, {k}));
    const auto t = static_cast<std::size_t>(x.rows());
    std::uniform_int_distribution<std::size_t> draw(0, t - 1);
    std::vector<std::size_t> sample(t);
    for (auto& s : sample) s = draw(rng);
    TreeBuilder builder(x, y, config, model.mtry, rng);
    model.trees[k] = builder.build(std::move(sample));
    per_tree[k] = builder.importance();
  });

  model.importance = Eigen::VectorXd::Zero(x.cols());
  for (const auto& imp : per_tree) model.importance += imp;
  const double total = model.importance.sum();
  if (total > 0.0) model.importance /= total;
  return model;
}

}  // namespace kof
