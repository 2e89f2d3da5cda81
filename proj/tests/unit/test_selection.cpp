#include <algorithm>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "kof/errors.hpp"
#include "kof/random.hpp"
#include "kof/selection.hpp"

using namespace kof;
using kof::testing::gaussian;

namespace {

// Direct transcription of the knockoff+ definition: scan every candidate t.
ThresholdResult brute_threshold(const Eigen::VectorXd& w, double q) {
  std::vector<double> candidates;
  for (double v : w) {
    if (v != 0.0) candidates.push_back(std::abs(v));
  }
  std::sort(candidates.begin(), candidates.end());
  ThresholdResult out;
  for (double t : candidates) {
    double neg = 0.0, pos = 0.0;
    for (double v : w) {
      neg += v <= -t ? 1.0 : 0.0;
      pos += v >= t ? 1.0 : 0.0;
    }
    if ((1.0 + neg) / std::max(1.0, pos) <= q) {
      out.threshold = t;
      for (Eigen::Index j = 0; j < w.size(); ++j) {
        if (w(j) >= t) out.selected.push_back(static_cast<std::size_t>(j));
      }
      break;
    }
  }
  return out;
}

SyntheticData design(std::size_t n, std::size_t t, std::size_t relevant, double beta, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n_assets = n;
  spec.n_periods = t;
  spec.n_relevant = relevant;
  spec.beta_magnitude = beta;
  spec.seed = seed;
  return generate_synthetic(spec);
}

}  // namespace

TEST(Threshold, WorkedExample) {
  Eigen::Vector4d w(3.0, 2.0, -1.0, 0.5);
  auto r = knockoff_threshold(w, 0.5);
  EXPECT_DOUBLE_EQ(r.threshold, 2.0);
  EXPECT_EQ(r.selected, (std::vector<std::size_t>{0, 1}));
}

TEST(Threshold, AllNegativeSelectsNothing) {
  Eigen::Vector3d w(-1.0, -2.0, -0.1);
  auto r = knockoff_threshold(w, 0.5);
  EXPECT_TRUE(r.selected.empty());
  EXPECT_TRUE(std::isinf(r.threshold));
}

TEST(Threshold, AllPositiveSelectsAll) {
  Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(12, 12.0, 1.0);
  auto r = knockoff_threshold(w, 0.2);
  EXPECT_DOUBLE_EQ(r.threshold, 1.0);
  EXPECT_EQ(r.selected.size(), 12u);
}

TEST(Threshold, TooFewPositivesCannotPass) {
  // 1 / 4 > 0.2: four clean discoveries are not enough at q = 0.2.
  Eigen::Vector4d w(4.0, 3.0, 2.0, 1.0);
  EXPECT_TRUE(knockoff_threshold(w, 0.2).selected.empty());
  EXPECT_EQ(knockoff_threshold(w, 0.25).selected.size(), 4u);
}

TEST(Threshold, ZerosAreNeverSelected) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(6);
  EXPECT_TRUE(knockoff_threshold(w, 0.9).selected.empty());
}

TEST(Threshold, AgreesWithBruteForceOnTies) {
  Rng rng(3);
  std::uniform_int_distribution<int> value(-3, 3);
  std::uniform_int_distribution<int> length(1, 15);
  for (int trial = 0; trial < 300; ++trial) {
    Eigen::VectorXd w(length(rng));
    for (Eigen::Index j = 0; j < w.size(); ++j) w(j) = value(rng);
    for (double q : {0.1, 0.25, 0.5, 0.9}) {
      auto a = knockoff_threshold(w, q);
      auto b = brute_threshold(w, q);
      ASSERT_EQ(a.selected, b.selected);
      ASSERT_EQ(a.threshold, b.threshold);
    }
  }
}

TEST(Threshold, RejectsInvalidInput) {
  Eigen::Vector2d w(1.0, 2.0);
  EXPECT_THROW(knockoff_threshold(w, 0.0), DomainError);
  EXPECT_THROW(knockoff_threshold(w, 1.0), DomainError);
  w(0) = std::nan("");
  EXPECT_THROW(knockoff_threshold(w, 0.2), DomainError);
}

TEST(Statistics, CombineRules) {
  Eigen::Vector3d z(0.5, 0.2, 0.3);
  Eigen::Vector3d zt(0.1, 0.4, 0.3);
  Eigen::Vector3d lasso = combine_statistics(z, zt, Method::lasso_path);
  EXPECT_DOUBLE_EQ(lasso(0), 0.5);
  EXPECT_DOUBLE_EQ(lasso(1), -0.4);
  EXPECT_DOUBLE_EQ(lasso(2), 0.0);
  Eigen::Vector3d forest = combine_statistics(z, zt, Method::forest_importance);
  EXPECT_DOUBLE_EQ(forest(0), 0.4);
  EXPECT_DOUBLE_EQ(forest(1), -0.2);
}

TEST(Statistics, MethodNames) {
  EXPECT_EQ(parse_method("lasso_path"), Method::lasso_path);
  EXPECT_EQ(parse_method("forest"), Method::forest_importance);
  EXPECT_EQ(to_string(Method::forest_importance), "forest_importance");
  EXPECT_THROW(parse_method("ridge"), DomainError);
}

TEST(Statistics, ColumnShuffleIsUndone) {
  // A strong signal in column 0 must be credited to column 0 whatever
  // order the learner saw the columns in.
  Eigen::MatrixXd x = gaussian(200, 8, 1);
  Eigen::MatrixXd xk = gaussian(200, 8, 2);
  Eigen::VectorXd y = 3.0 * x.col(0) + gaussian(200, 1, 3).col(0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto st = knockoff_statistics(y, x, xk, SelectionOptions{}, seed);
    Eigen::Index best = 0;
    st.w.maxCoeff(&best);
    EXPECT_EQ(best, 0);
  }
}

TEST(Selection, StrongSparseSignalHasPower) {
  double power = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto d = design(100, 252, 5, 3.0, seed);
    auto r = select_once(d.response(), d.factors(), 0.2, SelectionOptions{}, derive_seed(seed, {99}));
    power += true_positive_rate(r.selected, d.true_support);
  }
  EXPECT_GT(power / 100.0, 0.8);
}

TEST(Selection, PureNoiseRarelySelects) {
  int nonempty = 0;
  const int trials = 100;
  for (int seed = 0; seed < trials; ++seed) {
    auto d = design(50, 150, 0, 1.0, static_cast<std::uint64_t>(seed));
    auto r = select_once(d.response(), d.factors(), 0.2, SelectionOptions{}, static_cast<std::uint64_t>(seed) + 7);
    nonempty += r.empty ? 0 : 1;
  }
  // Every selection is a false discovery here, so P(non-empty) = FDR <= q.
  const double p = nonempty / static_cast<double>(trials);
  EXPECT_LE(p, 0.2 + 2.0 * std::sqrt(0.2 * 0.8 / trials));
}

TEST(Selection, SameSeedSameResult) {
  auto d = design(40, 120, 5, 1.0, 4);
  auto a = select_once(d.response(), d.factors(), 0.2, SelectionOptions{}, 5);
  auto b = select_once(d.response(), d.factors(), 0.2, SelectionOptions{}, 5);
  EXPECT_EQ(a.selected, b.selected);
  EXPECT_EQ(a.statistics.w, b.statistics.w);
  EXPECT_EQ(a.threshold, b.threshold);
}

TEST(Selection, ForestStatisticsFindTheSignal) {
  auto d = design(20, 200, 6, 3.0, 6);
  SelectionOptions options;
  options.method = Method::forest_importance;
  options.forest.n_trees = 50;
  auto r = select_once(d.response(), d.factors(), 0.2, options, 7);
  EXPECT_EQ(r.statistics.method, Method::forest_importance);
  EXPECT_LE(false_discovery_proportion(r.selected, d.true_support), 0.5);
  double sum_true = 0.0;
  for (auto j : d.true_support) sum_true += r.statistics.w(static_cast<Eigen::Index>(j));
  EXPECT_GT(sum_true, 0.0);
}

TEST(Stabilized, SingleRunEqualsSelectOnce) {
  auto d = design(40, 150, 6, 1.0, 8);
  auto once = select_once(d.response(), d.factors(), 0.2, SelectionOptions{}, run_seed(9, 0));
  auto stab = select_stabilized(d.response(), d.factors(), 0.2, 1, SelectionOptions{}, 9);
  EXPECT_EQ(stab, once.selected);
}

TEST(Stabilized, UnionOfRunsAndMonotone) {
  auto d = design(40, 150, 6, 0.6, 10);
  std::set<std::size_t> expected;
  std::size_t previous = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    auto r = select_once(d.response(), d.factors(), 0.2, SelectionOptions{}, run_seed(11, n - 1));
    expected.insert(r.selected.begin(), r.selected.end());
    auto stab = select_stabilized(d.response(), d.factors(), 0.2, n, SelectionOptions{}, 11, 2);
    EXPECT_EQ(stab, std::vector<std::size_t>(expected.begin(), expected.end()));
    EXPECT_GE(stab.size(), previous);
    previous = stab.size();
  }
}

TEST(Bootstrap, FullSubsetSingleRunEqualsSelectOnce) {
  auto d = design(30, 120, 6, 2.0, 12);
  auto candidates = d.panel.without_asset(0);
  auto b = bootstrap_select(d.response(), candidates, 30, 1, 0.2, SelectionOptions{}, 13);
  auto once = select_once(d.response(), d.factors(), 0.2, SelectionOptions{}, bootstrap_selection_seed(13, 0));
  ASSERT_EQ(b.selections.size(), 1u);
  EXPECT_EQ(b.selections[0], once.selected);
}

TEST(Bootstrap, RelevantAssetsAreChosenFarMoreOften) {
  auto d = design(100, 252, 10, 1.0, 5);
  auto candidates = d.panel.without_asset(0);
  auto b = bootstrap_select(d.response(), candidates, 50, 200, 0.2, SelectionOptions{}, 11);
  EXPECT_EQ(b.n_bootstraps, 200u);
  for (auto c : b.counts) EXPECT_LE(c, 200u);
  Eigen::VectorXd f = b.frequency();
  std::vector<bool> relevant(100, false);
  for (auto j : d.true_support) relevant[j] = true;
  double on = 0.0, off = 0.0;
  for (Eigen::Index j = 0; j < 100; ++j) (relevant[static_cast<std::size_t>(j)] ? on : off) += f(j);
  EXPECT_GT(on / 10.0, 5.0 * off / 90.0);
}

TEST(Bootstrap, RejectsBadSubset) {
  auto d = design(10, 60, 2, 1.0, 1);
  auto candidates = d.panel.without_asset(0);
  EXPECT_THROW(bootstrap_select(d.response(), candidates, 0, 5, 0.2, {}, 1), DomainError);
  EXPECT_THROW(bootstrap_select(d.response(), candidates, 11, 5, 0.2, {}, 1), DomainError);
}

TEST(Metrics, FdpAndPowerConventions) {
  std::vector<std::size_t> truth{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(false_discovery_proportion({}, truth), 0.0);
  EXPECT_DOUBLE_EQ(false_discovery_proportion({1, 7}, truth), 0.5);
  EXPECT_DOUBLE_EQ(true_positive_rate({1, 7}, truth), 0.25);
  EXPECT_DOUBLE_EQ(true_positive_rate({1}, {}), 0.0);
  EXPECT_DOUBLE_EQ(false_discovery_proportion({5}, {}), 1.0);
}

TEST(Calibration, ShapeAndWorkerInvariance) {
  SyntheticSpec spec;
  spec.n_assets = 30;
  spec.n_periods = 100;
  spec.n_relevant = 5;
  spec.seed = 3;
  std::vector<double> grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  auto a = calibrate_fdr(spec, grid, 50, SelectionOptions{}, 1);
  auto b = calibrate_fdr(spec, grid, 50, SelectionOptions{}, 3);
  ASSERT_EQ(a.rows.size(), 300u);
  EXPECT_EQ(a.realized_fdr.size(), 6u);
  EXPECT_DOUBLE_EQ(a.rows[50].q, 0.2);
  EXPECT_EQ(a.rows[50].trial, 0u);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].fdp, b.rows[i].fdp);
    EXPECT_EQ(a.rows[i].power, b.rows[i].power);
  }
  EXPECT_THROW(calibrate_fdr(spec, grid, 49, SelectionOptions{}), DomainError);
}

TEST(Calibration, RealizedFdrRisesWithQ) {
  SyntheticSpec spec;
  spec.n_assets = 50;
  spec.n_periods = 150;
  spec.n_relevant = 10;
  spec.correlation = 0.2;
  spec.noise_sd = 2.0;
  spec.seed = 21;
  std::vector<double> grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  auto r = calibrate_fdr(spec, grid, 60, SelectionOptions{});
  for (std::size_t k = 1; k < grid.size(); ++k) {
    EXPECT_GE(r.realized_fdr[k], r.realized_fdr[k - 1] - 2.0 * r.fdr_stderr[k]) << grid[k];
    EXPECT_GE(r.power[k], r.power[k - 1]);
  }
  EXPECT_GT(r.realized_fdr.back(), r.realized_fdr.front());
}
