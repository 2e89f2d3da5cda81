#include <benchmark/benchmark.h>

#include "kof/forest.hpp"
#include "kof/knockoff.hpp"
#include "kof/lasso.hpp"
#include "kof/linalg.hpp"
#include "kof/network.hpp"
#include "kof/random.hpp"
#include "kof/selection.hpp"
#include "kof/synthetic.hpp"

namespace {

kof::SyntheticData design(std::size_t n) {
  kof::SyntheticSpec spec;
  spec.n_assets = n;
  spec.n_periods = 252;
  spec.n_relevant = 10;
  spec.correlation = 0.2;
  spec.seed = 1;
  return kof::generate_synthetic(spec);
}

void BM_LassoPathAugmented(benchmark::State& state) {
  auto d = design(static_cast<std::size_t>(state.range(0)));
  Eigen::MatrixXd x = kof::standardize_columns(d.factors()).values;
  auto k = kof::build_knockoffs(x, 2);
  Eigen::MatrixXd joint(x.rows(), 2 * x.cols());
  joint << x, k.knockoffs;
  joint = kof::standardize_columns(joint).values;
  Eigen::VectorXd y = kof::standardize_vector(d.response());
  for (auto _ : state) benchmark::DoNotOptimize(kof::lasso_path(joint, y));
}
BENCHMARK(BM_LassoPathAugmented)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_BuildKnockoffs(benchmark::State& state) {
  auto d = design(static_cast<std::size_t>(state.range(0)));
  Eigen::MatrixXd x = kof::standardize_columns(d.factors()).values;
  for (auto _ : state) benchmark::DoNotOptimize(kof::build_knockoffs(x, 3));
}
BENCHMARK(BM_BuildKnockoffs)->Arg(25)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_Forest(benchmark::State& state) {
  auto d = design(50);
  kof::ForestConfig config;
  config.n_trees = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kof::fit_forest(d.factors(), d.response(), config, 4));
}
BENCHMARK(BM_Forest)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Threshold(benchmark::State& state) {
  kof::Rng rng(5);
  Eigen::MatrixXd w(state.range(0), 1);
  kof::fill_standard_normal(rng, w);
  Eigen::VectorXd v = w.col(0).array() + 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(kof::knockoff_threshold(v, 0.2));
}
BENCHMARK(BM_Threshold)->Arg(100)->Arg(10000);

void BM_SelectOnce(benchmark::State& state) {
  auto d = design(100);
  for (auto _ : state) benchmark::DoNotOptimize(kof::select_once(d.response(), d.factors(), 0.2, {}, 6));
}
BENCHMARK(BM_SelectOnce)->Unit(benchmark::kMillisecond);

void BM_Rewire(benchmark::State& state) {
  kof::DirectedNetwork net;
  const std::size_t n = 100;
  for (std::size_t i = 0; i < n; ++i) net.nodes.push_back(std::to_string(i));
  kof::Rng rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  while (net.edges.size() < 1000) {
    const std::size_t a = pick(rng), b = pick(rng);
    if (a != b) net.add_edge(a, b);
  }
  for (auto _ : state) benchmark::DoNotOptimize(kof::rewire(net, kof::kSwapsPerEdge * 1000, 8));
}
BENCHMARK(BM_Rewire)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
