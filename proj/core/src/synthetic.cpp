#include "kof/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "kof/errors.hpp"
#include "kof/random.hpp"

namespace kof {

namespace {

std::string numbered(const char* prefix, std::size_t i, std::size_t n) {
  const std::size_t width = std::max<std::size_t>(2, std::to_string(n > 0 ? n - 1 : 0).size());
  std::string digits = std::to_string(i);
  return prefix + std::string(width - std::min(width, digits.size()), '0') + digits;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (n_assets == 0) throw DomainError("synthetic: n_assets must be positive");
  if (n_periods < 2) throw DomainError("synthetic: n_periods must be >= 2");
  if (n_relevant > n_assets) throw DomainError("synthetic: n_relevant exceeds n_assets");
  if (!(correlation >= 0.0 && correlation < 1.0)) throw DomainError("synthetic: correlation must be in [0, 1)");
  if (!(noise_sd > 0.0)) throw DomainError("synthetic: noise_sd must be positive");
}

std::vector<Date> synthetic_dates(std::size_t n) {
  using namespace std::chrono;
  std::vector<Date> out;
  out.reserve(n);
  sys_days day = sys_days{year{2000} / January / 3};
  while (out.size() < n) {
    const weekday wd{day};
    if (wd != Saturday && wd != Sunday) out.emplace_back(day);
    day += days{1};
  }
  return out;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const auto t = static_cast<Eigen::Index>(spec.n_periods);
  const auto n = static_cast<Eigen::Index>(spec.n_assets);

  Eigen::MatrixXd common(t, 1);
  Eigen::MatrixXd idio(t, n);
  fill_standard_normal(rng, common);
  fill_standard_normal(rng, idio);
  const Eigen::MatrixXd x = std::sqrt(spec.correlation) * common.replicate(1, n) +
                            std::sqrt(1.0 - spec.correlation) * idio;

  std::vector<std::size_t> order(spec.n_assets);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> support(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(spec.n_relevant));
  std::sort(support.begin(), support.end());

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(n);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t j : support) beta(static_cast<Eigen::Index>(j)) = coin(rng) ? spec.beta_magnitude : -spec.beta_magnitude;

  Eigen::MatrixXd noise(t, 1);
  fill_standard_normal(rng, noise);
  const Eigen::VectorXd y = x * beta + spec.noise_sd * noise.col(0);

  Eigen::MatrixXd values(t, n + 1);
  values.col(0) = y;
  values.rightCols(n) = x;

  std::vector<std::string> assets{"y"};
  SectorMap sectors{{"y", "target"}};
  std::vector<bool> in_support(spec.n_assets, false);
  for (std::size_t j : support) in_support[j] = true;
  for (std::size_t j = 0; j < spec.n_assets; ++j) {
    assets.push_back(numbered("a", j, spec.n_assets));
    sectors[assets.back()] = in_support[j] ? "target" : "other";
  }

  return SyntheticData{
      ReturnsPanel(synthetic_dates(spec.n_periods), std::move(assets), std::move(values), std::move(sectors)),
      std::move(support), std::move(beta)};
}

LeadLagData generate_lead_lag(const LeadLagSpec& spec) {
  if (spec.n_periods < 3) throw DomainError("lead-lag: n_periods must be >= 3");
  for (std::size_t k : spec.predictor_counts) {
    if (k == 0 || k > spec.n_leaders) throw DomainError("lead-lag: predictor count must be in [1, n_leaders]");
  }
  Rng rng(spec.seed);
  const auto t = static_cast<Eigen::Index>(spec.n_periods);
  const auto n_lead = static_cast<Eigen::Index>(spec.n_leaders);
  const auto n_follow = static_cast<Eigen::Index>(spec.predictor_counts.size());

  Eigen::MatrixXd leaders(t, n_lead);
  fill_standard_normal(rng, leaders);
  leaders *= spec.leader_sd;
  Eigen::MatrixXd noise(t, n_follow);
  fill_standard_normal(rng, noise);

  LeadLagData out;
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(t, n_lead + n_follow);
  values.leftCols(n_lead) = leaders;
  std::vector<std::size_t> pool(spec.n_leaders);
  std::iota(pool.begin(), pool.end(), 0);
  std::bernoulli_distribution coin(0.5);
  for (Eigen::Index f = 0; f < n_follow; ++f) {
    const std::size_t k = spec.predictor_counts[static_cast<std::size_t>(f)];
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<std::size_t> preds(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(preds.begin(), preds.end());
    Eigen::VectorXd load = Eigen::VectorXd::Zero(n_lead);
    for (std::size_t j : preds) load(static_cast<Eigen::Index>(j)) = coin(rng) ? spec.coefficient : -spec.coefficient;
    const double noise_sd = spec.noise_base + spec.noise_slope * static_cast<double>(k - 1);
    values(0, n_lead + f) = noise_sd * noise(0, f);
    for (Eigen::Index s = 1; s < t; ++s) {
      values(s, n_lead + f) = leaders.row(s - 1).dot(load) + noise_sd * noise(s, f);
    }
    out.predictors.push_back(std::move(preds));
  }

  std::vector<std::string> assets;
  for (Eigen::Index j = 0; j < n_lead; ++j) assets.push_back(numbered("L", static_cast<std::size_t>(j), spec.n_leaders));
  for (Eigen::Index f = 0; f < n_follow; ++f) {
    assets.push_back(numbered("F", static_cast<std::size_t>(f), spec.predictor_counts.size()));
  }
  out.panel = ReturnsPanel(synthetic_dates(spec.n_periods), std::move(assets), std::move(values));
  return out;
}

}  // namespace kof
