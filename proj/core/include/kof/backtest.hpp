#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "kof/huber.hpp"
#include "kof/network.hpp"
#include "kof/panel.hpp"
#include "kof/selection.hpp"

namespace kof {

struct BacktestConfig {
  std::size_t T_in = 300;   // in-sample periods
  std::size_t horizon = 5;  // forecast span used for hit ratios
  double q = 0.2;
  std::size_t n_runs = 1;
  SelectionOptions selection{};
  double target_return = 0.005;
  double net_leverage = 1.0;
  // Prediction network re-inferred every `refit_every` periods; the robust
  // forecasts are refreshed every period regardless.
  std::size_t refit_every = 1;
  HuberOptions huber{};

  void validate() const;
};

struct AssetForecast {
  std::size_t asset = 0;
  std::vector<std::size_t> predictors;  // P_i at the origin date
  double predicted = 0.0;               // next-period return
};

/// Forecasts made at the close of row `origin` for row origin + 1.
struct Prediction {
  std::size_t origin = 0;
  std::vector<AssetForecast> forecasts;  // ascending asset order
};

/// Huber fit of r_{target, s+1} on r_{predictors, s} over the T_in rows
/// ending at `origin`, applied to the predictor returns at `origin`.
double forecast_from_predictors(const Eigen::MatrixXd& returns, std::size_t origin, std::size_t target,
                                const std::vector<std::size_t>& predictors, std::size_t t_in,
                                const HuberOptions& huber = {}, RobustFit* fit_out = nullptr);

Prediction predict_with_network(const ReturnsPanel& panel, std::size_t origin, const DirectedNetwork& network,
                                const BacktestConfig& config);

/// Rows (origin - T_in, origin] of the panel form the in-sample window; the
/// prediction network is inferred there with seed derive_seed(seed, {origin}).
DirectedNetwork prediction_network(const ReturnsPanel& panel, std::size_t origin, const BacktestConfig& config,
                                   std::uint64_t seed, unsigned workers = 1);

Prediction predict(const ReturnsPanel& panel, std::size_t origin, const BacktestConfig& config, std::uint64_t seed,
                   unsigned workers = 1);

/// One Prediction per origin in [T_in - 1, T - 2].
std::vector<Prediction> compute_predictions(const ReturnsPanel& panel, const BacktestConfig& config,
                                            std::uint64_t seed, unsigned workers = 1);

struct ForecastRecord {
  std::size_t origin = 0;
  std::size_t asset = 0;
  std::size_t k_in = 0;
  double predicted = 0.0;
  double realized_next = 0.0;
  double realized_horizon = kMissing;  // compounded over `horizon` rows; missing past the panel end
};

struct PositionRecord {
  std::size_t origin = 0;  // realized on row origin + 1
  std::string strategy;
  std::size_t asset = 0;
  double weight = 0.0;
  double predicted = 0.0;  // expected return fed to the strategy
  double realized = 0.0;
};

struct StrategyTrack {
  std::string name;
  std::vector<std::size_t> origins;
  std::vector<double> daily_returns;
  std::vector<double> cumulative;  // running product of (1 + r)
  std::size_t fallback_days = 0;   // mean-variance days that fell back to minimum variance
};

struct BacktestLedger {
  std::vector<Date> dates;  // panel dates
  std::vector<std::string> assets;
  std::size_t horizon = 1;
  std::vector<ForecastRecord> forecasts;
  std::vector<PositionRecord> positions;  // grouped by strategy, then origin
  std::vector<StrategyTrack> tracks;

  const StrategyTrack* track(std::string_view name) const;
};

/// Written into every backtest manifest.
inline constexpr std::string_view kBacktestCaveat =
    "Indicative only: close prices are used both to compute returns and to fill positions; "
    "no transaction costs, borrow costs or market impact are modeled.";

inline constexpr std::string_view kLongShort = "long_short";
inline constexpr std::string_view kLongOnly = "long_only";
inline constexpr std::string_view kMeanVarianceKnockoff = "mv_knockoff";
inline constexpr std::string_view kMeanVarianceHistorical = "mv_historical";

/// Sum of weight * realized over the given positions, in order.
double portfolio_return(const std::vector<PositionRecord>& positions, std::size_t begin, std::size_t end);

/// Forecast records (with k_in and realized returns) for a prediction sequence.
std::vector<ForecastRecord> forecast_records(const ReturnsPanel& panel, const std::vector<Prediction>& predictions,
                                             std::size_t horizon);

/// Long-short (sign(prediction) / n) and long-only (1 / n) tracks over the
/// n predicted assets, rebalanced every period.
BacktestLedger equal_weight_ledger(const ReturnsPanel& panel, const std::vector<Prediction>& predictions,
                                   const BacktestConfig& config);

BacktestLedger run_equal_weight(const ReturnsPanel& panel, const BacktestConfig& config, std::uint64_t seed,
                                unsigned workers = 1);

using CovarianceFilter = std::function<Eigen::MatrixXd(const Eigen::MatrixXd& returns)>;

/// Diagonal-target shrinkage, the same estimator the knockoff engine uses.
CovarianceFilter shrinkage_filter();
CovarianceFilter sample_covariance_filter();

enum class ReturnSource { knockoff_prediction, historical_mean };

std::string_view to_string(ReturnSource source);

struct MeanVarianceSolution {
  Eigen::VectorXd weights;
  bool fallback = false;  // return constraint infeasible; leverage-only minimum variance
};

/// min w' S w  s.t.  w' mu = target,  1' w = leverage  (closed-form Lagrangian).
MeanVarianceSolution solve_mean_variance(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& mu,
                                         double target, double leverage);

/// Mean-variance over the predicted assets of each date, covariance from the
/// trailing T_in rows through `filter`.
BacktestLedger mean_variance_ledger(const ReturnsPanel& panel, const std::vector<Prediction>& predictions,
                                    const BacktestConfig& config, const CovarianceFilter& filter,
                                    ReturnSource source);

BacktestLedger run_mean_variance(const ReturnsPanel& panel, const BacktestConfig& config,
                                 const CovarianceFilter& filter, ReturnSource source, std::uint64_t seed,
                                 unsigned workers = 1);

/// Appends the tracks and positions of `other` (same panel) to `into`.
void merge_ledgers(BacktestLedger& into, const BacktestLedger& other);

struct HitRatioRow {
  std::size_t k_in = 0;
  std::size_t count = 0;
  double hit_ratio = 0.0;
  double standard_error = 0.0;
};

/// Sign hit of the predicted vs realized horizon return, grouped by k_in.
/// A zero realized return counts as a miss; forecasts whose horizon runs past
/// the panel end are skipped.
std::vector<HitRatioRow> hit_ratio_by_kin(const BacktestLedger& ledger);

bool is_hit(const ForecastRecord& record);

/// `date,strategy,asset,weight,predicted_return,realized_return`; date is the
/// row on which the return is realized.
void write_ledger_csv(const BacktestLedger& ledger, const std::filesystem::path& path);
/// `strategy,cumulative_return,hit_ratio,n_days`
void write_summary_csv(const BacktestLedger& ledger, const std::filesystem::path& path);
/// `k_in,count,hit_ratio,stderr`
void write_hit_ratio_csv(const std::vector<HitRatioRow>& rows, const std::filesystem::path& path);

}  // namespace kof
