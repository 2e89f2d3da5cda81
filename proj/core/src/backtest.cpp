#include "kof/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "kof/csv.hpp"
#include "kof/errors.hpp"
#include "kof/knockoff.hpp"
#include "kof/linalg.hpp"
#include "kof/random.hpp"

namespace kof {

void BacktestConfig::validate() const {
  if (T_in < 10) throw DomainError("backtest: T_in must be >= 10");
  if (horizon < 1) throw DomainError("backtest: horizon must be >= 1");
  if (!(q > 0.0 && q < 1.0)) throw DomainError("backtest: q must lie in (0, 1)");
  if (n_runs < 1) throw DomainError("backtest: n_runs must be >= 1");
  if (refit_every < 1) throw DomainError("backtest: refit_every must be >= 1");
}

const StrategyTrack* BacktestLedger::track(std::string_view name) const {
  for (const auto& t : tracks) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

double forecast_from_predictors(const Eigen::MatrixXd& returns, std::size_t origin, std::size_t target,
                                const std::vector<std::size_t>& predictors, std::size_t t_in,
                                const HuberOptions& huber, RobustFit* fit_out) {
  if (origin + 1 < t_in || origin >= static_cast<std::size_t>(returns.rows())) {
    throw DomainError("forecast: in-sample window does not fit before origin " + std::to_string(origin));
  }
  if (predictors.empty()) throw DomainError("forecast: empty predictor set");
  const std::size_t first = origin + 1 - t_in;
  const auto pairs = static_cast<Eigen::Index>(t_in - 1);
  const auto k = static_cast<Eigen::Index>(predictors.size());
  Eigen::MatrixXd x(pairs, k);
  Eigen::VectorXd y(pairs);
  for (Eigen::Index s = 0; s < pairs; ++s) {
    const auto row = static_cast<Eigen::Index>(first) + s;
    y(s) = returns(row + 1, static_cast<Eigen::Index>(target));
    for (Eigen::Index c = 0; c < k; ++c) x(s, c) = returns(row, static_cast<Eigen::Index>(predictors[c]));
  }
  const RobustFit fit = huber_fit(x, y, huber);
  Eigen::RowVectorXd latest(k);
  for (Eigen::Index c = 0; c < k; ++c) latest(c) = returns(static_cast<Eigen::Index>(origin), static_cast<Eigen::Index>(predictors[c]));
  if (fit_out) *fit_out = fit;
  return fit.predict(latest);
}

Prediction predict_with_network(const ReturnsPanel& panel, std::size_t origin, const DirectedNetwork& network,
                                const BacktestConfig& config) {
  if (network.size() != panel.n_assets()) throw DomainError("predict: network and panel asset counts differ");
  Prediction out;
  out.origin = origin;
  for (std::size_t i = 0; i < network.size(); ++i) {
    auto preds = network.predecessors(i);
    if (preds.empty()) continue;
    const double value = forecast_from_predictors(panel.values(), origin, i, preds, config.T_in, config.huber);
    out.forecasts.push_back(AssetForecast{i, std::move(preds), value});
  }
  return out;
}

DirectedNetwork prediction_network(const ReturnsPanel& panel, std::size_t origin, const BacktestConfig& config,
                                   std::uint64_t seed, unsigned workers) {
  config.validate();
  if (origin + 1 < config.T_in || origin >= panel.periods()) {
    throw DomainError("predict: origin " + std::to_string(origin) + " leaves no full in-sample window");
  }
  const ReturnsPanel window = panel.rows(origin + 1 - config.T_in, config.T_in);
  NetworkOptions options;
  options.kind = NetworkKind::prediction;
  options.q = config.q;
  options.n_runs = config.n_runs;
  options.selection = config.selection;
  return infer_network(window, options, derive_seed(seed, {origin}), workers);
}

Prediction predict(const ReturnsPanel& panel, std::size_t origin, const BacktestConfig& config, std::uint64_t seed,
                   unsigned workers) {
  const DirectedNetwork net = prediction_network(panel, origin, config, seed, workers);
  return predict_with_network(panel, origin, net, config);
}

std::vector<Prediction> compute_predictions(const ReturnsPanel& panel, const BacktestConfig& config,
                                            std::uint64_t seed, unsigned workers) {
  config.validate();
  if (panel.periods() < config.T_in + config.horizon) {
    throw DomainError("backtest: panel must span at least T_in + horizon periods");
  }
  if (panel.has_missing()) throw DomainError("backtest: panel has missing values");
  std::vector<Prediction> out;
  const std::size_t first = config.T_in - 1;
  DirectedNetwork net;
  for (std::size_t origin = first; origin + 1 < panel.periods(); ++origin) {
    if ((origin - first) % config.refit_every == 0) net = prediction_network(panel, origin, config, seed, workers);
    out.push_back(predict_with_network(panel, origin, net, config));
  }
  return out;
}

std::vector<ForecastRecord> forecast_records(const ReturnsPanel& panel, const std::vector<Prediction>& predictions,
                                             std::size_t horizon) {
  const Eigen::MatrixXd& r = panel.values();
  const std::size_t t_max = panel.periods();
  std::vector<ForecastRecord> out;
  for (const auto& p : predictions) {
    for (const auto& f : p.forecasts) {
      ForecastRecord rec;
      rec.origin = p.origin;
      rec.asset = f.asset;
      rec.k_in = f.predictors.size();
      rec.predicted = f.predicted;
      const auto col = static_cast<Eigen::Index>(f.asset);
      rec.realized_next = r(static_cast<Eigen::Index>(p.origin + 1), col);
      if (p.origin + horizon < t_max) {
        double growth = 1.0;
        for (std::size_t h = 1; h <= horizon; ++h) growth *= 1.0 + r(static_cast<Eigen::Index>(p.origin + h), col);
        rec.realized_horizon = growth - 1.0;
      }
      out.push_back(rec);
    }
  }
  return out;
}

double portfolio_return(const std::vector<PositionRecord>& positions, std::size_t begin, std::size_t end) {
  double sum = 0.0;
  for (std::size_t k = begin; k < end; ++k) sum += positions[k].weight * positions[k].realized;
  return sum;
}

namespace {

BacktestLedger empty_ledger(const ReturnsPanel& panel, const std::vector<Prediction>& predictions,
                            const BacktestConfig& config) {
  BacktestLedger ledger;
  ledger.dates = panel.dates();
  ledger.assets = panel.assets();
  ledger.horizon = config.horizon;
  ledger.forecasts = forecast_records(panel, predictions, config.horizon);
  return ledger;
}

// Appends one day of positions and the resulting portfolio return.
void close_day(BacktestLedger& ledger, StrategyTrack& track, std::size_t origin, std::size_t first_position) {
  const double ret = portfolio_return(ledger.positions, first_position, ledger.positions.size());
  const double prev = track.cumulative.empty() ? 1.0 : track.cumulative.back();
  track.origins.push_back(origin);
  track.daily_returns.push_back(ret);
  track.cumulative.push_back(prev * (1.0 + ret));
}

}  // namespace

BacktestLedger equal_weight_ledger(const ReturnsPanel& panel, const std::vector<Prediction>& predictions,
                                   const BacktestConfig& config) {
  BacktestLedger ledger = empty_ledger(panel, predictions, config);
  const Eigen::MatrixXd& r = panel.values();
  for (std::string_view name : {kLongShort, kLongOnly}) {
    StrategyTrack track;
    track.name = std::string(name);
    const bool long_short = name == kLongShort;
    for (const auto& p : predictions) {
      const std::size_t first = ledger.positions.size();
      const double n = static_cast<double>(p.forecasts.size());
      for (const auto& f : p.forecasts) {
        const double sign = f.predicted > 0.0 ? 1.0 : (f.predicted < 0.0 ? -1.0 : 0.0);
        PositionRecord pos;
        pos.origin = p.origin;
        pos.strategy = track.name;
        pos.asset = f.asset;
        pos.weight = (long_short ? sign : 1.0) / n;
        pos.predicted = f.predicted;
        pos.realized = r(static_cast<Eigen::Index>(p.origin + 1), static_cast<Eigen::Index>(f.asset));
        ledger.positions.push_back(std::move(pos));
      }
      close_day(ledger, track, p.origin, first);
    }
    ledger.tracks.push_back(std::move(track));
  }
  return ledger;
}

BacktestLedger run_equal_weight(const ReturnsPanel& panel, const BacktestConfig& config, std::uint64_t seed,
                                unsigned workers) {
  return equal_weight_ledger(panel, compute_predictions(panel, config, seed, workers), config);
}

CovarianceFilter shrinkage_filter() {
  return [](const Eigen::MatrixXd& returns) { return estimate_moments(returns).covariance; };
}

CovarianceFilter sample_covariance_filter() {
  return [](const Eigen::MatrixXd& returns) { return sample_covariance(returns); };
}

std::string_view to_string(ReturnSource source) {
  return source == ReturnSource::knockoff_prediction ? kMeanVarianceKnockoff : kMeanVarianceHistorical;
}

MeanVarianceSolution solve_mean_variance(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& mu,
                                         double target, double leverage) {
  const Eigen::Index n = mu.size();
  if (covariance.rows() != n || covariance.cols() != n || n == 0) {
    throw DomainError("solve_mean_variance: dimension mismatch");
  }
  MeanVarianceSolution out;
  if (n == 1) {
    out.weights = Eigen::VectorXd::Constant(1, leverage);
    out.fallback = std::abs(leverage * mu(0) - target) > 1e-12 * std::max(1.0, std::abs(target));
    return out;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) throw DomainError("solve_mean_variance: covariance is not positive definite");
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd inv_mu = llt.solve(mu);
  const Eigen::VectorXd inv_one = llt.solve(ones);
  const double a = mu.dot(inv_mu);
  const double b = ones.dot(inv_mu);
  const double c = ones.dot(inv_one);
  const double d = a * c - b * b;
  if (d <= 1e-12 * std::max(a * c, 1e-300)) {
    // mu is parallel to 1: the return constraint is redundant or infeasible.
    out.weights = (leverage / c) * inv_one;
    out.fallback = std::abs(out.weights.dot(mu) - target) > 1e-12 * std::max(1.0, std::abs(target));
    return out;
  }
  const double lambda_mu = (c * target - b * leverage) / d;
  const double lambda_one = (a * leverage - b * target) / d;
  out.weights = lambda_mu * inv_mu + lambda_one * inv_one;
  return out;
}

BacktestLedger mean_variance_ledger(const ReturnsPanel& panel, const std::vector<Prediction>& predictions,
                                    const BacktestConfig& config, const CovarianceFilter& filter,
                                    ReturnSource source) {
  BacktestLedger ledger = empty_ledger(panel, predictions, config);
  const Eigen::MatrixXd& r = panel.values();
  StrategyTrack track;
  track.name = std::string(to_string(source));
  for (const auto& p : predictions) {
    const std::size_t first = ledger.positions.size();
    const auto k = static_cast<Eigen::Index>(p.forecasts.size());
    if (k > 0) {
      const auto start = static_cast<Eigen::Index>(p.origin + 1 - config.T_in);
      Eigen::MatrixXd history(static_cast<Eigen::Index>(config.T_in), k);
      Eigen::VectorXd mu(k);
      for (Eigen::Index c = 0; c < k; ++c) {
        const auto col = static_cast<Eigen::Index>(p.forecasts[static_cast<std::size_t>(c)].asset);
        history.col(c) = r.col(col).segment(start, static_cast<Eigen::Index>(config.T_in));
        mu(c) = source == ReturnSource::knockoff_prediction ? p.forecasts[static_cast<std::size_t>(c)].predicted
                                                            : history.col(c).mean();
      }
      const auto solution = solve_mean_variance(filter(history), mu, config.target_return, config.net_leverage);
      if (solution.fallback) ++track.fallback_days;
      for (Eigen::Index c = 0; c < k; ++c) {
        const std::size_t asset = p.forecasts[static_cast<std::size_t>(c)].asset;
        PositionRecord pos;
        pos.origin = p.origin;
        pos.strategy = track.name;
        pos.asset = asset;
        pos.weight = solution.weights(c);
        pos.predicted = mu(c);
        pos.realized = r(static_cast<Eigen::Index>(p.origin + 1), static_cast<Eigen::Index>(asset));
        ledger.positions.push_back(std::move(pos));
      }
    }
    close_day(ledger, track, p.origin, first);
  }
  ledger.tracks.push_back(std::move(track));
  return ledger;
}

BacktestLedger run_mean_variance(const ReturnsPanel& panel, const BacktestConfig& config,
                                 const CovarianceFilter& filter, ReturnSource source, std::uint64_t seed,
                                 unsigned workers) {
  return mean_variance_ledger(panel, compute_predictions(panel, config, seed, workers), config, filter, source);
}

void merge_ledgers(BacktestLedger& into, const BacktestLedger& other) {
  if (into.dates.empty()) {
    into = other;
    return;
  }
  into.positions.insert(into.positions.end(), other.positions.begin(), other.positions.end());
  into.tracks.insert(into.tracks.end(), other.tracks.begin(), other.tracks.end());
}

bool is_hit(const ForecastRecord& record) { return record.predicted * record.realized_horizon > 0.0; }

std::vector<HitRatioRow> hit_ratio_by_kin(const BacktestLedger& ledger) {
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> groups;  // k_in -> (hits, count)
  for (const auto& f : ledger.forecasts) {
    if (std::isnan(f.realized_horizon)) continue;
    auto& g = groups[f.k_in];
    g.first += is_hit(f) ? 1 : 0;
    ++g.second;
  }
  std::vector<HitRatioRow> rows;
  for (const auto& [k, g] : groups) {
    HitRatioRow row;
    row.k_in = k;
    row.count = g.second;
    row.hit_ratio = static_cast<double>(g.first) / static_cast<double>(g.second);
    row.standard_error = std::sqrt(row.hit_ratio * (1.0 - row.hit_ratio) / static_cast<double>(g.second));
    rows.push_back(row);
  }
  return rows;
}

void write_ledger_csv(const BacktestLedger& ledger, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path.string());
  out << "date,strategy,asset,weight,predicted_return,realized_return\n";
  for (const auto& p : ledger.positions) {
    out << format_date(ledger.dates.at(p.origin + 1)) << ',' << p.strategy << ',' << ledger.assets.at(p.asset) << ','
        << csv::format_double(p.weight) << ',' << csv::format_double(p.predicted) << ','
        << csv::format_double(p.realized) << '\n';
  }
}

void write_summary_csv(const BacktestLedger& ledger, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path.string());
  out << "strategy,cumulative_return,hit_ratio,n_days\n";
  for (const auto& track : ledger.tracks) {
    std::size_t hits = 0, taken = 0;
    for (const auto& p : ledger.positions) {
      if (p.strategy != track.name || p.weight == 0.0) continue;
      ++taken;
      if (p.weight * p.realized > 0.0) ++hits;
    }
    const double cumulative = track.cumulative.empty() ? 0.0 : track.cumulative.back() - 1.0;
    const double hit = taken ? static_cast<double>(hits) / static_cast<double>(taken) : kMissing;
    out << track.name << ',' << csv::format_double(cumulative) << ',' << csv::format_optional(hit) << ','
        << track.daily_returns.size() << '\n';
  }
}

void write_hit_ratio_csv(const std::vector<HitRatioRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path.string());
  out << "k_in,count,hit_ratio,stderr\n";
  for (const auto& row : rows) {
    out << row.k_in << ',' << row.count << ',' << csv::format_double(row.hit_ratio) << ','
        << csv::format_double(row.standard_error) << '\n';
  }
}

}  // namespace kof
