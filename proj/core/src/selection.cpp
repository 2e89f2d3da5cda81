#include "kof/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "kof/csv.hpp"
#include "kof/errors.hpp"
#include "kof/knockoff.hpp"
#include "kof/lasso.hpp"
#include "kof/linalg.hpp"
#include "kof/parallel.hpp"
#include "kof/random.hpp"

namespace kof {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::lasso_path:
      return "lasso_path";
    case Method::forest_importance:
      return "forest_importance";
  }
  return "unknown";
}

Method parse_method(std::string_view text) {
  if (text == "lasso_path" || text == "lasso") return Method::lasso_path;
  if (text == "forest_importance" || text == "forest") return Method::forest_importance;
  throw DomainError("unknown selection method '" + std::string(text) + "'");
}

ThresholdResult knockoff_threshold(const Eigen::VectorXd& w, double q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("knockoff_threshold: q must lie in (0, 1)");
  if (!w.allFinite()) throw DomainError("knockoff_threshold: W must be finite");

  std::vector<double> positive, negative;  // magnitudes, ascending after sort
  for (double v : w) {
    if (v > 0.0) positive.push_back(v);
    if (v < 0.0) negative.push_back(-v);
  }
  std::sort(positive.begin(), positive.end());
  std::sort(negative.begin(), negative.end());
  std::vector<double> candidates(positive);
  candidates.insert(candidates.end(), negative.begin(), negative.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  ThresholdResult out;
  for (double t : candidates) {
    const auto n_pos = static_cast<double>(positive.end() - std::lower_bound(positive.begin(), positive.end(), t));
    const auto n_neg = static_cast<double>(negative.end() - std::lower_bound(negative.begin(), negative.end(), t));
    if ((1.0 + n_neg) / std::max(1.0, n_pos) <= q) {
      out.threshold = t;
      break;
    }
  }
  if (std::isfinite(out.threshold)) {
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      if (w(j) >= out.threshold) out.selected.push_back(static_cast<std::size_t>(j));
    }
  }
  return out;
}

Eigen::VectorXd combine_statistics(const Eigen::VectorXd& z, const Eigen::VectorXd& z_tilde, Method method) {
  if (method == Method::forest_importance) return z - z_tilde;
  Eigen::VectorXd w(z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    const double diff = z(j) - z_tilde(j);
    const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    w(j) = std::max(z(j), z_tilde(j)) * sign;
  }
  return w;
}

KnockoffStatistics knockoff_statistics(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                                       const Eigen::MatrixXd& x_tilde, const SelectionOptions& options,
                                       std::uint64_t seed) {
  if (x.rows() != x_tilde.rows() || x.cols() != x_tilde.cols() || x.rows() != y.size()) {
    throw DomainError("knockoff_statistics: dimension mismatch");
  }
  const Eigen::Index n = x.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(2 * n));
  std::iota(order.begin(), order.end(), 0);
  if (options.shuffle_columns) {
    Rng rng(derive_seed(seed, {0}));
    std::shuffle(order.begin(), order.end(), rng);
  }
  Eigen::MatrixXd augmented(x.rows(), 2 * n);
  for (Eigen::Index k = 0; k < 2 * n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    augmented.col(k) = src < n ? x.col(src) : x_tilde.col(src - n);
  }

  Eigen::VectorXd fitted;
  if (options.method == Method::lasso_path) {
    // Both halves on the same standardized footing, as with the originals.
    const Eigen::MatrixXd standardized = standardize_columns(augmented).values;
    LassoOptions lasso;
    lasso.grid_size = options.lasso_grid;
    fitted = lasso_path(standardized, y, lasso).entry_lambda;
  } else {
    const ForestConfig& cfg = options.forest;
    fitted = fit_forest(augmented, y, cfg, derive_seed(seed, {1})).importance;
  }

  Eigen::VectorXd score(2 * n);
  for (Eigen::Index k = 0; k < 2 * n; ++k) score(order[static_cast<std::size_t>(k)]) = fitted(k);

  KnockoffStatistics stats;
  stats.method = options.method;
  stats.z = score.head(n);
  stats.z_tilde = score.tail(n);
  stats.w = combine_statistics(stats.z, stats.z_tilde, options.method);
  return stats;
}

KnockoffStatistics sample_statistics(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                                     const SelectionOptions& options, std::uint64_t seed) {
  if (x.rows() != y.size()) throw DomainError("select: X and y row counts differ");
  if (x.cols() == 0) throw DomainError("select: no candidate factors");
  const Eigen::MatrixXd xs = standardize_columns(x).values;
  const Eigen::VectorXd ys = standardize_vector(y);
  const KnockoffSample sample = build_knockoffs(xs, derive_seed(seed, {2}));
  return knockoff_statistics(ys, xs, sample.knockoffs, options, derive_seed(seed, {3}));
}

SelectionResult select_once(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, double q,
                            const SelectionOptions& options, std::uint64_t seed) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("select_once: q must lie in (0, 1)");
  SelectionResult result;
  result.statistics = sample_statistics(y, x, options, seed);
  auto threshold = knockoff_threshold(result.statistics.w, q);
  result.q = q;
  result.threshold = threshold.threshold;
  result.selected = std::move(threshold.selected);
  result.empty = result.selected.empty();
  return result;
}

std::uint64_t run_seed(std::uint64_t seed, std::size_t run) { return derive_seed(seed, {run}); }

std::vector<std::size_t> select_stabilized(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, double q,
                                           std::size_t n_runs, const SelectionOptions& options,
                                           std::uint64_t seed, unsigned workers) {
  if (n_runs < 1) throw DomainError("select_stabilized: n_runs must be >= 1");
  std::vector<std::vector<std::size_t>> runs(n_runs);
  parallel_for(n_runs, workers,
               [&](std::size_t r) { runs[r] = select_once(y, x, q, options, run_seed(seed, r)).selected; });
  std::vector<bool> hit(static_cast<std::size_t>(x.cols()), false);
  for (const auto& sel : runs) {
    for (std::size_t j : sel) hit[j] = true;
  }
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < hit.size(); ++j) {
    if (hit[j]) out.push_back(j);
  }
  return out;
}

Eigen::VectorXd BootstrapResult::frequency() const {
  Eigen::VectorXd f(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t j = 0; j < counts.size(); ++j) {
    f(static_cast<Eigen::Index>(j)) = n_bootstraps ? static_cast<double>(counts[j]) / static_cast<double>(n_bootstraps) : 0.0;
  }
  return f;
}

std::uint64_t bootstrap_subset_seed(std::uint64_t seed, std::size_t bootstrap) {
  return derive_seed(seed, {bootstrap, 0});
}

std::uint64_t bootstrap_selection_seed(std::uint64_t seed, std::size_t bootstrap) {
  return derive_seed(seed, {bootstrap, 1});
}

BootstrapResult bootstrap_select(const Eigen::VectorXd& y, const ReturnsPanel& candidates, std::size_t subset_size,
                                 std::size_t n_bootstraps, double q, const SelectionOptions& options,
                                 std::uint64_t seed, unsigned workers) {
  const std::size_t n = candidates.n_assets();
  if (subset_size == 0 || subset_size > n) {
    throw DomainError("bootstrap_select: subset_size must be in [1, " + std::to_string(n) + "]");
  }
  if (static_cast<std::size_t>(y.size()) != candidates.periods()) {
    throw DomainError("bootstrap_select: y length differs from panel periods");
  }
  BootstrapResult out;
  out.n_bootstraps = n_bootstraps;
  out.selections.resize(n_bootstraps);
  const Eigen::MatrixXd& values = candidates.values();
  parallel_for(n_bootstraps, workers, [&](std::size_t b) {
    Rng rng(bootstrap_subset_seed(seed, b));
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t k = 0; k < subset_size; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, n - 1);
      std::swap(pool[k], pool[pick(rng)]);
    }
    std::vector<std::size_t> subset(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(subset_size));
    std::sort(subset.begin(), subset.end());
    Eigen::MatrixXd x(values.rows(), static_cast<Eigen::Index>(subset_size));
    for (std::size_t k = 0; k < subset_size; ++k) x.col(static_cast<Eigen::Index>(k)) = values.col(static_cast<Eigen::Index>(subset[k]));
    const auto result = select_once(y, x, q, options, bootstrap_selection_seed(seed, b));
    auto& chosen = out.selections[b];
    for (std::size_t k : result.selected) chosen.push_back(subset[k]);
  });
  out.counts.assign(n, 0);
  for (const auto& sel : out.selections) {
    for (std::size_t j : sel) ++out.counts[j];
  }
  return out;
}

double false_discovery_proportion(const std::vector<std::size_t>& selected,
                                  const std::vector<std::size_t>& true_support) {
  if (selected.empty()) return 0.0;
  std::size_t false_hits = 0;
  for (std::size_t j : selected) {
    if (!std::binary_search(true_support.begin(), true_support.end(), j)) ++false_hits;
  }
  return static_cast<double>(false_hits) / static_cast<double>(selected.size());
}

double true_positive_rate(const std::vector<std::size_t>& selected, const std::vector<std::size_t>& true_support) {
  if (true_support.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t j : selected) {
    if (std::binary_search(true_support.begin(), true_support.end(), j)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(true_support.size());
}

CalibrationReport calibrate_fdr(const SyntheticSpec& spec, const std::vector<double>& q_grid, std::size_t trials,
                                const SelectionOptions& options, unsigned workers) {
  spec.validate();
  if (trials < 50) throw DomainError("calibrate_fdr: trials must be >= 50");
  if (q_grid.empty()) throw DomainError("calibrate_fdr: empty q grid");
  for (double q : q_grid) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("calibrate_fdr: q must lie in (0, 1)");
  }

  const std::size_t n_q = q_grid.size();
  std::vector<CalibrationRow> rows(n_q * trials);
  parallel_for(trials, workers, [&](std::size_t k) {
    SyntheticSpec trial_spec = spec;
    trial_spec.seed = derive_seed(spec.seed, {k, 0});
    const SyntheticData data = generate_synthetic(trial_spec);
    const KnockoffStatistics stats =
        sample_statistics(data.response(), data.factors(), options, derive_seed(spec.seed, {k, 1}));
    for (std::size_t i = 0; i < n_q; ++i) {
      const auto selected = knockoff_threshold(stats.w, q_grid[i]).selected;
      rows[i * trials + k] = CalibrationRow{q_grid[i], k, false_discovery_proportion(selected, data.true_support),
                                            true_positive_rate(selected, data.true_support)};
    }
  });

  CalibrationReport report;
  report.q_grid = q_grid;
  report.trials = trials;
  report.rows = std::move(rows);
  for (std::size_t i = 0; i < n_q; ++i) {
    double sum = 0.0, sum_sq = 0.0, power = 0.0;
    for (std::size_t k = 0; k < trials; ++k) {
      const auto& row = report.rows[i * trials + k];
      sum += row.fdp;
      sum_sq += row.fdp * row.fdp;
      power += row.power;
    }
    const double m = static_cast<double>(trials);
    const double mean = sum / m;
    const double var = std::max(0.0, (sum_sq - m * mean * mean) / (m - 1.0));
    report.realized_fdr.push_back(mean);
    report.fdr_stderr.push_back(std::sqrt(var / m));
    report.power.push_back(power / m);
  }
  return report;
}

void write_calibration_csv(const CalibrationReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path.string());
  out << "q,trial,fdp,power\n";
  for (const auto& row : report.rows) {
    out << csv::format_double(row.q) << ',' << row.trial << ',' << csv::format_double(row.fdp) << ','
        << csv::format_double(row.power) << '\n';
  }
}

void write_calibration_summary_csv(const CalibrationReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path.string());
  out << "q,realized_fdr,stderr,power\n";
  for (std::size_t i = 0; i < report.q_grid.size(); ++i) {
    out << csv::format_double(report.q_grid[i]) << ',' << csv::format_double(report.realized_fdr[i]) << ','
        << csv::format_double(report.fdr_stderr[i]) << ',' << csv::format_double(report.power[i]) << '\n';
  }
}

}  // namespace kof
