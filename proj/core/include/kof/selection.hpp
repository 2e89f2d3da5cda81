#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "kof/forest.hpp"
#include "kof/panel.hpp"
#include "kof/synthetic.hpp"

namespace kof {

enum class Method { lasso_path, forest_importance };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);

struct SelectionOptions {
  Method method = Method::lasso_path;
  std::size_t lasso_grid = 100;
  ForestConfig forest{};
  // Randomize the column order of [X, X~] before fitting, then undo it.
  bool shuffle_columns = true;
};

/// Z: quality of the originals, Z~: quality of the knockoffs.
///   lasso_path:        W = max(Z, Z~) * sign(Z - Z~)
///   forest_importance: W = Z - Z~
struct KnockoffStatistics {
  Eigen::VectorXd z;
  Eigen::VectorXd z_tilde;
  Eigen::VectorXd w;
  Method method = Method::lasso_path;
};

struct ThresholdResult {
  double threshold = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> selected;
};

struct SelectionResult {
  KnockoffStatistics statistics;
  double q = 0.0;
  double threshold = std::numeric_limits<double>::infinity();
  std::vector<size_t> selected;  // ascending
  bool empty = true;
};

/// Knockoff+ threshold:
///   tau = min{ t in {|W_j| : W_j != 0} : (1 + #{W_j <= -t}) / max(1, #{W_j >= t}) <= q }
/// Selects {j : W_j >= tau}; empty when no t qualifies.
ThresholdResult knockoff_threshold(const Eigen::VectorXd& w, double q);

Eigen::VectorXd combine_statistics(const Eigen::VectorXd& z, const Eigen::VectorXd& z_tilde, Method method);

/// Fits the learner on [X, X~] and extracts per-column quality.
KnockoffStatistics knockoff_statistics(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                                       const Eigen::MatrixXd& x_tilde, const SelectionOptions& options,
                                       std::uint64_t seed);

/// Standardizes (y, X), samples knockoffs and computes the statistics; the
/// q-independent half of select_once.
KnockoffStatistics sample_statistics(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                                     const SelectionOptions& options, std::uint64_t seed);

SelectionResult select_once(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, double q,
                            const SelectionOptions& options, std::uint64_t seed);

/// Seed used by run r of select_stabilized.
std::uint64_t run_seed(std::uint64_t seed, std::size_t run);

/// Union of the selections of n_runs independent knockoff draws.
std::vector<std::size_t> select_stabilized(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, double q,
                                           std::size_t n_runs, const SelectionOptions& options,
                                           std::uint64_t seed, unsigned workers = 1);

struct BootstrapResult {
  std::vector<std::size_t> counts;  // per candidate asset
  std::size_t n_bootstraps = 0;
  // Per bootstrap, selected candidate indices (into the full panel), ascending.
  std::vector<std::vector<std::size_t>> selections;

  Eigen::VectorXd frequency() const;
};

// Bootstrap b draws its subset from derive_seed(seed, {b, 0}) and selects
// with derive_seed(seed, {b, 1}).
std::uint64_t bootstrap_subset_seed(std::uint64_t seed, std::size_t bootstrap);
std::uint64_t bootstrap_selection_seed(std::uint64_t seed, std::size_t bootstrap);

/// Repeated selection on uniformly drawn column subsets (without replacement
/// within a bootstrap; the subset keeps the panel's column order).
BootstrapResult bootstrap_select(const Eigen::VectorXd& y, const ReturnsPanel& candidates, std::size_t subset_size,
                                 std::size_t n_bootstraps, double q, const SelectionOptions& options,
                                 std::uint64_t seed, unsigned workers = 1);

/// FDP with the convention FDP = 0 for an empty selection.
double false_discovery_proportion(const std::vector<std::size_t>& selected,
                                  const std::vector<std::size_t>& true_support);
/// Fraction of the true support recovered; 0 when the support is empty.
double true_positive_rate(const std::vector<std::size_t>& selected, const std::vector<std::size_t>& true_support);

struct CalibrationRow {
  double q = 0.0;
  std::size_t trial = 0;
  double fdp = 0.0;
  double power = 0.0;
};

struct CalibrationReport {
  std::vector<double> q_grid;
  std::vector<CalibrationRow> rows;  // q-major, then trial
  std::vector<double> realized_fdr;  // mean FDP per q
  std::vector<double> fdr_stderr;    // Monte-Carlo standard error of the mean
  std::vector<double> power;         // mean power per q
  std::size_t trials = 0;
};

// Trial k uses the synthetic seed derive_seed(spec.seed, {k, 0}) and the
// selection seed derive_seed(spec.seed, {k, 1}); one knockoff draw per trial
// is thresholded at every q.
CalibrationReport calibrate_fdr(const SyntheticSpec& spec, const std::vector<double>& q_grid, std::size_t trials,
                                const SelectionOptions& options, unsigned workers = 1);

/// `q,trial,fdp,power`
void write_calibration_csv(const CalibrationReport& report, const std::filesystem::path& path);
/// `q,realized_fdr,stderr,power`
void write_calibration_summary_csv(const CalibrationReport& report, const std::filesystem::path& path);

}  // namespace kof
