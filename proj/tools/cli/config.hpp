#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kof/backtest.hpp"
#include "kof/network.hpp"
#include "kof/panel.hpp"
#include "kof/selection.hpp"
#include "kof/synthetic.hpp"

namespace kof::cli {

/// Invalid or unresolvable configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;

enum class DataSource { panel, synthetic, lead_lag };

struct InputConfig {
  // Unset: synthetic for calibrate/replicate, lead_lag for the network and
  // backtest commands.
  std::optional<DataSource> source;
  std::string panel;    // CSV path when source == panel
  std::string sectors;  // optional asset,sector CSV
  std::string from;     // optional inclusive ISO dates
  std::string to;
};

struct SelectionConfig {
  Method method = Method::lasso_path;
  double q = 0.2;
  std::size_t n_runs = 1;
  std::size_t n_bootstraps = 200;
  std::size_t subset_size = 500;
  std::size_t lasso_grid = 100;
  ForestConfig forest{};

  SelectionOptions options() const;
};

struct CalibrateConfig {
  std::vector<double> q_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  std::size_t trials = 200;
};

struct ReplicateConfig {
  std::string target = "y";  // response column
  std::string target_sector;  // optional; enables the in-sector fraction
};

struct NetworkConfig {
  NetworkKind kind = NetworkKind::explanatory;
  std::size_t null_samples = 100;
};

struct BacktestSection {
  BacktestConfig config{};
  std::vector<std::string> strategies{std::string(kLongShort), std::string(kLongOnly),
                                      std::string(kMeanVarianceKnockoff), std::string(kMeanVarianceHistorical)};
  std::string covariance_filter = "shrinkage";  // or "sample"
};

struct SynthConfig {
  DataSource kind = DataSource::synthetic;  // synthetic or lead_lag
};

/// Every parameter of every subcommand. Flags override file values, which
/// override the defaults above.
struct RunConfig {
  // Generated data uses derive_seed(seed, {0}); analysis uses derive_seed(seed, {1}).
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string out = "out";
  SyntheticSpec synthetic{};
  LeadLagSpec lead_lag{};
  InputConfig input{};
  WindowPlan window{};
  SelectionConfig selection{};
  CalibrateConfig calibrate{};
  ReplicateConfig replicate{};
  NetworkConfig network{};
  BacktestSection backtest{};
  SynthConfig synth{};
};

/// Accepts either a config document or a manifest written by a previous run
/// (its "config" member is used).
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

std::string_view to_string(DataSource source);
DataSource parse_source(const std::string& text);

/// Checks parameter ranges and that input paths exist.
void validate(const RunConfig& config);

}  // namespace kof::cli
