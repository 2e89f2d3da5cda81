#include "cli/commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <ostream>
#include <set>

#include <CLI11.hpp>

#include "kof/csv.hpp"
#include "kof/errors.hpp"
#include "kof/random.hpp"

namespace kof::cli {

using nlohmann::json;

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path.string());
  return out;
}

std::filesystem::path out_dir(const RunConfig& config) {
  std::filesystem::path dir(config.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DomainError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

NetworkOptions network_options(const RunConfig& config) {
  NetworkOptions o;
  o.kind = config.network.kind;
  o.q = config.selection.q;
  o.n_runs = config.selection.n_runs;
  o.selection = config.selection.options();
  return o;
}

BacktestConfig backtest_config(const RunConfig& config) {
  BacktestConfig b = config.backtest.config;
  b.q = config.selection.q;
  b.n_runs = config.selection.n_runs;
  b.selection = config.selection.options();
  return b;
}

bool wants(const RunConfig& config, std::string_view strategy) {
  const auto& s = config.backtest.strategies;
  return std::find(s.begin(), s.end(), strategy) != s.end();
}

void keep_strategies(BacktestLedger& ledger, const RunConfig& config) {
  std::erase_if(ledger.tracks, [&](const StrategyTrack& t) { return !wants(config, t.name); });
  std::erase_if(ledger.positions, [&](const PositionRecord& p) { return !wants(config, p.strategy); });
}

}  // namespace

std::uint64_t data_seed(const RunConfig& config) { return derive_seed(config.seed, {0}); }
std::uint64_t analysis_seed(const RunConfig& config) { return derive_seed(config.seed, {1}); }

DataSource resolve_source(const RunConfig& config, DataSource fallback) {
  if (config.input.source) return *config.input.source;
  if (!config.input.panel.empty()) return DataSource::panel;
  return fallback;
}

LoadedData load_data(const RunConfig& config, DataSource source) {
  LoadedData data;
  switch (source) {
    case DataSource::panel: {
      PanelLoadOptions options;
      if (!config.input.from.empty()) options.from = parse_date(config.input.from);
      if (!config.input.to.empty()) options.to = parse_date(config.input.to);
      options.drop_missing_assets = !config.window.drop_incomplete;
      data.panel = load_panel(config.input.panel, options);
      break;
    }
    case DataSource::synthetic: {
      SyntheticSpec spec = config.synthetic;
      spec.seed = data_seed(config);
      auto generated = generate_synthetic(spec);
      data.panel = std::move(generated.panel);
      data.true_support = std::move(generated.true_support);
      break;
    }
    case DataSource::lead_lag: {
      LeadLagSpec spec = config.lead_lag;
      spec.seed = data_seed(config);
      auto generated = generate_lead_lag(spec);
      data.panel = std::move(generated.panel);
      data.predictors = std::move(generated.predictors);
      break;
    }
  }
  if (!config.input.sectors.empty()) data.panel = data.panel.with_sectors(load_sector_map(config.input.sectors));
  return data;
}

void write_manifest(const RunConfig& config, const std::string& command) {
  json manifest;
  manifest["command"] = command;
  manifest["version"] = KOF_VERSION;
  manifest["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                         "." + std::to_string(EIGEN_MINOR_VERSION)}};
  if (command == "backtest") manifest["caveat"] = std::string(kBacktestCaveat);
  manifest["config"] = to_json(config);
  auto out = open_output(out_dir(config) / "manifest.json");
  out << manifest.dump(2) << '\n';
}

void cmd_calibrate(RunConfig config) {
  validate(config);
  SyntheticSpec spec = config.synthetic;
  spec.seed = analysis_seed(config);
  auto report = calibrate_fdr(spec, config.calibrate.q_grid, config.calibrate.trials, config.selection.options(),
                              config.workers);
  auto dir = out_dir(config);
  write_calibration_csv(report, dir / "calibration.csv");
  write_calibration_summary_csv(report, dir / "calibration_summary.csv");
  write_manifest(config, "calibrate");
}

void cmd_replicate(RunConfig config) {
  config.input.source = resolve_source(config, DataSource::synthetic);
  validate(config);
  auto data = load_data(config, *config.input.source);
  const ReturnsPanel& panel = data.panel;
  auto target = panel.find_asset(config.replicate.target);
  if (!target) throw DomainError("target asset '" + config.replicate.target + "' not in panel");
  std::string sector = config.replicate.target_sector;
  if (sector.empty()) sector = panel.sector_of(*target).value_or("");

  auto dir = out_dir(config);
  auto freq_out = open_output(dir / "replication.csv");
  auto summary_out = open_output(dir / "replication_summary.csv");
  freq_out << "window_end,asset,frequency\n";
  summary_out << "window_end,target_sector,mean_selected,in_sector_fraction\n";

  auto plan_windows = windows(panel, config.window);
  for (std::size_t w = 0; w < plan_windows.size(); ++w) {
    const ReturnsPanel& wp = plan_windows[w].panel;
    auto t = wp.find_asset(config.replicate.target);
    if (!t) throw DomainError("target asset has missing values in window ending " + format_date(plan_windows[w].end_date()));
    Eigen::VectorXd y = wp.column(*t);
    ReturnsPanel candidates = wp.without_asset(*t);
    std::size_t subset = std::min(config.selection.subset_size, candidates.n_assets());
    auto result = bootstrap_select(y, candidates, subset, config.selection.n_bootstraps, config.selection.q,
                                   config.selection.options(), derive_seed(analysis_seed(config), {w}),
                                   config.workers);
    const std::string end = format_date(plan_windows[w].end_date());
    Eigen::VectorXd frequency = result.frequency();
    for (std::size_t j = 0; j < candidates.n_assets(); ++j) {
      freq_out << end << ',' << candidates.assets()[j] << ',' << csv::format_double(frequency(static_cast<Eigen::Index>(j)))
               << '\n';
    }
    std::size_t total = 0;
    std::size_t in_sector = 0;
    for (const auto& sel : result.selections) {
      total += sel.size();
      for (std::size_t j : sel) {
        if (!sector.empty() && candidates.sector_of(j) == sector) ++in_sector;
      }
    }
    double mean_selected = result.n_bootstraps ? static_cast<double>(total) / static_cast<double>(result.n_bootstraps) : 0.0;
    double fraction = (total > 0 && !sector.empty()) ? static_cast<double>(in_sector) / static_cast<double>(total) : kMissing;
    summary_out << end << ',' << sector << ',' << csv::format_double(mean_selected) << ','
                << csv::format_optional(fraction) << '\n';
  }
  if (!freq_out || !summary_out) throw DomainError("write failed in " + dir.string());
  write_manifest(config, "replicate");
}

void cmd_network(RunConfig config) {
  config.input.source = resolve_source(config, DataSource::lead_lag);
  validate(config);
  auto data = load_data(config, *config.input.source);
  auto options = network_options(config);
  std::vector<DirectedNetwork> networks;
  auto plan_windows = windows(data.panel, config.window);
  for (std::size_t w = 0; w < plan_windows.size(); ++w) {
    networks.push_back(
        infer_network(plan_windows[w].panel, options, derive_seed(analysis_seed(config), {w, 0}), config.workers));
  }
  write_edges_csv(networks, out_dir(config) / "edges.csv");
  write_manifest(config, "network");
}

void cmd_metrics(RunConfig config) {
  config.input.source = resolve_source(config, DataSource::lead_lag);
  validate(config);
  auto data = load_data(config, *config.input.source);
  auto series = metrics_timeseries(data.panel, config.window, network_options(config), config.network.null_samples,
                                   analysis_seed(config), config.workers);
  auto dir = out_dir(config);
  write_metrics_csv(series.metrics, dir / "metrics.csv");
  write_edges_csv(series.networks, dir / "edges.csv");
  write_manifest(config, "metrics");
}

void cmd_backtest(RunConfig config) {
  config.input.source = resolve_source(config, DataSource::lead_lag);
  validate(config);
  auto data = load_data(config, *config.input.source);
  const ReturnsPanel& panel = data.panel;
  BacktestConfig bt = backtest_config(config);
  auto predictions = compute_predictions(panel, bt, analysis_seed(config), config.workers);

  BacktestLedger ledger = equal_weight_ledger(panel, predictions, bt);
  CovarianceFilter filter =
      config.backtest.covariance_filter == "sample" ? sample_covariance_filter() : shrinkage_filter();
  if (wants(config, kMeanVarianceKnockoff)) {
    merge_ledgers(ledger, mean_variance_ledger(panel, predictions, bt, filter, ReturnSource::knockoff_prediction));
  }
  if (wants(config, kMeanVarianceHistorical)) {
    merge_ledgers(ledger, mean_variance_ledger(panel, predictions, bt, filter, ReturnSource::historical_mean));
  }
  keep_strategies(ledger, config);

  auto dir = out_dir(config);
  write_ledger_csv(ledger, dir / "ledger.csv");
  write_summary_csv(ledger, dir / "summary.csv");
  write_hit_ratio_csv(hit_ratio_by_kin(ledger), dir / "hit_ratio.csv");
  write_manifest(config, "backtest");
}

void cmd_synth(RunConfig config) {
  validate(config);
  auto data = load_data(config, config.synth.kind);
  auto dir = out_dir(config);
  write_panel(data.panel, dir / "panel.csv");
  if (data.panel.has_sectors()) write_sector_map(data.panel.sectors(), dir / "sectors.csv");
  if (config.synth.kind == DataSource::synthetic) {
    auto out = open_output(dir / "support.csv");
    out << "asset\n";
    for (std::size_t j : data.true_support) out << data.panel.assets()[j + 1] << '\n';
  } else {
    auto out = open_output(dir / "predictors.csv");
    out << "follower,leader\n";
    const std::size_t n_leaders = config.lead_lag.n_leaders;
    for (std::size_t f = 0; f < data.predictors.size(); ++f) {
      for (std::size_t l : data.predictors[f]) {
        out << data.panel.assets()[n_leaders + f] << ',' << data.panel.assets()[l] << '\n';
      }
    }
  }
  write_manifest(config, "synth");
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Knockoff factor selection, network inference and backtests"};
  app.set_version_flag("--version", KOF_VERSION);
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string out_path;

  struct Command {
    const char* name;
    const char* help;
    void (*run)(RunConfig);
  };
  const Command commands[] = {
      {"calibrate", "Realized versus chosen FDR on synthetic designs", cmd_calibrate},
      {"replicate", "Bootstrap selection frequencies for a target series", cmd_replicate},
      {"network", "Rolling-window network edge lists", cmd_network},
      {"metrics", "Rolling-window network metrics with configuration-model nulls", cmd_metrics},
      {"backtest", "Out-of-sample prediction backtest", cmd_backtest},
      {"synth", "Write a synthetic panel", cmd_synth},
  };
  struct Flags {
    CLI::Option* config;
    CLI::Option* seed;
    CLI::Option* workers;
    CLI::Option* out;
  };
  std::vector<std::pair<CLI::App*, Flags>> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    Flags f;
    f.config = sub->add_option("--config", config_path, "JSON config or a previous manifest.json")
                   ->check(CLI::ExistingFile);
    f.seed = sub->add_option("--seed", seed, "Base seed");
    f.workers = sub->add_option("--workers", workers, "Worker threads (0 = all cores)");
    f.out = sub->add_option("--out", out_path, "Output directory");
    subs.emplace_back(sub, f);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    auto& [sub, flags] = subs[i];
    if (!sub->parsed()) continue;
    try {
      RunConfig config = flags.config->count() ? load_config(config_path) : RunConfig{};
      if (flags.seed->count()) config.seed = seed;
      if (flags.workers->count()) config.workers = workers;
      if (flags.out->count()) config.out = out_path;
      commands[i].run(std::move(config));
      return kExitOk;
    } catch (const ConfigError& e) {
      err << "kof: config error: " << e.what() << '\n';
      return kExitConfig;
    } catch (const FormatError& e) {
      err << "kof: data error: " << e.what() << '\n';
      return kExitData;
    } catch (const DomainError& e) {
      err << "kof: data error: " << e.what() << '\n';
      return kExitData;
    } catch (const std::exception& e) {
      err << "kof: error: " << e.what() << '\n';
      return kExitData;
    }
  }
  return kExitConfig;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"kof"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace kof::cli
