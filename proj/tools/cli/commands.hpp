#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cli/config.hpp"

namespace kof::cli {

struct LoadedData {
  ReturnsPanel panel;
  std::vector<std::size_t> true_support;          // synthetic only
  std::vector<std::vector<std::size_t>> predictors;  // lead_lag only
};

DataSource resolve_source(const RunConfig& config, DataSource fallback);
LoadedData load_data(const RunConfig& config, DataSource source);

std::uint64_t data_seed(const RunConfig& config);
std::uint64_t analysis_seed(const RunConfig& config);

// Each command writes its CSV files plus manifest.json into config.out.
void cmd_calibrate(RunConfig config);
void cmd_replicate(RunConfig config);
void cmd_network(RunConfig config);
void cmd_metrics(RunConfig config);
void cmd_backtest(RunConfig config);
void cmd_synth(RunConfig config);

void write_manifest(const RunConfig& config, const std::string& command);

/// Parses argv, dispatches, and maps errors to exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kof::cli
