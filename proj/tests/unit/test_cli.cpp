#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "fixtures.hpp"

using namespace kof;
using namespace kof::cli;
using kof::testing::read_file;
using kof::testing::TempDir;
using kof::testing::write_file;

namespace {

constexpr const char* kSmallConfig = R"({
  "synthetic": {"n_assets": 30, "n_periods": 120, "n_relevant": 5},
  "calibrate": {"trials": 50},
  "lead_lag": {"n_leaders": 6, "predictor_counts": [2, 3], "n_periods": 120},
  "window": {"length": 100, "step": 20},
  "selection": {"n_bootstraps": 5, "subset_size": 20},
  "network": {"null_samples": 5},
  "backtest": {"T_in": 100, "refit_every": 10}
})";

int run(const std::vector<std::string>& args, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (err_text) *err_text = err.str();
  return code;
}

std::size_t lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST(Config, DefaultsAndOverrides) {
  auto c = parse_config(nlohmann::json::parse(R"({"seed": 9, "selection": {"method": "forest", "q": 0.1}})"));
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.selection.method, Method::forest_importance);
  EXPECT_DOUBLE_EQ(c.selection.q, 0.1);
  EXPECT_EQ(c.selection.n_bootstraps, 200u);
  EXPECT_EQ(c.window.length, 252u);
}

TEST(Config, RejectsUnknownKeysAndWrongTypes) {
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"selction": {}})")), ConfigError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"selection": {"q": "high"}})")), ConfigError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"window": {"length": -3}})")), ConfigError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"network": {"kind": "sideways"}})")), ConfigError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"([1, 2])")), ConfigError);
}

TEST(Config, RoundTripsThroughJson) {
  auto c = parse_config(nlohmann::json::parse(kSmallConfig));
  c.seed = 77;
  c.input.source = DataSource::lead_lag;
  auto again = parse_config(to_json(c));
  EXPECT_EQ(to_json(again), to_json(c));
}

TEST(Config, ValidateChecksRangesAndPaths) {
  RunConfig c;
  c.input.panel = "/nonexistent/panel.csv";
  EXPECT_THROW(validate(c), ConfigError);
  c = RunConfig{};
  c.selection.q = 1.5;
  EXPECT_THROW(validate(c), ConfigError);
  c = RunConfig{};
  c.backtest.strategies = {"momentum"};
  EXPECT_THROW(validate(c), ConfigError);
  EXPECT_NO_THROW(validate(RunConfig{}));
}

TEST(Cli, ExitCodes) {
  TempDir dir("cli_exit");
  EXPECT_EQ(run({"--help"}), kExitOk);
  EXPECT_EQ(run({}), kExitConfig);
  EXPECT_EQ(run({"frobnicate"}), kExitConfig);
  EXPECT_EQ(run({"synth", "--config", (dir / "missing.json").string()}), kExitConfig);
  write_file(dir / "bad.json", "{not json");
  EXPECT_EQ(run({"synth", "--config", (dir / "bad.json").string()}), kExitConfig);

  write_file(dir / "panel.csv", "date,A,B\n2020-01-02,0.1,0.2\nnot-a-date,0.1,0.2\n");
  write_file(dir / "cfg.json", R"({"input": {"panel": ")" + (dir / "panel.csv").string() + R"("}})");
  std::string err;
  EXPECT_EQ(run({"network", "--config", (dir / "cfg.json").string(), "--out", (dir / "o").string()}, &err), kExitData);
  EXPECT_NE(err.find("line 3"), std::string::npos);
}

TEST(Cli, SynthWritesPanelAndTruth) {
  TempDir dir("cli_synth");
  write_file(dir / "cfg.json", kSmallConfig);
  ASSERT_EQ(run({"synth", "--config", (dir / "cfg.json").string(), "--out", (dir / "s").string()}), kExitOk);
  auto panel = load_panel(dir / "s" / "panel.csv");
  EXPECT_EQ(panel.n_assets(), 31u);
  EXPECT_EQ(panel.periods(), 120u);
  EXPECT_EQ(lines(read_file(dir / "s" / "support.csv")), 6u);
  EXPECT_EQ(load_sector_map(dir / "s" / "sectors.csv").size(), 31u);
}

TEST(Cli, CalibrateShapeAndSummaryRows) {
  TempDir dir("cli_cal");
  write_file(dir / "cfg.json", kSmallConfig);
  ASSERT_EQ(run({"calibrate", "--config", (dir / "cfg.json").string(), "--out", (dir / "c").string()}), kExitOk);
  EXPECT_EQ(lines(read_file(dir / "c" / "calibration.csv")), 1u + 6u * 50u);
  EXPECT_EQ(lines(read_file(dir / "c" / "calibration_summary.csv")), 1u + 6u);
}

TEST(Cli, SeedFlagOverridesConfig) {
  TempDir dir("cli_seed");
  write_file(dir / "cfg.json", R"({"seed": 1, "synthetic": {"n_assets": 5, "n_periods": 20, "n_relevant": 1}})");
  const std::string cfg = (dir / "cfg.json").string();
  ASSERT_EQ(run({"synth", "--config", cfg, "--out", (dir / "a").string()}), kExitOk);
  ASSERT_EQ(run({"synth", "--config", cfg, "--out", (dir / "b").string(), "--seed", "1"}), kExitOk);
  ASSERT_EQ(run({"synth", "--config", cfg, "--out", (dir / "c").string(), "--seed", "2"}), kExitOk);
  EXPECT_EQ(read_file(dir / "a" / "panel.csv"), read_file(dir / "b" / "panel.csv"));
  EXPECT_NE(read_file(dir / "a" / "panel.csv"), read_file(dir / "c" / "panel.csv"));
  auto manifest = nlohmann::json::parse(read_file(dir / "c" / "manifest.json"));
  EXPECT_EQ(manifest["config"]["seed"], 2);
  EXPECT_EQ(manifest["command"], "synth");
}

TEST(Cli, ManifestRegeneratesOutputs) {
  TempDir dir("cli_manifest");
  write_file(dir / "cfg.json", kSmallConfig);
  ASSERT_EQ(run({"metrics", "--config", (dir / "cfg.json").string(), "--out", (dir / "m1").string(), "--seed", "4"}),
            kExitOk);
  ASSERT_EQ(run({"metrics", "--config", (dir / "m1" / "manifest.json").string(), "--out", (dir / "m2").string()}),
            kExitOk);
  EXPECT_EQ(read_file(dir / "m1" / "metrics.csv"), read_file(dir / "m2" / "metrics.csv"));
  EXPECT_EQ(read_file(dir / "m1" / "edges.csv"), read_file(dir / "m2" / "edges.csv"));
  EXPECT_EQ(lines(read_file(dir / "m1" / "metrics.csv")), 1u + 2u);
}

TEST(Cli, BacktestOutputsAndCaveat) {
  TempDir dir("cli_bt");
  write_file(dir / "cfg.json", kSmallConfig);
  ASSERT_EQ(run({"backtest", "--config", (dir / "cfg.json").string(), "--out", (dir / "b").string()}), kExitOk);
  auto manifest = nlohmann::json::parse(read_file(dir / "b" / "manifest.json"));
  EXPECT_EQ(manifest["caveat"], std::string(kBacktestCaveat));
  EXPECT_EQ(manifest["config"]["input"]["source"], "lead_lag");
  EXPECT_EQ(lines(read_file(dir / "b" / "summary.csv")), 1u + 4u);
  EXPECT_EQ(read_file(dir / "b" / "hit_ratio.csv").substr(0, 27), "k_in,count,hit_ratio,stderr");
}

TEST(Cli, PanelInputWithSectors) {
  TempDir dir("cli_panel");
  SyntheticSpec spec;
  spec.n_assets = 12;
  spec.n_periods = 60;
  spec.n_relevant = 3;
  auto data = generate_synthetic(spec);
  write_panel(data.panel, dir / "panel.csv");
  SectorMap sectors;
  for (std::size_t j = 0; j < data.panel.n_assets(); ++j) sectors[data.panel.assets()[j]] = j % 2 ? "odd" : "even";
  write_sector_map(sectors, dir / "sectors.csv");
  write_file(dir / "cfg.json", R"({"input": {"panel": ")" + (dir / "panel.csv").string() + R"(", "sectors": ")" +
                                   (dir / "sectors.csv").string() +
                                   R"("}, "window": {"length": 60}, "network": {"null_samples": 3}})");
  ASSERT_EQ(run({"metrics", "--config", (dir / "cfg.json").string(), "--out", (dir / "o").string()}), kExitOk);
  std::istringstream in(read_file(dir / "o" / "metrics.csv"));
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(row.substr(0, 14), "2000-03-24,13,");
}

TEST(Cli, ReplicateRecoversTheTargetSector) {
  TempDir dir("cli_rep");
  write_file(dir / "cfg.json", R"({
    "synthetic": {"n_assets": 100, "n_periods": 252, "n_relevant": 20},
    "selection": {"n_bootstraps": 40, "subset_size": 100, "q": 0.2}
  })");
  ASSERT_EQ(run({"replicate", "--config", (dir / "cfg.json").string(), "--out", (dir / "r").string()}), kExitOk);
  std::istringstream in(read_file(dir / "r" / "replication_summary.csv"));
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "window_end,target_sector,mean_selected,in_sector_fraction");
  const double fraction = std::stod(row.substr(row.rfind(',') + 1));
  EXPECT_GE(fraction, 1.0 - 0.2 - 0.1);
  EXPECT_EQ(lines(read_file(dir / "r" / "replication.csv")), 1u + 100u);
}
