#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace kof {

using Date = std::chrono::year_month_day;
using SectorMap = std::map<std::string, std::string, std::less<>>;

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD).
std::optional<Date> parse_date(std::string_view text);
std::string format_date(const Date& date);

/// T x N matrix of simple per-period returns with date and asset labels.
///
/// Dates are strictly increasing and asset names unique. Entries are finite
/// unless the panel was built with `allow_missing`, in which case NaN marks a
/// missing observation and `windows()` filters incomplete assets per window.
class ReturnsPanel {
 public:
  ReturnsPanel() = default;
  ReturnsPanel(std::vector<Date> dates, std::vector<std::string> assets, Eigen::MatrixXd values,
               SectorMap sectors = {}, bool allow_missing = false);

  std::size_t periods() const { return dates_.size(); }
  std::size_t n_assets() const { return assets_.size(); }

  const std::vector<Date>& dates() const { return dates_; }
  const std::vector<std::string>& assets() const { return assets_; }
  const Eigen::MatrixXd& values() const { return values_; }
  const SectorMap& sectors() const { return sectors_; }

  bool has_sectors() const { return !sectors_.empty(); }
  bool has_missing() const;
  std::optional<std::size_t> find_asset(std::string_view name) const;
  std::optional<std::string> sector_of(std::size_t asset) const;

  Eigen::VectorXd column(std::size_t asset) const { return values_.col(static_cast<Eigen::Index>(asset)); }

  ReturnsPanel rows(std::size_t begin, std::size_t count) const;
  ReturnsPanel select_assets(std::span<const std::size_t> indices) const;
  ReturnsPanel without_asset(std::size_t asset) const;
  ReturnsPanel drop_incomplete_assets() const;
  ReturnsPanel with_sectors(SectorMap sectors) const;

 private:
  std::vector<Date> dates_;
  std::vector<std::string> assets_;
  Eigen::MatrixXd values_;
  SectorMap sectors_;
};

enum class PanelFormat { csv };

struct PanelLoadOptions {
  PanelFormat format = PanelFormat::csv;
  std::optional<Date> from;  // inclusive
  std::optional<Date> to;    // inclusive
  // When false, missing cells are kept as NaN for per-window filtering.
  bool drop_missing_assets = true;
};

/// Reads `date,<asset1>,<asset2>,...` CSV. Empty cells are missing values.
ReturnsPanel load_panel(const std::filesystem::path& path, const PanelLoadOptions& options = {});
ReturnsPanel read_panel(std::istream& in, const PanelLoadOptions& options = {});

void write_panel(const ReturnsPanel& panel, const std::filesystem::path& path);
void write_panel(const ReturnsPanel& panel, std::ostream& out);

/// Reads an `asset,sector` CSV.
SectorMap load_sector_map(const std::filesystem::path& path);
SectorMap read_sector_map(std::istream& in);
void write_sector_map(const SectorMap& sectors, const std::filesystem::path& path);

struct WindowPlan {
  std::size_t length = 252;
  std::size_t step = 1;
  bool drop_incomplete = true;
};

struct PanelWindow {
  std::size_t start = 0;  // first row in the parent panel
  ReturnsPanel panel;

  Date end_date() const { return panel.dates().back(); }
};

std::size_t window_count(std::size_t periods, const WindowPlan& plan);

/// Rolling windows [start, start + length) spaced by plan.step. Assets with a
/// missing value inside a window are dropped from that window.
std::vector<PanelWindow> windows(const ReturnsPanel& panel, const WindowPlan& plan);

}  // namespace kof
