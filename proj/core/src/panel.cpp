#include "kof/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "kof/csv.hpp"
#include "kof/errors.hpp"

namespace kof {

namespace {

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_number(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string(), 0);
  return in;
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
  text = csv::trim(text);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) ||
      !parse_int(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  const Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_date(const Date& date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

ReturnsPanel::ReturnsPanel(std::vector<Date> dates, std::vector<std::string> assets,
                           Eigen::MatrixXd values, SectorMap sectors, bool allow_missing)
    : dates_(std::move(dates)),
      assets_(std::move(assets)),
      values_(std::move(values)),
      sectors_(std::move(sectors)) {
  if (values_.rows() != static_cast<Eigen::Index>(dates_.size()) ||
      values_.cols() != static_cast<Eigen::Index>(assets_.size())) {
    throw DomainError("ReturnsPanel: values must be " + std::to_string(dates_.size()) + "x" +
                      std::to_string(assets_.size()));
  }
  for (std::size_t t = 1; t < dates_.size(); ++t) {
    if (!(dates_[t - 1] < dates_[t])) {
      throw DomainError("ReturnsPanel: dates must be strictly increasing at row " + std::to_string(t));
    }
  }
  std::set<std::string_view> seen;
  for (const auto& a : assets_) {
    if (!seen.insert(a).second) throw DomainError("ReturnsPanel: duplicate asset '" + a + "'");
  }
  for (Eigen::Index j = 0; j < values_.cols(); ++j) {
    for (Eigen::Index t = 0; t < values_.rows(); ++t) {
      const double v = values_(t, j);
      if (std::isinf(v) || (std::isnan(v) && !allow_missing)) {
        throw DomainError("ReturnsPanel: non-finite value for asset '" + assets_[j] + "'");
      }
    }
  }
}

bool ReturnsPanel::has_missing() const { return values_.hasNaN(); }

std::optional<std::size_t> ReturnsPanel::find_asset(std::string_view name) const {
  auto it = std::find(assets_.begin(), assets_.end(), name);
  if (it == assets_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - assets_.begin());
}

std::optional<std::string> ReturnsPanel::sector_of(std::size_t asset) const {
  auto it = sectors_.find(assets_.at(asset));
  if (it == sectors_.end()) return std::nullopt;
  return it->second;
}

ReturnsPanel ReturnsPanel::rows(std::size_t begin, std::size_t count) const {
  if (begin + count > periods()) throw DomainError("ReturnsPanel::rows: range out of bounds");
  std::vector<Date> d(dates_.begin() + static_cast<std::ptrdiff_t>(begin),
                      dates_.begin() + static_cast<std::ptrdiff_t>(begin + count));
  Eigen::MatrixXd v = values_.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(count));
  return ReturnsPanel(std::move(d), assets_, std::move(v), sectors_, true);
}

ReturnsPanel ReturnsPanel::select_assets(std::span<const std::size_t> indices) const {
  std::vector<std::string> names;
  names.reserve(indices.size());
  Eigen::MatrixXd v(values_.rows(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    names.push_back(assets_.at(indices[k]));
    v.col(static_cast<Eigen::Index>(k)) = values_.col(static_cast<Eigen::Index>(indices[k]));
  }
  return ReturnsPanel(dates_, std::move(names), std::move(v), sectors_, true);
}

ReturnsPanel ReturnsPanel::without_asset(std::size_t asset) const {
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < n_assets(); ++j) {
    if (j != asset) keep.push_back(j);
  }
  return select_assets(keep);
}

ReturnsPanel ReturnsPanel::drop_incomplete_assets() const {
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < n_assets(); ++j) {
    if (!values_.col(static_cast<Eigen::Index>(j)).hasNaN()) keep.push_back(j);
  }
  return select_assets(keep);
}

ReturnsPanel ReturnsPanel::with_sectors(SectorMap sectors) const {
  ReturnsPanel copy = *this;
  copy.sectors_ = std::move(sectors);
  return copy;
}

ReturnsPanel read_panel(std::istream& in, const PanelLoadOptions& options) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw FormatError("empty panel file", 1);
  ++line_no;
  auto header = csv::split_line(line);
  if (header.empty() || header.front() != "date") {
    throw FormatError("header must start with 'date'", line_no);
  }
  std::vector<std::string> assets(header.begin() + 1, header.end());
  {
    std::set<std::string> seen;
    for (const auto& a : assets) {
      if (a.empty()) throw FormatError("empty asset name in header", line_no);
      if (!seen.insert(a).second) throw FormatError("duplicate asset '" + a + "'", line_no);
    }
  }

  std::vector<Date> dates;
  std::vector<std::vector<double>> rows;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    auto fields = csv::split_line(line);
    if (fields.size() != header.size()) {
      throw FormatError("expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()),
                        line_no);
    }
    auto date = parse_date(fields[0]);
    if (!date) throw FormatError("unparseable date '" + fields[0] + "'", line_no);
    if (!dates.empty() && !(dates.back() < *date)) {
      throw FormatError("dates must be strictly increasing", line_no);
    }
    if ((options.from && *date < *options.from) || (options.to && *options.to < *date)) continue;
    std::vector<double> row(assets.size(), nan);
    for (std::size_t j = 0; j < assets.size(); ++j) {
      const auto& cell = fields[j + 1];
      if (cell.empty()) continue;
      double v = 0.0;
      if (!parse_number(cell, v) || !std::isfinite(v)) {
        throw FormatError("unparseable value '" + cell + "' for asset '" + assets[j] + "'", line_no);
      }
      row[j] = v;
    }
    dates.push_back(*date);
    rows.push_back(std::move(row));
  }

  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(assets.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t j = 0; j < assets.size(); ++j) values(t, j) = rows[t][j];
  }
  ReturnsPanel panel(std::move(dates), std::move(assets), std::move(values), {}, true);
  if (options.drop_missing_assets) panel = panel.drop_incomplete_assets();
  if (panel.periods() == 0 || panel.n_assets() == 0) {
    throw DomainError("panel is empty after filtering");
  }
  return panel;
}

ReturnsPanel load_panel(const std::filesystem::path& path, const PanelLoadOptions& options) {
  auto in = open_input(path);
  return read_panel(in, options);
}

void write_panel(const ReturnsPanel& panel, std::ostream& out) {
  out << "date";
  for (const auto& a : panel.assets()) out << ',' << a;
  out << '\n';
  const auto& v = panel.values();
  for (std::size_t t = 0; t < panel.periods(); ++t) {
    out << format_date(panel.dates()[t]);
    for (Eigen::Index j = 0; j < v.cols(); ++j) out << ',' << csv::format_optional(v(t, j));
    out << '\n';
  }
}

void write_panel(const ReturnsPanel& panel, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string(), 0);
  write_panel(panel, out);
}

SectorMap read_sector_map(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw FormatError("empty sector file", 1);
  ++line_no;
  auto header = csv::split_line(line);
  if (header.size() != 2 || header[0] != "asset" || header[1] != "sector") {
    throw FormatError("sector header must be 'asset,sector'", line_no);
  }
  SectorMap sectors;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    auto fields = csv::split_line(line);
    if (fields.size() != 2 || fields[0].empty()) throw FormatError("expected 'asset,sector'", line_no);
    if (!sectors.emplace(fields[0], fields[1]).second) {
      throw FormatError("duplicate asset '" + fields[0] + "'", line_no);
    }
  }
  return sectors;
}

SectorMap load_sector_map(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_sector_map(in);
}

void write_sector_map(const SectorMap& sectors, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string(), 0);
  out << "asset,sector\n";
  for (const auto& [asset, sector] : sectors) out << asset << ',' << sector << '\n';
}

std::size_t window_count(std::size_t periods, const WindowPlan& plan) {
  if (plan.length < 2 || plan.step < 1) throw DomainError("window plan needs length >= 2 and step >= 1");
  if (plan.length > periods) {
    throw DomainError("window length " + std::to_string(plan.length) + " exceeds " +
                      std::to_string(periods) + " periods");
  }
  return (periods - plan.length) / plan.step + 1;
}

std::vector<PanelWindow> windows(const ReturnsPanel& panel, const WindowPlan& plan) {
  const std::size_t n = window_count(panel.periods(), plan);
  std::vector<PanelWindow> out;
  out.reserve(n);
  for (std::size_t w = 0; w < n; ++w) {
    const std::size_t start = w * plan.step;
    ReturnsPanel view = panel.rows(start, plan.length);
    if (view.has_missing()) {
      if (!plan.drop_incomplete) {
        throw DomainError("window starting at row " + std::to_string(start) + " has missing values");
      }
      view = view.drop_incomplete_assets();
    }
    out.push_back(PanelWindow{start, std::move(view)});
  }
  return out;
}

}  // namespace kof
