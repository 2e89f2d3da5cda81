#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kof/panel.hpp"
#include "kof/random.hpp"
#include "kof/synthetic.hpp"

namespace kof::testing {

inline ReturnsPanel make_panel(const Eigen::MatrixXd& values, SectorMap sectors = {}) {
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < values.cols(); ++j) names.push_back("n" + std::to_string(j));
  return ReturnsPanel(synthetic_dates(static_cast<std::size_t>(values.rows())), names, values, std::move(sectors));
}

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  fill_standard_normal(rng, m);
  return m;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("kof_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace kof::testing
