#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "kof/panel.hpp"

namespace kof {

/// Gaussian equicorrelated design with a planted sparse linear response.
struct SyntheticSpec {
  std::size_t n_assets = 100;
  std::size_t n_periods = 252;
  std::size_t n_relevant = 10;
  double beta_magnitude = 1.0;
  double correlation = 0.0;
  double noise_sd = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticData {
  // Column 0 is the response "y"; columns 1..n_assets are the candidate factors.
  ReturnsPanel panel;
  // Indices into the candidate factors (panel column minus one), ascending.
  std::vector<std::size_t> true_support;
  Eigen::VectorXd beta;

  Eigen::VectorXd response() const { return panel.column(0); }
  Eigen::MatrixXd factors() const { return panel.values().rightCols(panel.values().cols() - 1); }
};

/// Business-day calendar starting 2000-01-03, used by every synthetic panel.
std::vector<Date> synthetic_dates(std::size_t n);

// The response and the factors in the support carry sector "target"; the
// rest carry "other".
SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// Leaders are i.i.d. Gaussian; follower f's next-period return loads on the
/// current returns of `predictor_counts[f]` distinct leaders. Follower noise
/// grows linearly with its predictor count.
struct LeadLagSpec {
  std::size_t n_leaders = 20;
  std::vector<std::size_t> predictor_counts{5, 6, 7, 8, 9, 10};
  std::size_t n_periods = 400;
  double leader_sd = 0.01;
  double coefficient = 0.5;
  double noise_base = 0.002;
  double noise_slope = 0.002;  // added per predictor beyond the first
  std::uint64_t seed = 0;
};

struct LeadLagData {
  // Leaders first ("L00"...), then followers ("F00"...).
  ReturnsPanel panel;
  // predictors[f] lists leader columns driving follower f.
  std::vector<std::vector<std::size_t>> predictors;
};

LeadLagData generate_lead_lag(const LeadLagSpec& spec);

}  // namespace kof
