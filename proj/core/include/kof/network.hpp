#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kof/panel.hpp"
#include "kof/selection.hpp"

namespace kof {

enum class NetworkKind { explanatory, prediction };

std::string_view to_string(NetworkKind kind);
NetworkKind parse_network_kind(std::string_view text);

using Edge = std::pair<std::size_t, std::size_t>;  // (source j, target i): j explains i

struct DirectedNetwork {
  std::vector<std::string> nodes;
  std::vector<std::optional<std::string>> sectors;  // parallel to nodes; empty when unlabeled
  std::set<Edge> edges;
  Date window_end{};
  NetworkKind kind = NetworkKind::explanatory;
  double q = 0.0;

  std::size_t size() const { return nodes.size(); }
  bool has_sectors() const;
  void add_edge(std::size_t source, std::size_t target);
  std::vector<std::size_t> in_degrees() const;
  std::vector<std::size_t> out_degrees() const;
  // Sources of edges into `target`, ascending (the predictor set P_i).
  std::vector<std::size_t> predecessors(std::size_t target) const;
};

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct NullSummary {
  double mean = kMissing;
  double sd = kMissing;
};

/// Any field may be NaN ("missing") when undefined for the graph at hand.
struct NetworkMetrics {
  Date window_end{};
  std::size_t n_nodes = 0;
  std::size_t n_edges = 0;
  double density = 0.0;
  double reciprocity = kMissing;
  NullSummary reciprocity_null;
  double reciprocity_adjusted = kMissing;
  double assortativity = kMissing;
  NullSummary assortativity_null;
  double degree_pearson = kMissing;
};

struct NetworkOptions {
  NetworkKind kind = NetworkKind::explanatory;
  double q = 0.2;
  std::size_t n_runs = 1;
  SelectionOptions selection{};
};

/// Node i's regression: y = r_i (contemporaneous for explanatory; one period
/// ahead for prediction, with the other assets lagged by one period), X = all
/// other assets. Node i uses seed derive_seed(seed, {i}).
DirectedNetwork infer_network(const ReturnsPanel& window, const NetworkOptions& options, std::uint64_t seed,
                              unsigned workers = 1);

double density(const DirectedNetwork& net);
double reciprocity(const DirectedNetwork& net);
/// (r - a) / (1 - a) with a = density; missing for empty or saturated graphs.
double adjusted_reciprocity(const DirectedNetwork& net);
/// Categorical assortativity of sector labels on directed edges.
double sector_assortativity(const DirectedNetwork& net);
double degree_pearson(const DirectedNetwork& net);

/// Degree-preserving randomization by directed double-edge swaps
/// (a->b, c->d) => (a->d, c->b), rejecting self-loops and multi-edges.
DirectedNetwork rewire(const DirectedNetwork& net, std::size_t attempts, std::uint64_t seed);

inline constexpr std::size_t kSwapsPerEdge = 10;

/// Null sample k rewires the original with seed derive_seed(seed, {k}).
NetworkMetrics compute_metrics(const DirectedNetwork& net, std::size_t null_samples, std::uint64_t seed);

struct NetworkSeries {
  std::vector<DirectedNetwork> networks;
  std::vector<NetworkMetrics> metrics;
};

/// Window w infers with derive_seed(seed, {w, 0}) and draws nulls with
/// derive_seed(seed, {w, 1}).
NetworkSeries metrics_timeseries(const ReturnsPanel& panel, const WindowPlan& plan, const NetworkOptions& options,
                                 std::size_t null_samples, std::uint64_t seed, unsigned workers = 1);

/// `window_end,source,target`
void write_edges_csv(const std::vector<DirectedNetwork>& networks, const std::filesystem::path& path);
void write_metrics_csv(const std::vector<NetworkMetrics>& metrics, const std::filesystem::path& path);

}  // namespace kof
