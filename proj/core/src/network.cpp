#include "kof/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "kof/csv.hpp"
#include "kof/errors.hpp"
#include "kof/parallel.hpp"
#include "kof/random.hpp"

namespace kof {

std::string_view to_string(NetworkKind kind) {
  return kind == NetworkKind::explanatory ? "explanatory" : "prediction";
}

NetworkKind parse_network_kind(std::string_view text) {
  if (text == "explanatory") return NetworkKind::explanatory;
  if (text == "prediction") return NetworkKind::prediction;
  throw DomainError("unknown network kind '" + std::string(text) + "'");
}

bool DirectedNetwork::has_sectors() const {
  return !sectors.empty() && std::all_of(sectors.begin(), sectors.end(), [](const auto& s) { return s.has_value(); });
}

void DirectedNetwork::add_edge(std::size_t source, std::size_t target) {
  if (source == target) throw DomainError("DirectedNetwork: self-loop on node " + std::to_string(source));
  if (source >= nodes.size() || target >= nodes.size()) throw DomainError("DirectedNetwork: edge outside node set");
  edges.emplace(source, target);
}

std::vector<std::size_t> DirectedNetwork::in_degrees() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  for (const auto& [s, t] : edges) ++d[t];
  return d;
}

std::vector<std::size_t> DirectedNetwork::out_degrees() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  for (const auto& [s, t] : edges) ++d[s];
  return d;
}

std::vector<std::size_t> DirectedNetwork::predecessors(std::size_t target) const {
  std::vector<std::size_t> out;
  for (const auto& [s, t] : edges) {
    if (t == target) out.push_back(s);
  }
  return out;
}

DirectedNetwork infer_network(const ReturnsPanel& window, const NetworkOptions& options, std::uint64_t seed,
                              unsigned workers) {
  const std::size_t n = window.n_assets();
  const std::size_t t = window.periods();
  const bool lagged = options.kind == NetworkKind::prediction;
  if (t < (lagged ? 3u : 2u)) throw DomainError("infer_network: window too short");
  if (n < 2) throw DomainError("infer_network: need at least 2 assets");
  if (window.has_missing()) throw DomainError("infer_network: window has missing values");

  DirectedNetwork net;
  net.nodes = window.assets();
  net.kind = options.kind;
  net.q = options.q;
  net.window_end = window.dates().back();
  if (window.has_sectors()) {
    for (std::size_t i = 0; i < n; ++i) net.sectors.push_back(window.sector_of(i));
  }

  const Eigen::MatrixXd& values = window.values();
  const auto rows = static_cast<Eigen::Index>(lagged ? t - 1 : t);
  std::vector<std::vector<std::size_t>> sources(n);
  parallel_for(n, workers, [&](std::size_t i) {
    const Eigen::VectorXd y = values.col(static_cast<Eigen::Index>(i)).tail(rows);
    Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(n - 1));
    std::vector<std::size_t> others;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto col = values.col(static_cast<Eigen::Index>(j));
      x.col(static_cast<Eigen::Index>(others.size())) = col.head(rows);
      others.push_back(j);
    }
    for (std::size_t k : select_stabilized(y, x, options.q, options.n_runs, options.selection, derive_seed(seed, {i}))) {
      sources[i].push_back(others[k]);
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : sources[i]) net.add_edge(j, i);
  }
  return net;
}

double density(const DirectedNetwork& net) {
  const double n = static_cast<double>(net.size());
  if (net.size() < 2) throw DomainError("density: need at least 2 nodes");
  return static_cast<double>(net.edges.size()) / (n * (n - 1.0));
}

double reciprocity(const DirectedNetwork& net) {
  if (net.edges.empty()) return kMissing;
  std::size_t mutual = 0;
  for (const auto& [s, t] : net.edges) mutual += net.edges.count({t, s});
  return static_cast<double>(mutual) / static_cast<double>(net.edges.size());
}

double adjusted_reciprocity(const DirectedNetwork& net) {
  if (net.edges.empty()) return kMissing;
  const double a = density(net);
  if (a >= 1.0) return kMissing;
  return (reciprocity(net) - a) / (1.0 - a);
}

double sector_assortativity(const DirectedNetwork& net) {
  if (net.edges.empty() || !net.has_sectors()) return kMissing;
  std::map<std::string, std::size_t> index;
  for (const auto& s : net.sectors) index.emplace(*s, index.size());
  const std::size_t k = index.size();
  std::vector<std::size_t> label(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) label[i] = index.at(*net.sectors[i]);

  Eigen::MatrixXd mixing = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (const auto& [s, t] : net.edges) mixing(label[s], label[t]) += 1.0;
  mixing /= static_cast<double>(net.edges.size());
  const Eigen::VectorXd out_share = mixing.rowwise().sum();
  const Eigen::VectorXd in_share = mixing.colwise().sum().transpose();
  const double expected = out_share.dot(in_share);
  const double denom = 1.0 - expected;
  if (!(denom > 1e-15)) return kMissing;
  return (mixing.trace() - expected) / denom;
}

double degree_pearson(const DirectedNetwork& net) {
  const auto in = net.in_degrees();
  const auto out = net.out_degrees();
  const double n = static_cast<double>(net.size());
  if (net.size() < 2) return kMissing;
  double mi = 0.0, mo = 0.0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    mi += static_cast<double>(in[i]);
    mo += static_cast<double>(out[i]);
  }
  mi /= n;
  mo /= n;
  double sii = 0.0, soo = 0.0, sio = 0.0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const double a = static_cast<double>(in[i]) - mi;
    const double b = static_cast<double>(out[i]) - mo;
    sii += a * a;
    soo += b * b;
    sio += a * b;
  }
  if (!(sii > 0.0) || !(soo > 0.0)) return kMissing;
  return sio / std::sqrt(sii * soo);
}

DirectedNetwork rewire(const DirectedNetwork& net, std::size_t attempts, std::uint64_t seed) {
  DirectedNetwork out = net;
  std::vector<Edge> edges(net.edges.begin(), net.edges.end());
  if (edges.size() < 2) return out;
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
  std::set<Edge>& present = out.edges;
  for (std::size_t k = 0; k < attempts; ++k) {
    const std::size_t e1 = pick(rng);
    const std::size_t e2 = pick(rng);
    if (e1 == e2) continue;
    const auto [a, b] = edges[e1];
    const auto [c, d] = edges[e2];
    if (a == c || b == d || a == d || c == b) continue;
    if (present.count({a, d}) || present.count({c, b})) continue;
    present.erase(edges[e1]);
    present.erase(edges[e2]);
    edges[e1] = {a, d};
    edges[e2] = {c, b};
    present.insert(edges[e1]);
    present.insert(edges[e2]);
  }
  return out;
}

namespace {

NullSummary summarize(const std::vector<double>& samples) {
  NullSummary out;
  std::vector<double> finite;
  for (double v : samples) {
    if (!std::isnan(v)) finite.push_back(v);
  }
  if (finite.empty()) return out;
  double sum = 0.0;
  for (double v : finite) sum += v;
  out.mean = sum / static_cast<double>(finite.size());
  if (finite.size() >= 2) {
    double ss = 0.0;
    for (double v : finite) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(finite.size() - 1));
  }
  return out;
}

}  // namespace

NetworkMetrics compute_metrics(const DirectedNetwork& net, std::size_t null_samples, std::uint64_t seed) {
  if (net.size() < 2) throw DomainError("metrics: need at least 2 nodes");
  NetworkMetrics m;
  m.window_end = net.window_end;
  m.n_nodes = net.size();
  m.n_edges = net.edges.size();
  m.density = density(net);
  m.reciprocity = reciprocity(net);
  m.reciprocity_adjusted = adjusted_reciprocity(net);
  m.assortativity = sector_assortativity(net);
  m.degree_pearson = degree_pearson(net);

  if (null_samples > 0 && !net.edges.empty()) {
    std::vector<double> rec(null_samples), assort(null_samples);
    const std::size_t attempts = kSwapsPerEdge * net.edges.size();
    for (std::size_t k = 0; k < null_samples; ++k) {
      const DirectedNetwork sample = rewire(net, attempts, derive_seed(seed, {k}));
      rec[k] = reciprocity(sample);
      assort[k] = sector_assortativity(sample);
    }
    m.reciprocity_null = summarize(rec);
    m.assortativity_null = summarize(assort);
  }
  return m;
}

NetworkSeries metrics_timeseries(const ReturnsPanel& panel, const WindowPlan& plan, const NetworkOptions& options,
                                 std::size_t null_samples, std::uint64_t seed, unsigned workers) {
  NetworkSeries series;
  const auto views = windows(panel, plan);
  for (std::size_t w = 0; w < views.size(); ++w) {
    DirectedNetwork net = infer_network(views[w].panel, options, derive_seed(seed, {w, 0}), workers);
    series.metrics.push_back(compute_metrics(net, null_samples, derive_seed(seed, {w, 1})));
    series.networks.push_back(std::move(net));
  }
  return series;
}

void write_edges_csv(const std::vector<DirectedNetwork>& networks, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path.string());
  out << "window_end,source,target\n";
  for (const auto& net : networks) {
    const std::string end = format_date(net.window_end);
    for (const auto& [s, t] : net.edges) out << end << ',' << net.nodes[s] << ',' << net.nodes[t] << '\n';
  }
}

void write_metrics_csv(const std::vector<NetworkMetrics>& metrics, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path.string());
  out << "window_end,n_nodes,n_edges,density,reciprocity,reciprocity_null_mean,reciprocity_null_sd,"
         "reciprocity_adjusted,assortativity,assortativity_null_mean,assortativity_null_sd,degree_pearson\n";
  using csv::format_optional;
  for (const auto& m : metrics) {
    out << format_date(m.window_end) << ',' << m.n_nodes << ',' << m.n_edges << ',' << format_optional(m.density)
        << ',' << format_optional(m.reciprocity) << ',' << format_optional(m.reciprocity_null.mean) << ','
        << format_optional(m.reciprocity_null.sd) << ',' << format_optional(m.reciprocity_adjusted) << ','
        << format_optional(m.assortativity) << ',' << format_optional(m.assortativity_null.mean) << ','
        << format_optional(m.assortativity_null.sd) << ',' << format_optional(m.degree_pearson) << '\n';
  }
}

}  // namespace kof
