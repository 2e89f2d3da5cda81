#include "cli/config.hpp"

#include <concepts>
#include <fstream>
#include <set>

#include "kof/errors.hpp"

namespace kof::cli {

using nlohmann::json;

std::string_view to_string(DataSource s) {
  switch (s) {
    case DataSource::panel:
      return "panel";
    case DataSource::synthetic:
      return "synthetic";
    case DataSource::lead_lag:
      return "lead_lag";
  }
  return "synthetic";
}

DataSource parse_source(const std::string& s) {
  if (s == "panel") return DataSource::panel;
  if (s == "synthetic") return DataSource::synthetic;
  if (s == "lead_lag") return DataSource::lead_lag;
  throw ConfigError("unknown data source '" + s + "'");
}

namespace {

// Reads typed members of one JSON object and rejects unknown keys.
class Section {
 public:
  Section(const json& parent, const char* name) : name_(name) {
    if (!parent.contains(name)) return;
    obj_ = &parent.at(name);
    if (!obj_->is_object()) throw ConfigError(std::string("'") + name + "' must be an object");
  }
  explicit Section(const json& obj) : obj_(&obj), name_("<root>") {
    if (!obj.is_object()) throw ConfigError("config must be a JSON object");
  }

  template <class T>
  Section& get(const char* key, T& out) {
    seen_.insert(key);
    if (!obj_ || !obj_->contains(key)) return *this;
    const json& v = obj_->at(key);
    try {
      read(v, out);
    } catch (const ConfigError& e) {
      throw ConfigError(name_ + "." + key + ": " + e.what());
    }
    return *this;
  }

  Section& allow(const char* key) {
    seen_.insert(key);
    return *this;
  }

  void done() const {
    if (!obj_) return;
    for (const auto& [key, value] : obj_->items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key '" + name_ + "." + key + "'");
    }
  }

 private:
  static void read(const json& v, double& out) {
    if (!v.is_number()) throw ConfigError("expected a number");
    out = v.get<double>();
  }
  template <std::unsigned_integral U>
  static void read(const json& v, U& out) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
      throw ConfigError("expected a non-negative integer");
    }
    out = v.get<U>();
  }
  static void read(const json& v, bool& out) {
    if (!v.is_boolean()) throw ConfigError("expected a boolean");
    out = v.get<bool>();
  }
  static void read(const json& v, std::string& out) {
    if (!v.is_string()) throw ConfigError("expected a string");
    out = v.get<std::string>();
  }
  static void read(const json& v, std::vector<double>& out) {
    if (!v.is_array()) throw ConfigError("expected an array of numbers");
    out.clear();
    for (const auto& e : v) {
      double d = 0.0;
      read(e, d);
      out.push_back(d);
    }
  }
  static void read(const json& v, std::vector<std::size_t>& out) {
    if (!v.is_array()) throw ConfigError("expected an array of integers");
    out.clear();
    for (const auto& e : v) {
      std::size_t d = 0;
      read(e, d);
      out.push_back(d);
    }
  }
  static void read(const json& v, std::vector<std::string>& out) {
    if (!v.is_array()) throw ConfigError("expected an array of strings");
    out.clear();
    for (const auto& e : v) {
      std::string s;
      read(e, s);
      out.push_back(s);
    }
  }

  const json* obj_ = nullptr;
  std::string name_;
  std::set<std::string> seen_;
};

template <class Enum, class Parse>
void read_enum(Section& section, const char* key, Enum& out, Parse parse) {
  std::string text;
  section.get(key, text);
  if (text.empty()) return;
  try {
    out = parse(text);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

SelectionOptions SelectionConfig::options() const {
  SelectionOptions o;
  o.method = method;
  o.lasso_grid = lasso_grid;
  o.forest = forest;
  return o;
}

RunConfig parse_config(const json& input) {
  const json& doc = (input.is_object() && input.contains("config") && input.contains("command")) ? input.at("config") : input;
  RunConfig c;
  Section root(doc);
  root.get("seed", c.seed).get("workers", c.workers).get("out", c.out);

  Section syn(doc, "synthetic");
  syn.get("n_assets", c.synthetic.n_assets)
      .get("n_periods", c.synthetic.n_periods)
      .get("n_relevant", c.synthetic.n_relevant)
      .get("beta_magnitude", c.synthetic.beta_magnitude)
      .get("correlation", c.synthetic.correlation)
      .get("noise_sd", c.synthetic.noise_sd)
      .done();

  Section ll(doc, "lead_lag");
  ll.get("n_leaders", c.lead_lag.n_leaders)
      .get("predictor_counts", c.lead_lag.predictor_counts)
      .get("n_periods", c.lead_lag.n_periods)
      .get("leader_sd", c.lead_lag.leader_sd)
      .get("coefficient", c.lead_lag.coefficient)
      .get("noise_base", c.lead_lag.noise_base)
      .get("noise_slope", c.lead_lag.noise_slope)
      .done();

  Section in(doc, "input");
  std::string source;
  in.get("source", source).get("panel", c.input.panel).get("sectors", c.input.sectors).get("from", c.input.from).get("to", c.input.to).done();
  if (!source.empty()) {
    c.input.source = parse_source(source);
  } else if (!c.input.panel.empty()) {
    c.input.source = DataSource::panel;
  }

  Section win(doc, "window");
  win.get("length", c.window.length).get("step", c.window.step).get("drop_incomplete", c.window.drop_incomplete).done();

  Section sel(doc, "selection");
  read_enum(sel, "method", c.selection.method, parse_method);
  sel.get("q", c.selection.q)
      .get("n_runs", c.selection.n_runs)
      .get("n_bootstraps", c.selection.n_bootstraps)
      .get("subset_size", c.selection.subset_size)
      .get("lasso_grid", c.selection.lasso_grid)
      .allow("forest");
  sel.done();
  if (doc.contains("selection")) {
    Section forest(doc.at("selection"), "forest");
    forest.get("n_trees", c.selection.forest.n_trees)
        .get("max_depth", c.selection.forest.max_depth)
        .get("min_leaf", c.selection.forest.min_leaf)
        .get("mtry", c.selection.forest.mtry)
        .done();
  }

  Section cal(doc, "calibrate");
  cal.get("q_grid", c.calibrate.q_grid).get("trials", c.calibrate.trials).done();

  Section rep(doc, "replicate");
  rep.get("target", c.replicate.target).get("target_sector", c.replicate.target_sector).done();

  Section net(doc, "network");
  read_enum(net, "kind", c.network.kind, parse_network_kind);
  net.get("null_samples", c.network.null_samples).done();

  Section bt(doc, "backtest");
  auto& b = c.backtest.config;
  bt.get("T_in", b.T_in)
      .get("horizon", b.horizon)
      .get("target_return", b.target_return)
      .get("net_leverage", b.net_leverage)
      .get("refit_every", b.refit_every)
      .get("strategies", c.backtest.strategies)
      .get("covariance_filter", c.backtest.covariance_filter)
      .done();

  Section synth(doc, "synth");
  std::string kind;
  synth.get("kind", kind).done();
  if (!kind.empty()) c.synth.kind = parse_source(kind);

  root.allow("synthetic").allow("lead_lag").allow("input").allow("window").allow("selection").allow("calibrate");
  root.allow("replicate").allow("network").allow("backtest").allow("synth").done();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["out"] = c.out;
  j["synthetic"] = {{"n_assets", c.synthetic.n_assets},       {"n_periods", c.synthetic.n_periods},
                    {"n_relevant", c.synthetic.n_relevant},   {"beta_magnitude", c.synthetic.beta_magnitude},
                    {"correlation", c.synthetic.correlation}, {"noise_sd", c.synthetic.noise_sd}};
  j["lead_lag"] = {{"n_leaders", c.lead_lag.n_leaders},     {"predictor_counts", c.lead_lag.predictor_counts},
                   {"n_periods", c.lead_lag.n_periods},     {"leader_sd", c.lead_lag.leader_sd},
                   {"coefficient", c.lead_lag.coefficient}, {"noise_base", c.lead_lag.noise_base},
                   {"noise_slope", c.lead_lag.noise_slope}};
  j["input"] = {{"panel", c.input.panel},
                {"sectors", c.input.sectors},
                {"from", c.input.from},
                {"to", c.input.to}};
  if (c.input.source) j["input"]["source"] = to_string(*c.input.source);
  j["window"] = {{"length", c.window.length}, {"step", c.window.step}, {"drop_incomplete", c.window.drop_incomplete}};
  j["selection"] = {{"method", kof::to_string(c.selection.method)},
                    {"q", c.selection.q},
                    {"n_runs", c.selection.n_runs},
                    {"n_bootstraps", c.selection.n_bootstraps},
                    {"subset_size", c.selection.subset_size},
                    {"lasso_grid", c.selection.lasso_grid},
                    {"forest",
                     {{"n_trees", c.selection.forest.n_trees},
                      {"max_depth", c.selection.forest.max_depth},
                      {"min_leaf", c.selection.forest.min_leaf},
                      {"mtry", c.selection.forest.mtry}}}};
  j["calibrate"] = {{"q_grid", c.calibrate.q_grid}, {"trials", c.calibrate.trials}};
  j["replicate"] = {{"target", c.replicate.target}, {"target_sector", c.replicate.target_sector}};
  j["network"] = {{"kind", kof::to_string(c.network.kind)}, {"null_samples", c.network.null_samples}};
  const auto& b = c.backtest.config;
  j["backtest"] = {{"T_in", b.T_in},
                   {"horizon", b.horizon},
                   {"target_return", b.target_return},
                   {"net_leverage", b.net_leverage},
                   {"refit_every", b.refit_every},
                   {"strategies", c.backtest.strategies},
                   {"covariance_filter", c.backtest.covariance_filter}};
  j["synth"] = {{"kind", to_string(c.synth.kind)}};
  return j;
}

void validate(const RunConfig& c) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (c.input.source == DataSource::panel || !c.input.panel.empty()) {
    if (c.input.panel.empty()) fail("input.panel is required when input.source is 'panel'");
    if (!std::filesystem::exists(c.input.panel)) fail("input.panel not found: " + c.input.panel);
  }
  if (!c.input.sectors.empty() && !std::filesystem::exists(c.input.sectors)) {
    fail("input.sectors not found: " + c.input.sectors);
  }
  for (const auto* d : {&c.input.from, &c.input.to}) {
    if (!d->empty() && !parse_date(*d)) fail("invalid date '" + *d + "'");
  }
  if (!(c.selection.q > 0.0 && c.selection.q < 1.0)) fail("selection.q must lie in (0, 1)");
  if (c.selection.n_runs < 1) fail("selection.n_runs must be >= 1");
  if (c.selection.lasso_grid < 10) fail("selection.lasso_grid must be >= 10");
  if (c.window.length < 2 || c.window.step < 1) fail("window needs length >= 2 and step >= 1");
  if (c.calibrate.trials < 50) fail("calibrate.trials must be >= 50");
  for (double q : c.calibrate.q_grid) {
    if (!(q > 0.0 && q < 1.0)) fail("calibrate.q_grid entries must lie in (0, 1)");
  }
  if (c.backtest.covariance_filter != "shrinkage" && c.backtest.covariance_filter != "sample") {
    fail("backtest.covariance_filter must be 'shrinkage' or 'sample'");
  }
  for (const auto& s : c.backtest.strategies) {
    if (s != kLongShort && s != kLongOnly && s != kMeanVarianceKnockoff && s != kMeanVarianceHistorical) {
      fail("unknown backtest strategy '" + s + "'");
    }
  }
  if (c.synth.kind == DataSource::panel) fail("synth.kind must be 'synthetic' or 'lead_lag'");
  try {
    c.synthetic.validate();
    BacktestConfig b = c.backtest.config;
    b.q = c.selection.q;
    b.n_runs = c.selection.n_runs;
    b.validate();
  } catch (const DomainError& e) {
    fail(e.what());
  }
}

}  // namespace kof::cli
