// Copyright 2026 The abcdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "abcdp/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace abcdp {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw ValidationError(field, message);
}

const json& require(const json& obj, const std::string& key,
                    const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    fail(path.empty() ? key : path + "." + key, "missing required field");
  }
  return obj.at(key);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

// Budget values accept "inf" for the non-private mode.
double as_epsilon(const json& v, const std::string& path) {
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return kInf;
    fail(path, "expected a positive number or \"inf\"");
  }
  return as_number(v, path);
}

std::size_t as_count(const json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    fail(path, "expected a nonnegative integer");
  }
  return v.get<std::size_t>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected a boolean");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

std::vector<double> as_number_list(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<double> as_epsilon_list(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers or \"inf\"");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_epsilon(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<std::size_t> as_count_list(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of integers");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_count(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Expression as_expression(const json& v, const std::string& path) {
  try {
    if (v.is_number()) return Expression::constant(v.get<double>());
    if (v.is_string()) return Expression::parse(v.get<std::string>());
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
  fail(path, "expected a number or an expression string");
}

PriorSpec parse_prior(const json& arr, const std::string& path) {
  if (!arr.is_array() || arr.empty()) {
    fail(path, "expected a non-empty array of prior components");
  }
  PriorSpec prior;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    std::string cpath = path + "[" + std::to_string(i) + "]";
    const json& c = arr[i];
    if (!c.is_object()) fail(cpath, "expected an object");
    PriorComponent comp;
    comp.name = as_string(require(c, "name", cpath), join(cpath, "name"));
    std::string type = as_string(require(c, "type", cpath), join(cpath, "type"));
    if (type == "dirichlet") {
      DirichletComponent d;
      d.alpha = as_number_list(require(c, "alpha", cpath), join(cpath, "alpha"));
      comp.dist = std::move(d);
    } else if (type == "normal") {
      NormalComponent n;
      n.mean = as_number(require(c, "mean", cpath), join(cpath, "mean"));
      n.stddev = as_number(require(c, "stddev", cpath), join(cpath, "stddev"));
      comp.dist = n;
    } else if (type == "uniform") {
      UniformComponent u;
      u.lo = as_expression(require(c, "lo", cpath), join(cpath, "lo"));
      u.hi = as_expression(require(c, "hi", cpath), join(cpath, "hi"));
      comp.dist = std::move(u);
    } else if (type == "derived") {
      DerivedComponent d;
      d.value = as_expression(require(c, "value", cpath), join(cpath, "value"));
      comp.dist = std::move(d);
    } else {
      fail(join(cpath, "type"),
           "unknown prior type '" + type +
               "' (expected dirichlet, normal, uniform, or derived)");
    }
    prior.components.push_back(std::move(comp));
  }
  return prior;
}

SimulatorSpec parse_simulator(const json& obj, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  SimulatorSpec spec;
  std::string name = as_string(require(obj, "name", path), join(path, "name"));
  if (name == "uniform_mixture") {
    spec.kind = SimulatorKind::uniform_mixture;
  } else if (name == "polynomial_outbreak") {
    spec.kind = SimulatorKind::polynomial_outbreak;
  } else if (name == "birth_death") {
    spec.kind = SimulatorKind::birth_death;
  } else {
    fail(join(path, "name"), "unknown simulator '" + name + "'");
  }
  spec.prior = parse_prior(require(obj, "prior", path), join(path, "prior"));
  spec.n_pseudo =
      as_count(require(obj, "n_pseudo", path), join(path, "n_pseudo"));
  if (obj.contains("t_grid")) {
    spec.t_grid = as_number_list(obj.at("t_grid"), join(path, "t_grid"));
  } else if (spec.kind == SimulatorKind::polynomial_outbreak) {
    for (std::size_t i = 0; i < spec.n_pseudo; ++i) {
      spec.t_grid.push_back(static_cast<double>(i));
    }
  }
  if (obj.contains("event_cap")) {
    spec.birth_death.event_cap =
        as_count(obj.at("event_cap"), join(path, "event_cap"));
  }
  return spec;
}

ObservedConfig parse_observed(const json& obj, const std::string& path,
                              const std::filesystem::path& base_dir) {
  if (!obj.is_object()) fail(path, "expected an object");
  ObservedConfig oc;
  std::string source =
      as_string(require(obj, "source", path), join(path, "source"));
  if (source == "synthetic") {
    oc.source = ObservedConfig::Source::synthetic;
    oc.theta_star = as_number_list(require(obj, "theta_star", path),
                                   join(path, "theta_star"));
    oc.size = as_count(require(obj, "size", path), join(path, "size"));
  } else if (source == "csv") {
    oc.source = ObservedConfig::Source::csv;
    std::filesystem::path p =
        as_string(require(obj, "path", path), join(path, "path"));
    if (p.is_relative()) p = base_dir / p;
    oc.path = p.lexically_normal();
  } else {
    fail(join(path, "source"), "expected \"synthetic\" or \"csv\"");
  }
  return oc;
}

DistanceConfig parse_distance(const json& obj, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  DistanceConfig dc;
  std::string kind = as_string(require(obj, "kind", path), join(path, "kind"));
  if (kind == "mmd") {
    dc.kind = DistanceConfig::Kind::mmd;
    const json& bw = require(obj, "bandwidth", path);
    if (bw.is_string()) {
      if (bw.get<std::string>() != "median") {
        fail(join(path, "bandwidth"), "expected a number or \"median\"");
      }
      dc.median_bandwidth = true;
    } else {
      dc.median_bandwidth = false;
      dc.bandwidth = as_number(bw, join(path, "bandwidth"));
    }
    if (obj.contains("median_pool")) {
      dc.median_pool = as_count(obj.at("median_pool"), join(path, "median_pool"));
    }
    if (obj.contains("kernel_bound")) {
      dc.kernel_bound =
          as_number(obj.at("kernel_bound"), join(path, "kernel_bound"));
    }
  } else if (kind == "weighted_l2") {
    dc.kind = DistanceConfig::Kind::weighted_l2;
    dc.summary = as_string(require(obj, "summary", path), join(path, "summary"));
    dc.clip = as_number(require(obj, "clip", path), join(path, "clip"));
    if (obj.contains("weights")) {
      dc.weights = as_number_list(obj.at("weights"), join(path, "weights"));
    }
    if (obj.contains("declared_sensitivity")) {
      dc.declared_sensitivity = as_number(obj.at("declared_sensitivity"),
                                          join(path, "declared_sensitivity"));
    }
  } else {
    fail(join(path, "kind"), "expected \"mmd\" or \"weighted_l2\"");
  }
  return dc;
}

BenchmarkConfig parse_benchmark(const json& obj, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  BenchmarkConfig bc;
  if (obj.contains("epsilon_abc_grid")) {
    bc.epsilon_abc_grid =
        as_number_list(obj.at("epsilon_abc_grid"), join(path, "epsilon_abc_grid"));
  }
  if (obj.contains("epsilon_total_grid")) {
    bc.epsilon_total_grid = as_epsilon_list(obj.at("epsilon_total_grid"),
                                            join(path, "epsilon_total_grid"));
  }
  if (obj.contains("resample_grid")) {
    const json& g = obj.at("resample_grid");
    if (!g.is_array()) fail(join(path, "resample_grid"), "expected an array");
    for (std::size_t i = 0; i < g.size(); ++i) {
      bc.resample_grid.push_back(as_bool(
          g[i], join(path, "resample_grid") + "[" + std::to_string(i) + "]"));
    }
  }
  if (obj.contains("observed_size_grid")) {
    bc.observed_size_grid = as_count_list(obj.at("observed_size_grid"),
                                          join(path, "observed_size_grid"));
  }
  if (obj.contains("shared_proposals")) {
    bc.shared_proposals =
        as_bool(obj.at("shared_proposals"), join(path, "shared_proposals"));
  }
  if (obj.contains("stop_after_quota")) {
    bc.stop_after_quota =
        as_bool(obj.at("stop_after_quota"), join(path, "stop_after_quota"));
  }
  return bc;
}

FlipGridConfig parse_flip_grid(const json& obj, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  FlipGridConfig fc;
  if (obj.contains("rho_draws")) {
    fc.rho_draws = as_count(obj.at("rho_draws"), join(path, "rho_draws"));
  }
  if (obj.contains("observed_sizes")) {
    fc.observed_sizes =
        as_count_list(obj.at("observed_sizes"), join(path, "observed_sizes"));
  }
  if (obj.contains("quotas")) {
    fc.quotas = as_count_list(obj.at("quotas"), join(path, "quotas"));
  }
  if (obj.contains("epsilon_totals")) {
    fc.epsilon_totals =
        as_epsilon_list(obj.at("epsilon_totals"), join(path, "epsilon_totals"));
  }
  if (obj.contains("epsilon_total_log_range")) {
    const json& r = obj.at("epsilon_total_log_range");
    std::string rpath = join(path, "epsilon_total_log_range");
    fc.log_lo = as_number(require(r, "lo", rpath), join(rpath, "lo"));
    fc.log_hi = as_number(require(r, "hi", rpath), join(rpath, "hi"));
    fc.log_count = as_count(require(r, "count", rpath), join(rpath, "count"));
  }
  if (obj.contains("resample")) {
    fc.resample = as_bool(obj.at("resample"), join(path, "resample"));
  }
  if (obj.contains("kernel_bound")) {
    fc.kernel_bound =
        as_number(obj.at("kernel_bound"), join(path, "kernel_bound"));
  }
  return fc;
}

BoundsConfig parse_bounds(const json& obj, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  BoundsConfig bc;
  if (obj.contains("tail_quantiles")) {
    bc.tail_quantiles =
        as_number_list(obj.at("tail_quantiles"), join(path, "tail_quantiles"));
  }
  return bc;
}

json prior_to_json(const PriorSpec& prior) {
  json arr = json::array();
  for (const auto& comp : prior.components) {
    json c;
    c["name"] = comp.name;
    if (const auto* d = std::get_if<DirichletComponent>(&comp.dist)) {
      c["type"] = "dirichlet";
      c["alpha"] = d->alpha;
    } else if (const auto* n = std::get_if<NormalComponent>(&comp.dist)) {
      c["type"] = "normal";
      c["mean"] = n->mean;
      c["stddev"] = n->stddev;
    } else if (const auto* u = std::get_if<UniformComponent>(&comp.dist)) {
      c["type"] = "uniform";
      c["lo"] = u->lo.text();
      c["hi"] = u->hi.text();
    } else if (const auto* dv = std::get_if<DerivedComponent>(&comp.dist)) {
      c["type"] = "derived";
      c["value"] = dv->value.text();
    }
    arr.push_back(std::move(c));
  }
  return arr;
}

json epsilon_to_json(double eps) {
  if (eps == kInf) return json("inf");
  return json(eps);
}

}  // namespace

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::dp_run:
      return "dp_run";
    case RunMode::paired_benchmark:
      return "paired_benchmark";
    case RunMode::flip_grid:
      return "flip_grid";
    case RunMode::bounds_report:
      return "bounds_report";
  }
  throw std::logic_error("unknown run mode");
}

ExperimentConfig parse_config(const std::string& json_text,
                              const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail("", std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) fail("", "config root must be a JSON object");

  ExperimentConfig cfg;
  cfg.version = static_cast<int>(as_count(require(root, "version", ""), "version"));
  std::string mode = as_string(require(root, "mode", ""), "mode");
  if (mode == "dp_run") {
    cfg.mode = RunMode::dp_run;
  } else if (mode == "paired_benchmark") {
    cfg.mode = RunMode::paired_benchmark;
  } else if (mode == "flip_grid") {
    cfg.mode = RunMode::flip_grid;
  } else if (mode == "bounds_report") {
    cfg.mode = RunMode::bounds_report;
  } else {
    fail("mode", "unknown mode '" + mode + "'");
  }
  cfg.master_seed = require(root, "master_seed", "").is_number_unsigned()
                        ? root.at("master_seed").get<std::uint64_t>()
                        : (fail("master_seed", "expected an unsigned integer"), 0);
  cfg.proposal_count =
      as_count(require(root, "proposal_count", ""), "proposal_count");
  if (root.contains("replications")) {
    cfg.replications = as_count(root.at("replications"), "replications");
  }
  cfg.epsilon_abc = as_number(require(root, "epsilon_abc", ""), "epsilon_abc");

  const json& budget = require(root, "budget", "");
  cfg.budget.epsilon_total = as_epsilon(
      require(budget, "epsilon_total", "budget"), "budget.epsilon_total");
  cfg.budget.quota = as_count(require(budget, "quota", "budget"), "budget.quota");
  cfg.budget.resample =
      as_bool(require(budget, "resample", "budget"), "budget.resample");

  cfg.simulator = parse_simulator(require(root, "simulator", ""), "simulator");
  cfg.observed = parse_observed(require(root, "observed", ""), "observed", base_dir);
  cfg.distance = parse_distance(require(root, "distance", ""), "distance");
  if (root.contains("benchmark")) {
    cfg.benchmark = parse_benchmark(root.at("benchmark"), "benchmark");
  }
  if (root.contains("flip_grid")) {
    cfg.flip_grid = parse_flip_grid(root.at("flip_grid"), "flip_grid");
  }
  if (root.contains("bounds")) {
    cfg.bounds = parse_bounds(root.at("bounds"), "bounds");
  }

  validate_config(cfg);
  return cfg;
}

namespace {

// Sets `path` (dotted keys) in `root` to `value` parsed as JSON when
// possible, else as a plain string.
void apply_override(json& root, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    fail("", "override '" + assignment + "' is not of the form key=value");
  }
  std::string key = assignment.substr(0, eq);
  std::string value = assignment.substr(eq + 1);
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = json(value);
  }
  json* node = &root;
  std::size_t start = 0;
  for (;;) {
    auto dot = key.find('.', start);
    std::string part = key.substr(start, dot - start);
    if (part.empty()) {
      fail("", "override '" + assignment + "' has an empty path segment");
    }
    if (dot == std::string::npos) {
      (*node)[part] = std::move(parsed);
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path,
                             std::span<const std::string> overrides) {
  std::ifstream in(path);
  if (!in) {
    fail("", "cannot open config file " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  if (overrides.empty()) {
    return parse_config(buffer.str(), path.parent_path());
  }
  json root;
  try {
    root = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    fail("", std::string("config is not valid JSON: ") + e.what());
  }
  for (const auto& o : overrides) {
    apply_override(root, o);
  }
  return parse_config(root.dump(), path.parent_path());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json root;
  root["version"] = cfg.version;
  root["mode"] = to_string(cfg.mode);
  root["master_seed"] = cfg.master_seed;
  root["proposal_count"] = cfg.proposal_count;
  root["replications"] = cfg.replications;
  root["epsilon_abc"] = cfg.epsilon_abc;

  json budget;
  budget["epsilon_total"] = epsilon_to_json(cfg.budget.epsilon_total);
  budget["quota"] = cfg.budget.quota;
  budget["resample"] = cfg.budget.resample;
  root["budget"] = std::move(budget);

  json sim;
  sim["name"] = to_string(cfg.simulator.kind);
  sim["prior"] = prior_to_json(cfg.simulator.prior);
  sim["n_pseudo"] = cfg.simulator.n_pseudo;
  if (!cfg.simulator.t_grid.empty()) sim["t_grid"] = cfg.simulator.t_grid;
  if (cfg.simulator.kind == SimulatorKind::birth_death) {
    sim["event_cap"] = cfg.simulator.birth_death.event_cap;
  }
  root["simulator"] = std::move(sim);

  json observed;
  if (cfg.observed.source == ObservedConfig::Source::synthetic) {
    observed["source"] = "synthetic";
    observed["theta_star"] = cfg.observed.theta_star;
    observed["size"] = cfg.observed.size;
  } else {
    observed["source"] = "csv";
    observed["path"] = cfg.observed.path.string();
  }
  root["observed"] = std::move(observed);

  json distance;
  if (cfg.distance.kind == DistanceConfig::Kind::mmd) {
    distance["kind"] = "mmd";
    if (cfg.distance.median_bandwidth) {
      distance["bandwidth"] = "median";
    } else {
      distance["bandwidth"] = cfg.distance.bandwidth;
    }
    distance["median_pool"] = cfg.distance.median_pool;
    distance["kernel_bound"] = cfg.distance.kernel_bound;
  } else {
    distance["kind"] = "weighted_l2";
    distance["summary"] = cfg.distance.summary;
    distance["clip"] = cfg.distance.clip;
    if (!cfg.distance.weights.empty()) {
      distance["weights"] = cfg.distance.weights;
    }
    if (cfg.distance.declared_sensitivity) {
      distance["declared_sensitivity"] = *cfg.distance.declared_sensitivity;
    }
  }
  root["distance"] = std::move(distance);

  {
    json bench;
    if (!cfg.benchmark.epsilon_abc_grid.empty()) {
      bench["epsilon_abc_grid"] = cfg.benchmark.epsilon_abc_grid;
    }
    if (!cfg.benchmark.epsilon_total_grid.empty()) {
      json arr = json::array();
      for (double e : cfg.benchmark.epsilon_total_grid) {
        arr.push_back(epsilon_to_json(e));
      }
      bench["epsilon_total_grid"] = std::move(arr);
    }
    if (!cfg.benchmark.resample_grid.empty()) {
      json arr = json::array();
      for (bool r : cfg.benchmark.resample_grid) arr.push_back(r);
      bench["resample_grid"] = std::move(arr);
    }
    if (!cfg.benchmark.observed_size_grid.empty()) {
      bench["observed_size_grid"] = cfg.benchmark.observed_size_grid;
    }
    bench["shared_proposals"] = cfg.benchmark.shared_proposals;
    bench["stop_after_quota"] = cfg.benchmark.stop_after_quota;
    root["benchmark"] = std::move(bench);
  }
  {
    json fg;
    fg["rho_draws"] = cfg.flip_grid.rho_draws;
    fg["observed_sizes"] = cfg.flip_grid.observed_sizes;
    fg["quotas"] = cfg.flip_grid.quotas;
    if (!cfg.flip_grid.epsilon_totals.empty()) {
      json arr = json::array();
      for (double e : cfg.flip_grid.epsilon_totals) {
        arr.push_back(epsilon_to_json(e));
      }
      fg["epsilon_totals"] = std::move(arr);
    } else {
      json r;
      r["lo"] = cfg.flip_grid.log_lo;
      r["hi"] = cfg.flip_grid.log_hi;
      r["count"] = cfg.flip_grid.log_count;
      fg["epsilon_total_log_range"] = std::move(r);
    }
    fg["resample"] = cfg.flip_grid.resample;
    fg["kernel_bound"] = cfg.flip_grid.kernel_bound;
    root["flip_grid"] = std::move(fg);
  }
  {
    json b;
    b["tail_quantiles"] = cfg.bounds.tail_quantiles;
    root["bounds"] = std::move(b);
  }
  return root.dump(2) + "\n";
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.version != 1) {
    fail("version", "unsupported config version " + std::to_string(cfg.version));
  }
  if (cfg.proposal_count == 0) fail("proposal_count", "must be >= 1");
  if (cfg.replications == 0) fail("replications", "must be >= 1");
  if (!(cfg.epsilon_abc > 0.0) || !std::isfinite(cfg.epsilon_abc)) {
    fail("epsilon_abc", "must be finite and > 0");
  }
  if (std::isnan(cfg.budget.epsilon_total) || cfg.budget.epsilon_total <= 0.0) {
    fail("budget.epsilon_total", "must be > 0 (or \"inf\")");
  }
  if (cfg.budget.quota == 0) fail("budget.quota", "must be >= 1");

  try {
    validate_simulator(cfg.simulator);
  } catch (const std::invalid_argument& e) {
    fail("simulator", e.what());
  }

  if (cfg.observed.source == ObservedConfig::Source::synthetic) {
    if (cfg.observed.size == 0) fail("observed.size", "must be >= 1");
    if (cfg.observed.theta_star.size() != cfg.simulator.prior.dimension()) {
      fail("observed.theta_star",
           "width " + std::to_string(cfg.observed.theta_star.size()) +
               " does not match the prior dimension " +
               std::to_string(cfg.simulator.prior.dimension()));
    }
    if (cfg.simulator.kind == SimulatorKind::uniform_mixture) {
      double total = 0.0;
      for (double w : cfg.observed.theta_star) {
        if (w < -1e-9) fail("observed.theta_star", "negative mixture weight");
        total += w;
      }
      if (std::fabs(total - 1.0) > 1e-9) {
        fail("observed.theta_star", "mixture weights must sum to 1");
      }
    }
  } else {
    if (!std::filesystem::exists(cfg.observed.path)) {
      fail("observed.path",
           "referenced file does not exist: " + cfg.observed.path.string());
    }
  }

  if (cfg.distance.kind == DistanceConfig::Kind::mmd) {
    if (!cfg.distance.median_bandwidth && !(cfg.distance.bandwidth > 0.0)) {
      fail("distance.bandwidth", "must be > 0");
    }
    if (cfg.distance.median_bandwidth && cfg.distance.median_pool == 0) {
      fail("distance.median_pool", "must be >= 1");
    }
    if (!(cfg.distance.kernel_bound > 0.0)) {
      fail("distance.kernel_bound", "must be > 0");
    }
  } else {
    if (!(cfg.distance.clip > 0.0) || !std::isfinite(cfg.distance.clip)) {
      fail("distance.clip", "must be finite and > 0");
    }
    std::size_t summary_len = 0;
    if (cfg.distance.summary == "raw_values") {
      summary_len = cfg.simulator.n_pseudo;
    } else if (cfg.distance.summary == "cluster_stats") {
      summary_len = 4;
    } else {
      fail("distance.summary",
           "unknown summary '" + cfg.distance.summary +
               "' (expected raw_values or cluster_stats)");
    }
    if (!cfg.distance.weights.empty() &&
        cfg.distance.weights.size() != summary_len) {
      fail("distance.weights",
           "length " + std::to_string(cfg.distance.weights.size()) +
               " does not match the summary length " +
               std::to_string(summary_len));
    }
    for (double w : cfg.distance.weights) {
      if (!(w >= 0.0)) fail("distance.weights", "weights must be >= 0");
    }
    if (cfg.distance.declared_sensitivity &&
        !(*cfg.distance.declared_sensitivity > 0.0)) {
      fail("distance.declared_sensitivity", "must be > 0");
    }
    if (cfg.distance.summary == "raw_values" &&
        cfg.observed.source == ObservedConfig::Source::synthetic &&
        cfg.simulator.n_pseudo != cfg.observed.size &&
        cfg.benchmark.observed_size_grid.empty()) {
      fail("distance.summary",
           "raw_values requires pseudo and observed datasets of equal size");
    }
  }

  for (double e : cfg.benchmark.epsilon_abc_grid) {
    if (!(e > 0.0)) fail("benchmark.epsilon_abc_grid", "entries must be > 0");
  }
  for (double e : cfg.benchmark.epsilon_total_grid) {
    if (std::isnan(e) || e <= 0.0) {
      fail("benchmark.epsilon_total_grid", "entries must be > 0 or \"inf\"");
    }
  }
  for (std::size_t n : cfg.benchmark.observed_size_grid) {
    if (n == 0) fail("benchmark.observed_size_grid", "entries must be >= 1");
  }

  if (cfg.mode == RunMode::flip_grid) {
    const FlipGridConfig& fg = cfg.flip_grid;
    if (fg.rho_draws == 0) fail("flip_grid.rho_draws", "must be >= 1");
    if (fg.observed_sizes.empty()) {
      fail("flip_grid.observed_sizes", "must be non-empty");
    }
    for (std::size_t n : fg.observed_sizes) {
      if (n == 0) fail("flip_grid.observed_sizes", "entries must be >= 1");
    }
    if (fg.quotas.empty()) fail("flip_grid.quotas", "must be non-empty");
    for (std::size_t c : fg.quotas) {
      if (c == 0) fail("flip_grid.quotas", "entries must be >= 1");
    }
    if (fg.epsilon_totals.empty()) {
      if (!(fg.log_lo > 0.0) || !(fg.log_hi > fg.log_lo) || fg.log_count < 2) {
        fail("flip_grid.epsilon_total_log_range",
             "need 0 < lo < hi and count >= 2");
      }
    } else {
      for (double e : fg.epsilon_totals) {
        if (std::isnan(e) || e <= 0.0) {
          fail("flip_grid.epsilon_totals", "entries must be > 0 or \"inf\"");
        }
      }
    }
    if (!(fg.kernel_bound > 0.0)) {
      fail("flip_grid.kernel_bound", "must be > 0");
    }
  }

  if (cfg.mode == RunMode::bounds_report) {
    if (cfg.bounds.tail_quantiles.empty()) {
      fail("bounds.tail_quantiles", "must be non-empty");
    }
    for (double q : cfg.bounds.tail_quantiles) {
      if (!(q > 0.0) || !(q < 1.0)) {
        fail("bounds.tail_quantiles", "entries must lie in (0, 1)");
      }
    }
  }

  if ((cfg.mode == RunMode::paired_benchmark ||
       cfg.mode == RunMode::bounds_report) &&
      cfg.observed.source != ObservedConfig::Source::synthetic) {
    fail("observed.source",
         "paired comparisons need synthetic ground truth (the realized "
         "distances of real data must stay private)");
  }
}

}  // namespace abcdp
