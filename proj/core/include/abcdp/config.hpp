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

#ifndef ABCDP_CONFIG_HPP_
#define ABCDP_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "abcdp/simulators.hpp"

namespace abcdp {

// Config rejection carrying the dotted path of the offending field, so the
// CLI can point straight at it.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class RunMode { dp_run, paired_benchmark, flip_grid, bounds_report };

std::string to_string(RunMode mode);

struct BudgetConfig {
  double epsilon_total = 1.0;  // may be infinity
  std::size_t quota = 1;
  bool resample = false;

  friend bool operator==(const BudgetConfig&, const BudgetConfig&) = default;
};

struct ObservedConfig {
  enum class Source { synthetic, csv };
  Source source = Source::synthetic;
  // synthetic: ground-truth parameters and dataset size.
  std::vector<double> theta_star;
  std::size_t size = 1;
  // csv: resolved path of the observed-data table.
  std::filesystem::path path;

  friend bool operator==(const ObservedConfig&, const ObservedConfig&) = default;
};

struct DistanceConfig {
  enum class Kind { mmd, weighted_l2 };
  Kind kind = Kind::mmd;
  // mmd settings: a fixed bandwidth, or the median heuristic computed from
  // the first `median_pool` pseudo-datasets of the run.
  bool median_bandwidth = true;
  double bandwidth = 1.0;
  std::size_t median_pool = 32;
  double kernel_bound = 1.0;
  // weighted_l2 settings.
  std::string summary = "raw_values";
  std::vector<double> weights;
  double clip = 1.0;
  std::optional<double> declared_sensitivity;

  friend bool operator==(const DistanceConfig&, const DistanceConfig&) = default;
};

// Grid sweep settings for the paired-comparison mode.  Empty grids default
// to the corresponding top-level scalar.
struct BenchmarkConfig {
  std::vector<double> epsilon_abc_grid;
  std::vector<double> epsilon_total_grid;
  std::vector<bool> resample_grid;
  std::vector<std::size_t> observed_size_grid;
  // Reuse one proposal sequence (and one observed dataset) across all
  // replications, so replications differ only in acceptance noise.
  bool shared_proposals = false;
  // Break each noisy run at its acceptance quota (the production behavior).
  // Disabled to study the full indicator sequence both algorithms produce
  // over the same number of iterations.
  bool stop_after_quota = true;

  friend bool operator==(const BenchmarkConfig&, const BenchmarkConfig&) = default;
};

struct FlipGridConfig {
  std::size_t rho_draws = 100;
  std::vector<std::size_t> observed_sizes{10, 100, 1000};
  std::vector<std::size_t> quotas{10, 100, 1000};
  // Explicit budget axis; when empty, a log-spaced grid over
  // [log_lo, log_hi] with log_count points is used.
  std::vector<double> epsilon_totals;
  double log_lo = 0.1;
  double log_hi = 100.0;
  std::size_t log_count = 30;
  bool resample = true;
  double kernel_bound = 1.0;

  friend bool operator==(const FlipGridConfig&, const FlipGridConfig&) = default;
};

struct BoundsConfig {
  // Quantile levels used to choose bound-informed error thresholds.
  std::vector<double> tail_quantiles{0.25, 0.5, 0.75};

  friend bool operator==(const BoundsConfig&, const BoundsConfig&) = default;
};

struct ExperimentConfig {
  int version = 1;
  RunMode mode = RunMode::dp_run;
  std::uint64_t master_seed = 0;
  std::size_t proposal_count = 1;
  std::size_t replications = 1;
  double epsilon_abc = 0.1;
  BudgetConfig budget;
  SimulatorSpec simulator;
  ObservedConfig observed;
  DistanceConfig distance;
  BenchmarkConfig benchmark;
  FlipGridConfig flip_grid;
  BoundsConfig bounds;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Parses and validates a config file.  `overrides` are dotted-path
// assignments ("budget.quota=50"); values parse as JSON when possible and
// fall back to strings.  Relative CSV paths resolve against the config
// file's directory.  Throws ValidationError on any structural or semantic
// problem, including missing referenced files.
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::span<const std::string> overrides = {});

// Parses a config from JSON text (no file involved); `base_dir` anchors
// relative paths.
ExperimentConfig parse_config(const std::string& json_text,
                              const std::filesystem::path& base_dir);

// Serializes a config back to canonical JSON text.  Reloading the text
// yields an equal ExperimentConfig.
std::string config_to_json(const ExperimentConfig& config);

// Semantic validation (field ranges, cross-field consistency).  Called by
// load_config/parse_config; exposed for configs built in code.
void validate_config(const ExperimentConfig& config);

}  // namespace abcdp

#endif  // ABCDP_CONFIG_HPP_
