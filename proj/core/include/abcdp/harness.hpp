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

#ifndef ABCDP_HARNESS_HPP_
#define ABCDP_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "abcdp/analytics.hpp"
#include "abcdp/config.hpp"
#include "abcdp/dataset.hpp"
#include "abcdp/distance.hpp"
#include "abcdp/engine.hpp"
#include "abcdp/simulators.hpp"

namespace abcdp {

// Seed for replication r (1-based): a documented hash of the master seed,
// the stream name "replication", and r.  Streams inside the replication
// ("proposal", "noise", "median") derive from this value, so replications
// are independent and order-free.
std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t r);

// Observed dataset plus the generating parameters when they are known.
// `nominal_size` is the configured number of observation units; for
// whole-outbreak simulators the table itself can have fewer rows (one per
// cluster), so row count and unit count are tracked separately.
struct ObservedData {
  Dataset data;
  std::size_t nominal_size = 0;
  std::vector<double> theta_star;  // empty when the data is real
  bool synthetic = false;
};

// Synthetic mode draws the dataset from the ground-truth parameters under
// the stream (master_seed, "observed", observed_size); CSV mode loads the
// file named by the config.  The size index keeps observed datasets of
// different sizes independent within one sweep.
ObservedData prepare_observed(const ExperimentConfig& config,
                              std::size_t observed_size);

// Pseudo-dataset size used when simulating proposals against an observed
// dataset of the given size.  Whole-outbreak summaries (cluster_stats) are
// only comparable between outbreaks of the same case count, so they track
// the observed size; sample-based distances keep the configured size.
std::size_t pseudo_size_for(const ExperimentConfig& config,
                            std::size_t observed_size);

// Proposal parameters and their realized distances for one replication.
// Pseudo data is released once distances are computed.
struct ReplicationInputs {
  std::vector<std::vector<double>> thetas;
  std::vector<double> distances;
  double bandwidth = 0.0;   // resolved kernel bandwidth (MMD only)
  double delta_rho = 0.0;   // per-record sensitivity at this observed size
  double sup_norm = 0.0;    // max ||theta||_2 over the proposal set
};

// Builds the distance for one proposal set, running the median heuristic
// over the first `median_pool` pseudo datasets when the config asks for it.
// The subsample stream is (seed, "median").
DistanceSpec resolve_distance(const DistanceConfig& config,
                              std::span<const ProposalRecord> proposals,
                              std::uint64_t seed);

// Distances of every proposal against one observed dataset, computed in
// index chunks across `threads` workers (0 picks the hardware count).  The
// result is independent of the thread count.
std::vector<double> compute_distances(const DistanceSpec& spec,
                                      const Dataset& observed,
                                      std::span<const ProposalRecord> proposals,
                                      unsigned threads = 0);

// Simulates `count` proposals under (seed, "proposal", t), resolves the
// distance, and evaluates all distances against the observed data.
ReplicationInputs prepare_replication(const ExperimentConfig& config,
                                      const ObservedData& observed,
                                      std::size_t count, std::uint64_t seed,
                                      unsigned threads = 0);

// One grid cell of a paired comparison.
struct PairedCellSpec {
  double epsilon_abc = 0.0;
  double epsilon_total = 0.0;
  bool resample = false;
  std::size_t observed_size = 0;
  std::size_t cell_index = 0;  // noise-stream index, unique per cell
};

// One paired replication: the plain and noisy threshold passes over the
// same distances, their posterior means, and the analytic bounds.
struct ReplicationOutcome {
  std::size_t replication = 0;  // 1-based
  std::size_t c = 0;            // noisy acceptances
  std::size_t c_prime = 0;      // plain acceptances
  bool excluded = false;        // either side accepted nothing
  std::vector<double> noisy_mean;
  std::vector<double> plain_mean;
  double realized_error = 0.0;
  double expected_bound = 0.0;
  double sup_norm = 0.0;
  double tail_exp_sum = 0.0;
  double mean_flip_prob = 0.0;
  double delta_rho = 0.0;
  // Ground-truth metrics (synthetic mode; NaN otherwise).  `mse` and
  // `abs_error` score the noisy posterior mean, `plain_mse` the plain one.
  double mse = 0.0;
  double abs_error = 0.0;
  double plain_mse = 0.0;
};

// Runs the noisy and plain passes for one cell over prepared inputs.
ReplicationOutcome run_paired_replication(
    const ReplicationInputs& inputs, const ObservedData& observed,
    const PairedCellSpec& cell, std::size_t quota, bool stop_after_quota,
    std::size_t replication, std::uint64_t rep_seed);

// Aggregate over the replications of one cell.  Means and standard errors
// are taken over included (non-excluded) replications.
struct PairedCellSummary {
  PairedCellSpec cell;
  std::size_t replications = 0;
  std::size_t excluded = 0;
  double c_mean = 0.0;
  double c_prime_mean = 0.0;
  double mse_mean = 0.0;
  double mse_stderr = 0.0;
  double plain_mse_mean = 0.0;
  double abs_error_mean = 0.0;
  double realized_error_mean = 0.0;
  double realized_error_stderr = 0.0;
  double expected_bound_mean = 0.0;
  double mean_flip_prob = 0.0;
  double delta_rho = 0.0;
  std::vector<ReplicationOutcome> outcomes;
};

PairedCellSummary summarize_cell(const PairedCellSpec& cell,
                                 std::vector<ReplicationOutcome> outcomes);

// Full paired sweep over the benchmark grids (empty grids fall back to the
// top-level scalars).  Cells are ordered observed-size-major, then
// epsilon_abc, then epsilon_total, then resample.
std::vector<PairedCellSummary> run_paired_benchmark(
    const ExperimentConfig& config, unsigned threads = 0);

// Everything a finished run hands back to the command line.
struct RunArtifacts {
  std::vector<std::string> ledger_lines;
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> files;
};

// Executes the configured mode and writes its artifact files under
// `out_dir` (created when missing).  Identical config and master seed give
// byte-identical files.
RunArtifacts run_experiment(const ExperimentConfig& config,
                            const std::filesystem::path& out_dir,
                            unsigned threads = 0);

// Reshapes the artifacts of a finished run in `results_dir` into one of the
// documented plot tables; `kind` must match the run's mode (fig1 needs a
// flip-grid run, fig2 a paired benchmark, posterior_hist a dp_run).
RunArtifacts emit_plot_data(const std::filesystem::path& results_dir,
                            const std::string& kind,
                            const std::filesystem::path& out_dir);

}  // namespace abcdp

#endif  // ABCDP_HARNESS_HPP_
