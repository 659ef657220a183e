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

#include "abcdp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace abcdp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json num_or_inf(double x) {
  if (x == kInf) return json("inf");
  return json(x);
}

std::vector<double> mean_over(const std::vector<std::vector<double>>& thetas,
                              std::span<const std::size_t> indices) {
  if (indices.empty() || thetas.empty()) return {};
  std::vector<double> mean(thetas.front().size(), 0.0);
  for (std::size_t idx : indices) {
    const std::vector<double>& theta = thetas[idx - 1];
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += theta[j];
  }
  for (double& m : mean) m /= static_cast<double>(indices.size());
  return mean;
}

double l2_gap(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    double d = a[j] - b[j];
    s += d * d;
  }
  return std::sqrt(s);
}

double squared_gap(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

double mean_abs_gap(std::span<const double> a, std::span<const double> b) {
  if (a.empty()) return kNaN;
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += std::fabs(a[j] - b[j]);
  return s / static_cast<double>(a.size());
}

struct MeanStderr {
  double mean = kNaN;
  double stderr_ = kNaN;
  std::size_t count = 0;
};

MeanStderr mean_stderr(std::span<const double> values) {
  MeanStderr out;
  out.count = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) {
    out.stderr_ = 0.0;
    return out;
  }
  double ss = 0.0;
  for (double v : values) {
    double d = v - out.mean;
    ss += d * d;
  }
  double var = ss / static_cast<double>(values.size() - 1);
  out.stderr_ = std::sqrt(var / static_cast<double>(values.size()));
  return out;
}

std::string ledger_line(const AccountantLedger& ledger) {
  std::ostringstream os;
  os << "budget ledger: epsilon_total=" << format_double(ledger.epsilon_total)
     << " quota=" << ledger.quota
     << " resample=" << (ledger.resample ? "true" : "false")
     << " delta_rho=" << format_double(ledger.delta_rho)
     << " noise_scale=" << format_double(ledger.noise_scale)
     << " epsilon_rederived=" << format_double(ledger.epsilon_rederived)
     << " composition=" << ledger.composition;
  return os.str();
}

json ledger_json(const AccountantLedger& ledger) {
  json j;
  j["epsilon_total"] = num_or_inf(ledger.epsilon_total);
  j["quota"] = ledger.quota;
  j["resample"] = ledger.resample;
  j["delta_rho"] = ledger.delta_rho;
  j["noise_scale"] = ledger.noise_scale;
  j["epsilon_rederived"] = num_or_inf(ledger.epsilon_rederived);
  j["composition"] = ledger.composition;
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << text;
  if (!out) {
    throw std::runtime_error("failed writing " + path.string());
  }
}

// Headered CSV writer for rows that are already formatted cell by cell.
void write_csv_rows(const fs::path& path, std::span<const std::string> columns,
                    const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (j > 0) os << ',';
    os << columns[j];
  }
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) os << ',';
      os << row[j];
    }
    os << '\n';
  }
  write_text(path, os.str());
}

std::string fmt_bool(bool b) { return b ? "1" : "0"; }

}  // namespace

std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t r) {
  Rng rng = Rng::for_stream(master_seed, "replication", r);
  return rng.next_u64();
}

ObservedData prepare_observed(const ExperimentConfig& config,
                              std::size_t observed_size) {
  ObservedData out;
  if (config.observed.source == ObservedConfig::Source::synthetic) {
    GroundTruth truth =
        make_ground_truth(config.simulator, config.observed.theta_star,
                          observed_size, config.master_seed);
    out.data = std::move(truth.observed);
    out.nominal_size = observed_size;
    out.theta_star = std::move(truth.theta_star);
    out.synthetic = true;
  } else {
    out.data = load_csv(config.observed.path);
    out.nominal_size = out.data.size();
    out.synthetic = false;
  }
  return out;
}

std::size_t pseudo_size_for(const ExperimentConfig& config,
                            std::size_t observed_size) {
  if (config.distance.kind == DistanceConfig::Kind::weighted_l2 &&
      config.distance.summary == "cluster_stats") {
    return observed_size;
  }
  return config.simulator.n_pseudo;
}

DistanceSpec resolve_distance(const DistanceConfig& config,
                              std::span<const ProposalRecord> proposals,
                              std::uint64_t seed) {
  if (config.kind == DistanceConfig::Kind::mmd) {
    double bandwidth = config.bandwidth;
    if (config.median_bandwidth) {
      std::size_t pool_size = std::min(config.median_pool, proposals.size());
      std::vector<Dataset> pool;
      pool.reserve(pool_size);
      for (std::size_t i = 0; i < pool_size; ++i) {
        pool.push_back(proposals[i].pseudo_data);
      }
      Rng rng = Rng::for_stream(seed, "median");
      bandwidth = median_heuristic_bandwidth(pool, rng).value;
    }
    KernelSpec kernel = KernelSpec::gaussian(bandwidth);
    kernel.bound = config.kernel_bound;
    return DistanceSpec::make_mmd(kernel);
  }
  SummaryFn summary;
  if (config.summary == "cluster_stats") {
    summary = cluster_stats_summary();
  } else {
    if (proposals.empty()) {
      throw std::invalid_argument(
          "raw_values distance needs at least one proposal to fix its length");
    }
    summary = raw_values_summary(proposals.front().pseudo_data.flat().size());
  }
  return DistanceSpec::make_weighted_l2(std::move(summary), config.weights,
                                        config.clip,
                                        config.declared_sensitivity);
}

std::vector<double> compute_distances(const DistanceSpec& spec,
                                      const Dataset& observed,
                                      std::span<const ProposalRecord> proposals,
                                      unsigned threads) {
  DistanceEvaluator evaluator(spec, observed);
  std::vector<double> out(proposals.size());
  if (proposals.empty()) return out;
  unsigned workers = threads != 0 ? threads : std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  workers = static_cast<unsigned>(
      std::min<std::size_t>(workers, proposals.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < proposals.size(); ++i) {
      out[i] = evaluator(proposals[i].pseudo_data);
    }
    return out;
  }
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (;;) {
          std::size_t i = cursor.fetch_add(1);
          if (i >= proposals.size()) break;
          out[i] = evaluator(proposals[i].pseudo_data);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        cursor.store(proposals.size());
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

ReplicationInputs prepare_replication(const ExperimentConfig& config,
                                      const ObservedData& observed,
                                      std::size_t count, std::uint64_t seed,
                                      unsigned threads) {
  SimulatorSpec spec = config.simulator;
  spec.n_pseudo = pseudo_size_for(config, observed.nominal_size);
  std::vector<ProposalRecord> proposals = build_proposals(spec, count, seed);
  DistanceSpec distance = resolve_distance(config.distance, proposals, seed);

  ReplicationInputs out;
  out.bandwidth = distance.is_mmd() ? distance.kernel().bandwidth : 0.0;
  out.delta_rho = distance.sensitivity(observed.data.size());
  out.distances = compute_distances(distance, observed.data, proposals, threads);
  out.thetas.reserve(proposals.size());
  for (auto& record : proposals) {
    out.thetas.push_back(std::move(record.theta));
  }
  out.sup_norm = identity_functional(out.thetas).sup_norm;
  return out;
}

namespace {

PosteriorFunctional identity_with_sup(double sup_norm) {
  PosteriorFunctional f;
  f.name = "identity";
  f.map = [](std::span<const double> theta) {
    return std::vector<double>(theta.begin(), theta.end());
  };
  f.sup_norm = sup_norm;
  return f;
}

}  // namespace

ReplicationOutcome run_paired_replication(
    const ReplicationInputs& inputs, const ObservedData& observed,
    const PairedCellSpec& cell, std::size_t quota, bool stop_after_quota,
    std::size_t replication, std::uint64_t rep_seed) {
  ReplicationOutcome out;
  out.replication = replication;
  out.delta_rho = inputs.delta_rho;
  out.sup_norm = inputs.sup_norm;

  std::optional<std::size_t> c_stop;
  if (stop_after_quota) c_stop = quota;
  IndicatorTrace plain =
      rejection_trace(inputs.distances, cell.epsilon_abc, c_stop);

  PrivacyBudget budget(cell.epsilon_total, quota, cell.resample,
                       inputs.delta_rho);
  Rng noise_rng = Rng::for_stream(rep_seed, "noise", cell.cell_index);
  TraceOptions trace_options;
  trace_options.stop_after_quota = stop_after_quota;
  IndicatorTrace noisy = noisy_threshold_trace(
      inputs.distances, cell.epsilon_abc, budget, noise_rng, trace_options);

  out.c = noisy.accepted_count();
  out.c_prime = plain.accepted_count();
  out.excluded = out.c == 0 || out.c_prime == 0;
  out.noisy_mean = mean_over(inputs.thetas, noisy.accepted_indices);
  out.plain_mean = mean_over(inputs.thetas, plain.accepted_indices);

  FlipProfile profile = FlipProfile::make(inputs.distances, cell.epsilon_abc,
                                          budget.noise_scale());
  double flip_sum = 0.0;
  for (double p : profile.flip_probs) flip_sum += p;
  out.mean_flip_prob = profile.flip_probs.empty()
                           ? 0.0
                           : flip_sum / static_cast<double>(
                                            profile.flip_probs.size());

  if (!out.excluded) {
    out.realized_error = l2_gap(out.noisy_mean, out.plain_mean);
    ErrorBoundReport report =
        make_error_bound_report(profile, identity_with_sup(inputs.sup_norm),
                                out.c, out.c_prime, out.realized_error);
    out.expected_bound = report.expected_bound;
    out.tail_exp_sum = report.tail_exp_sum;
  }

  if (observed.synthetic) {
    out.mse = out.c > 0 ? squared_gap(out.noisy_mean, observed.theta_star)
                        : kNaN;
    out.abs_error = out.c > 0
                        ? mean_abs_gap(out.noisy_mean, observed.theta_star)
                        : kNaN;
    out.plain_mse = out.c_prime > 0
                        ? squared_gap(out.plain_mean, observed.theta_star)
                        : kNaN;
  } else {
    out.mse = kNaN;
    out.abs_error = kNaN;
    out.plain_mse = kNaN;
  }
  return out;
}

PairedCellSummary summarize_cell(const PairedCellSpec& cell,
                                 std::vector<ReplicationOutcome> outcomes) {
  PairedCellSummary summary;
  summary.cell = cell;
  summary.replications = outcomes.size();

  std::vector<double> mses, plain_mses, abs_errors, realized, bounds, flips;
  double c_sum = 0.0;
  double c_prime_sum = 0.0;
  for (const ReplicationOutcome& o : outcomes) {
    if (o.excluded) {
      ++summary.excluded;
      continue;
    }
    summary.delta_rho = o.delta_rho;
    c_sum += static_cast<double>(o.c);
    c_prime_sum += static_cast<double>(o.c_prime);
    if (!std::isnan(o.mse)) mses.push_back(o.mse);
    if (!std::isnan(o.plain_mse)) plain_mses.push_back(o.plain_mse);
    if (!std::isnan(o.abs_error)) abs_errors.push_back(o.abs_error);
    realized.push_back(o.realized_error);
    bounds.push_back(o.expected_bound);
    flips.push_back(o.mean_flip_prob);
  }
  std::size_t included = summary.replications - summary.excluded;
  if (included > 0) {
    summary.c_mean = c_sum / static_cast<double>(included);
    summary.c_prime_mean = c_prime_sum / static_cast<double>(included);
  }
  MeanStderr mse = mean_stderr(mses);
  summary.mse_mean = mse.mean;
  summary.mse_stderr = mse.stderr_;
  summary.plain_mse_mean = mean_stderr(plain_mses).mean;
  summary.abs_error_mean = mean_stderr(abs_errors).mean;
  MeanStderr realized_stats = mean_stderr(realized);
  summary.realized_error_mean = realized_stats.mean;
  summary.realized_error_stderr = realized_stats.stderr_;
  summary.expected_bound_mean = mean_stderr(bounds).mean;
  summary.mean_flip_prob = mean_stderr(flips).mean;
  summary.outcomes = std::move(outcomes);
  return summary;
}

namespace {

std::vector<double> effective_epsilon_abc_grid(const ExperimentConfig& cfg) {
  if (!cfg.benchmark.epsilon_abc_grid.empty()) {
    return cfg.benchmark.epsilon_abc_grid;
  }
  return {cfg.epsilon_abc};
}

std::vector<double> effective_epsilon_total_grid(const ExperimentConfig& cfg) {
  if (!cfg.benchmark.epsilon_total_grid.empty()) {
    return cfg.benchmark.epsilon_total_grid;
  }
  return {cfg.budget.epsilon_total};
}

std::vector<bool> effective_resample_grid(const ExperimentConfig& cfg) {
  if (!cfg.benchmark.resample_grid.empty()) return cfg.benchmark.resample_grid;
  return {cfg.budget.resample};
}

std::vector<std::size_t> effective_size_grid(const ExperimentConfig& cfg) {
  if (!cfg.benchmark.observed_size_grid.empty()) {
    return cfg.benchmark.observed_size_grid;
  }
  return {cfg.observed.size};
}

}  // namespace

std::vector<PairedCellSummary> run_paired_benchmark(
    const ExperimentConfig& config, unsigned threads) {
  const std::vector<double> abc_grid = effective_epsilon_abc_grid(config);
  const std::vector<double> total_grid = effective_epsilon_total_grid(config);
  const std::vector<bool> resample_grid = effective_resample_grid(config);
  const std::vector<std::size_t> size_grid = effective_size_grid(config);
  const std::size_t reps = config.replications;
  const bool shared = config.benchmark.shared_proposals;

  std::vector<PairedCellSummary> cells;
  std::size_t cell_index = 0;
  for (std::size_t observed_size : size_grid) {
    ObservedData observed = prepare_observed(config, observed_size);
    std::vector<ReplicationInputs> inputs;
    if (shared) {
      inputs.push_back(prepare_replication(config, observed,
                                           config.proposal_count,
                                           replication_seed(config.master_seed, 1),
                                           threads));
    } else {
      inputs.reserve(reps);
      for (std::size_t r = 1; r <= reps; ++r) {
        inputs.push_back(prepare_replication(
            config, observed, config.proposal_count,
            replication_seed(config.master_seed, r), threads));
      }
    }
    for (double epsilon_abc : abc_grid) {
      for (double epsilon_total : total_grid) {
        for (bool resample : resample_grid) {
          PairedCellSpec cell;
          cell.epsilon_abc = epsilon_abc;
          cell.epsilon_total = epsilon_total;
          cell.resample = resample;
          cell.observed_size = observed.nominal_size;
          cell.cell_index = cell_index++;
          std::vector<ReplicationOutcome> outcomes;
          outcomes.reserve(reps);
          for (std::size_t r = 1; r <= reps; ++r) {
            const ReplicationInputs& in = shared ? inputs.front()
                                                 : inputs[r - 1];
            outcomes.push_back(run_paired_replication(
                in, observed, cell, config.budget.quota,
                config.benchmark.stop_after_quota, r,
                replication_seed(config.master_seed, r)));
          }
          cells.push_back(summarize_cell(cell, std::move(outcomes)));
        }
      }
    }
  }
  return cells;
}

namespace {

// One dp_run replication retained for reporting.
struct DpReplication {
  std::size_t replication = 0;
  std::size_t accepted = 0;
  std::size_t evaluated = 0;
  bool terminated_early = false;
  std::vector<std::vector<double>> accepted_thetas;
  std::vector<std::size_t> accepted_indices;
  std::vector<double> posterior_mean;  // empty when nothing accepted
  double mse = kNaN;
  double abs_error = kNaN;
};

RunArtifacts run_dp(const ExperimentConfig& config, const fs::path& out_dir,
                    unsigned threads) {
  RunArtifacts artifacts;
  ObservedData observed = prepare_observed(config, config.observed.size);
  const std::vector<std::string> names =
      config.simulator.prior.parameter_names();

  std::vector<DpReplication> reps;
  AccountantLedger ledger;
  for (std::size_t r = 1; r <= config.replications; ++r) {
    std::uint64_t seed = replication_seed(config.master_seed, r);
    ReplicationInputs inputs = prepare_replication(
        config, observed, config.proposal_count, seed, threads);
    PrivacyBudget budget(config.budget.epsilon_total, config.budget.quota,
                         config.budget.resample, inputs.delta_rho);
    if (r == 1) ledger = accountant_report(budget, inputs.delta_rho);
    Rng noise_rng = Rng::for_stream(seed, "noise", 0);
    IndicatorTrace trace = noisy_threshold_trace(
        inputs.distances, config.epsilon_abc, budget, noise_rng, {});

    DpReplication rep;
    rep.replication = r;
    rep.accepted = trace.accepted_count();
    rep.evaluated = trace.indicators.size();
    rep.terminated_early = trace.terminated_early;
    rep.accepted_indices = trace.accepted_indices;
    for (std::size_t idx : trace.accepted_indices) {
      rep.accepted_thetas.push_back(inputs.thetas[idx - 1]);
    }
    rep.posterior_mean = mean_over(inputs.thetas, trace.accepted_indices);
    if (observed.synthetic && rep.accepted > 0) {
      rep.mse = squared_gap(rep.posterior_mean, observed.theta_star);
      rep.abs_error = mean_abs_gap(rep.posterior_mean, observed.theta_star);
    }
    if (rep.accepted < config.budget.quota) {
      std::ostringstream os;
      os << "replication " << r << " accepted " << rep.accepted << " of quota "
         << config.budget.quota
         << "; the full budget is charged regardless";
      artifacts.warnings.push_back(os.str());
    }
    reps.push_back(std::move(rep));
  }
  artifacts.ledger_lines.push_back(ledger_line(ledger));

  // accepted_theta.csv: one row per accepted parameter vector.
  {
    std::vector<std::string> columns{"replication", "accept_index"};
    for (const std::string& n : names) columns.push_back(n);
    std::vector<std::vector<std::string>> rows;
    for (const DpReplication& rep : reps) {
      for (std::size_t i = 0; i < rep.accepted_thetas.size(); ++i) {
        std::vector<std::string> row;
        row.push_back(std::to_string(rep.replication));
        row.push_back(std::to_string(rep.accepted_indices[i]));
        for (double v : rep.accepted_thetas[i]) row.push_back(format_double(v));
        rows.push_back(std::move(row));
      }
    }
    fs::path path = out_dir / "accepted_theta.csv";
    write_csv_rows(path, columns, rows);
    artifacts.files.push_back(path);
  }

  // metrics.csv: one row per replication.
  {
    std::vector<std::string> columns{"replication",     "accepted",
                                     "evaluated",       "acceptance_rate",
                                     "mse",             "mean_abs_error"};
    std::vector<std::vector<std::string>> rows;
    for (const DpReplication& rep : reps) {
      double rate = rep.evaluated > 0 ? static_cast<double>(rep.accepted) /
                                            static_cast<double>(rep.evaluated)
                                      : 0.0;
      rows.push_back({std::to_string(rep.replication),
                      std::to_string(rep.accepted),
                      std::to_string(rep.evaluated), format_double(rate),
                      format_double(rep.mse), format_double(rep.abs_error)});
    }
    fs::path path = out_dir / "metrics.csv";
    write_csv_rows(path, columns, rows);
    artifacts.files.push_back(path);
  }

  // results.json: aggregate view; never distances, never noise draws.
  {
    json root;
    root["mode"] = to_string(config.mode);
    root["parameter_names"] = names;
    root["observed_size"] = observed.nominal_size;
    root["replications"] = config.replications;
    root["proposal_count"] = config.proposal_count;
    root["epsilon_abc"] = config.epsilon_abc;
    root["ledger"] = ledger_json(ledger);
    json rep_list = json::array();
    double rate_sum = 0.0;
    std::vector<double> mses, abs_errors;
    for (const DpReplication& rep : reps) {
      json j;
      j["replication"] = rep.replication;
      j["accepted"] = rep.accepted;
      j["evaluated"] = rep.evaluated;
      j["terminated_early"] = rep.terminated_early;
      if (!rep.posterior_mean.empty()) {
        j["posterior_mean"] = rep.posterior_mean;
      } else {
        j["posterior_mean"] = nullptr;
      }
      rep_list.push_back(std::move(j));
      rate_sum += rep.evaluated > 0 ? static_cast<double>(rep.accepted) /
                                          static_cast<double>(rep.evaluated)
                                    : 0.0;
      if (!std::isnan(rep.mse)) mses.push_back(rep.mse);
      if (!std::isnan(rep.abs_error)) abs_errors.push_back(rep.abs_error);
    }
    root["replication_results"] = std::move(rep_list);
    json metrics;
    metrics["acceptance_rate"] =
        rate_sum / static_cast<double>(config.replications);
    if (!mses.empty()) {
      metrics["mse"] = mean_stderr(mses).mean;
      metrics["mean_abs_error"] = mean_stderr(abs_errors).mean;
      metrics["scored_replications"] = mses.size();
    }
    root["metrics"] = std::move(metrics);
    fs::path path = out_dir / "results.json";
    write_text(path, root.dump(2) + "\n");
    artifacts.files.push_back(path);
  }
  return artifacts;
}

RunArtifacts run_benchmark(const ExperimentConfig& config,
                           const fs::path& out_dir, unsigned threads) {
  RunArtifacts artifacts;
  std::vector<PairedCellSummary> cells = run_paired_benchmark(config, threads);

  // benchmark.csv: one row per cell.
  {
    std::vector<std::string> columns{
        "epsilon_abc",       "epsilon_total",
        "resample",          "observed_size",
        "replications",      "excluded",
        "c_mean",            "c_prime_mean",
        "mse_mean",          "mse_stderr",
        "plain_mse_mean",    "mean_abs_error_mean",
        "realized_error_mean", "realized_error_stderr",
        "expected_bound_mean", "mean_flip_prob"};
    std::vector<std::vector<std::string>> rows;
    for (const PairedCellSummary& cell : cells) {
      rows.push_back({format_double(cell.cell.epsilon_abc),
                      format_double(cell.cell.epsilon_total),
                      fmt_bool(cell.cell.resample),
                      std::to_string(cell.cell.observed_size),
                      std::to_string(cell.replications),
                      std::to_string(cell.excluded),
                      format_double(cell.c_mean),
                      format_double(cell.c_prime_mean),
                      format_double(cell.mse_mean),
                      format_double(cell.mse_stderr),
                      format_double(cell.plain_mse_mean),
                      format_double(cell.abs_error_mean),
                      format_double(cell.realized_error_mean),
                      format_double(cell.realized_error_stderr),
                      format_double(cell.expected_bound_mean),
                      format_double(cell.mean_flip_prob)});
    }
    fs::path path = out_dir / "benchmark.csv";
    write_csv_rows(path, columns, rows);
    artifacts.files.push_back(path);
  }

  // metrics.csv: one row per (cell, replication).
  {
    std::vector<std::string> columns{
        "epsilon_abc", "epsilon_total", "resample",      "observed_size",
        "replication", "c",             "c_prime",       "excluded",
        "mse",         "mean_abs_error", "realized_error", "expected_bound"};
    std::vector<std::vector<std::string>> rows;
    for (const PairedCellSummary& cell : cells) {
      for (const ReplicationOutcome& o : cell.outcomes) {
        rows.push_back({format_double(cell.cell.epsilon_abc),
                        format_double(cell.cell.epsilon_total),
                        fmt_bool(cell.cell.resample),
                        std::to_string(cell.cell.observed_size),
                        std::to_string(o.replication), std::to_string(o.c),
                        std::to_string(o.c_prime), fmt_bool(o.excluded),
                        format_double(o.mse), format_double(o.abs_error),
                        format_double(o.realized_error),
                        format_double(o.expected_bound)});
      }
    }
    fs::path path = out_dir / "metrics.csv";
    write_csv_rows(path, columns, rows);
    artifacts.files.push_back(path);
  }

  // One ledger line per cell; the round-trip check runs inside.
  for (const PairedCellSummary& cell : cells) {
    if (cell.replications == cell.excluded) continue;
    PrivacyBudget budget(cell.cell.epsilon_total, config.budget.quota,
                         cell.cell.resample, cell.delta_rho);
    artifacts.ledger_lines.push_back(
        ledger_line(accountant_report(budget, cell.delta_rho)));
  }

  // results.json.
  {
    json root;
    root["mode"] = to_string(config.mode);
    root["replications"] = config.replications;
    root["proposal_count"] = config.proposal_count;
    root["stop_after_quota"] = config.benchmark.stop_after_quota;
    root["shared_proposals"] = config.benchmark.shared_proposals;
    json cell_list = json::array();
    for (const PairedCellSummary& cell : cells) {
      json j;
      j["epsilon_abc"] = cell.cell.epsilon_abc;
      j["epsilon_total"] = num_or_inf(cell.cell.epsilon_total);
      j["resample"] = cell.cell.resample;
      j["observed_size"] = cell.cell.observed_size;
      j["replications"] = cell.replications;
      j["excluded"] = cell.excluded;
      j["c_mean"] = cell.c_mean;
      j["c_prime_mean"] = cell.c_prime_mean;
      j["mse_mean"] = cell.mse_mean;
      j["mse_stderr"] = cell.mse_stderr;
      j["plain_mse_mean"] = cell.plain_mse_mean;
      j["mean_abs_error_mean"] = cell.abs_error_mean;
      j["realized_error_mean"] = cell.realized_error_mean;
      j["realized_error_stderr"] = cell.realized_error_stderr;
      j["expected_bound_mean"] = cell.expected_bound_mean;
      j["mean_flip_prob"] = cell.mean_flip_prob;
      cell_list.push_back(std::move(j));
    }
    root["cells"] = std::move(cell_list);
    fs::path path = out_dir / "results.json";
    write_text(path, root.dump(2) + "\n");
    artifacts.files.push_back(path);
  }
  return artifacts;
}

RunArtifacts run_flip_grid(const ExperimentConfig& config,
                           const fs::path& out_dir, unsigned threads) {
  RunArtifacts artifacts;
  ObservedData observed = prepare_observed(config, config.observed.size);
  ReplicationInputs inputs = prepare_replication(
      config, observed, config.flip_grid.rho_draws,
      replication_seed(config.master_seed, 1), threads);

  std::vector<double> epsilon_totals = config.flip_grid.epsilon_totals;
  if (epsilon_totals.empty()) {
    double lo = std::log(config.flip_grid.log_lo);
    double hi = std::log(config.flip_grid.log_hi);
    std::size_t count = config.flip_grid.log_count;
    for (std::size_t i = 0; i < count; ++i) {
      if (i == 0) {
        epsilon_totals.push_back(config.flip_grid.log_lo);
      } else if (i + 1 == count) {
        epsilon_totals.push_back(config.flip_grid.log_hi);
      } else {
        double t = static_cast<double>(i) / static_cast<double>(count - 1);
        epsilon_totals.push_back(std::exp(lo + t * (hi - lo)));
      }
    }
  }

  std::vector<FlipGridRow> rows = flip_profile_grid(
      inputs.distances, config.epsilon_abc, config.flip_grid.observed_sizes,
      config.flip_grid.quotas, epsilon_totals, config.flip_grid.resample,
      config.flip_grid.kernel_bound);

  {
    std::vector<std::string> columns{"observed_size", "quota", "epsilon_total",
                                     "mean_flip_prob"};
    std::vector<std::vector<std::string>> table;
    for (const FlipGridRow& row : rows) {
      table.push_back({std::to_string(row.observed_size),
                       std::to_string(row.quota),
                       format_double(row.epsilon_total),
                       format_double(row.mean_flip_prob)});
    }
    fs::path path = out_dir / "flip_grid.csv";
    write_csv_rows(path, columns, table);
    artifacts.files.push_back(path);
  }

  {
    json root;
    root["mode"] = to_string(config.mode);
    root["epsilon_abc"] = config.epsilon_abc;
    root["rho_draws"] = inputs.distances.size();
    root["resample"] = config.flip_grid.resample;
    root["kernel_bound"] = config.flip_grid.kernel_bound;
    json eps = json::array();
    for (double e : epsilon_totals) eps.push_back(num_or_inf(e));
    root["epsilon_totals"] = std::move(eps);
    root["rows"] = rows.size();
    fs::path path = out_dir / "results.json";
    write_text(path, root.dump(2) + "\n");
    artifacts.files.push_back(path);
  }
  artifacts.ledger_lines.push_back(
      "analytic grid; no privacy budget is spent");
  return artifacts;
}

RunArtifacts run_bounds(const ExperimentConfig& config, const fs::path& out_dir,
                        unsigned threads) {
  RunArtifacts artifacts;
  ObservedData observed = prepare_observed(config, config.observed.size);
  const std::size_t reps = config.replications;
  const bool shared = config.benchmark.shared_proposals;

  std::vector<ReplicationInputs> inputs;
  if (shared) {
    inputs.push_back(prepare_replication(config, observed,
                                         config.proposal_count,
                                         replication_seed(config.master_seed, 1),
                                         threads));
  } else {
    inputs.reserve(reps);
    for (std::size_t r = 1; r <= reps; ++r) {
      inputs.push_back(prepare_replication(
          config, observed, config.proposal_count,
          replication_seed(config.master_seed, r), threads));
    }
  }

  PairedCellSpec cell;
  cell.epsilon_abc = config.epsilon_abc;
  cell.epsilon_total = config.budget.epsilon_total;
  cell.resample = config.budget.resample;
  cell.observed_size = observed.nominal_size;
  cell.cell_index = 0;

  std::vector<ReplicationOutcome> outcomes;
  outcomes.reserve(reps);
  for (std::size_t r = 1; r <= reps; ++r) {
    const ReplicationInputs& in = shared ? inputs.front() : inputs[r - 1];
    outcomes.push_back(run_paired_replication(
        in, observed, cell, config.budget.quota,
        config.benchmark.stop_after_quota, r,
        replication_seed(config.master_seed, r)));
  }

  // beta_r = (4 sup_r S_r) / (3 c'_r), so the tail bound at a is
  // max(0, 1 - beta_r / a).  Thresholds are set from the mean beta so that
  // the guaranteed level at quantile q is about q.
  std::vector<double> betas;
  std::size_t excluded = 0;
  for (const ReplicationOutcome& o : outcomes) {
    if (o.excluded) {
      ++excluded;
      continue;
    }
    betas.push_back(4.0 * o.sup_norm * o.tail_exp_sum /
                    (3.0 * static_cast<double>(o.c_prime)));
  }
  double mean_beta = betas.empty() ? 0.0 : mean_stderr(betas).mean;

  std::vector<std::vector<std::string>> table;
  json row_list = json::array();
  for (double q : config.bounds.tail_quantiles) {
    double a = mean_beta > 0.0 ? mean_beta / (1.0 - q) : 0.0;
    double bound_sum = 0.0;
    double hit_sum = 0.0;
    std::size_t included = 0;
    for (const ReplicationOutcome& o : outcomes) {
      if (o.excluded) continue;
      ++included;
      double beta = 4.0 * o.sup_norm * o.tail_exp_sum /
                    (3.0 * static_cast<double>(o.c_prime));
      double bound =
          a > 0.0 ? std::max(0.0, 1.0 - beta / a) : (beta == 0.0 ? 1.0 : 0.0);
      bound_sum += bound;
      if (o.realized_error <= a) hit_sum += 1.0;
    }
    double bound_mean = included > 0 ? bound_sum / included : kNaN;
    double empirical = included > 0 ? hit_sum / included : kNaN;
    table.push_back({format_double(q), format_double(a),
                     format_double(bound_mean), format_double(empirical),
                     std::to_string(included), std::to_string(excluded)});
    json j;
    j["quantile"] = q;
    j["a"] = a;
    j["bound_mean"] = bound_mean;
    j["empirical_frequency"] = empirical;
    j["replications"] = included;
    j["excluded"] = excluded;
    row_list.push_back(std::move(j));
  }

  {
    std::vector<std::string> columns{"quantile",  "a",
                                     "bound_mean", "empirical_frequency",
                                     "replications", "excluded"};
    fs::path path = out_dir / "tail_bounds.csv";
    write_csv_rows(path, columns, table);
    artifacts.files.push_back(path);
  }

  // metrics.csv: one row per replication.
  {
    std::vector<std::string> columns{"replication", "c",
                                     "c_prime",     "excluded",
                                     "realized_error", "expected_bound"};
    std::vector<std::vector<std::string>> rows;
    for (const ReplicationOutcome& o : outcomes) {
      rows.push_back({std::to_string(o.replication), std::to_string(o.c),
                      std::to_string(o.c_prime), fmt_bool(o.excluded),
                      format_double(o.realized_error),
                      format_double(o.expected_bound)});
    }
    fs::path path = out_dir / "metrics.csv";
    write_csv_rows(path, columns, rows);
    artifacts.files.push_back(path);
  }

  {
    json root;
    root["mode"] = to_string(config.mode);
    root["replications"] = reps;
    root["excluded"] = excluded;
    root["mean_beta"] = mean_beta;
    root["rows"] = std::move(row_list);
    fs::path path = out_dir / "results.json";
    write_text(path, root.dump(2) + "\n");
    artifacts.files.push_back(path);
  }

  if (!outcomes.empty() && excluded < outcomes.size()) {
    PrivacyBudget budget(cell.epsilon_total, config.budget.quota,
                         cell.resample, inputs.front().delta_rho);
    artifacts.ledger_lines.push_back(
        ledger_line(accountant_report(budget, inputs.front().delta_rho)));
  }
  return artifacts;
}

}  // namespace

RunArtifacts run_experiment(const ExperimentConfig& config,
                            const fs::path& out_dir, unsigned threads) {
  validate_config(config);
  fs::create_directories(out_dir);

  RunArtifacts artifacts;
  switch (config.mode) {
    case RunMode::dp_run:
      artifacts = run_dp(config, out_dir, threads);
      break;
    case RunMode::paired_benchmark:
      artifacts = run_benchmark(config, out_dir, threads);
      break;
    case RunMode::flip_grid:
      artifacts = run_flip_grid(config, out_dir, threads);
      break;
    case RunMode::bounds_report:
      artifacts = run_bounds(config, out_dir, threads);
      break;
  }

  fs::path echo_path = out_dir / "config_echo.json";
  write_text(echo_path, config_to_json(config));
  artifacts.files.push_back(echo_path);
  return artifacts;
}

namespace {

struct CsvTable {
  std::vector<std::string> columns;
  Dataset data;
};

CsvTable read_table(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("", "cannot open " + path.string());
  }
  std::string header;
  if (!std::getline(in, header)) {
    throw ValidationError("", path.string() + " is empty");
  }
  if (!header.empty() && header.back() == '\r') header.pop_back();
  CsvTable table;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = header.find(',', start);
    table.columns.push_back(header.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  table.data = load_csv(path);
  return table;
}

std::size_t column_index(const CsvTable& table, const std::string& name,
                         const fs::path& path) {
  for (std::size_t j = 0; j < table.columns.size(); ++j) {
    if (table.columns[j] == name) return j;
  }
  throw ValidationError("", path.string() + " has no column '" + name + "'");
}

std::string run_mode_of(const fs::path& results_dir) {
  fs::path results = results_dir / "results.json";
  std::ifstream in(results, std::ios::binary);
  if (!in) {
    throw ValidationError("",
                          "no results.json in " + results_dir.string() +
                              "; point --out at a finished run directory");
  }
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("", results.string() + " is not valid JSON: " +
                                  e.what());
  }
  if (!root.is_object() || !root.contains("mode") ||
      !root.at("mode").is_string()) {
    throw ValidationError("", results.string() + " has no mode field");
  }
  return root.at("mode").get<std::string>();
}

}  // namespace

RunArtifacts emit_plot_data(const fs::path& results_dir,
                            const std::string& kind, const fs::path& out_dir) {
  RunArtifacts artifacts;
  std::string mode = run_mode_of(results_dir);
  fs::create_directories(out_dir);

  if (kind == "fig1") {
    if (mode != "flip_grid") {
      throw ValidationError("", "fig1 needs a flip_grid run, found mode '" +
                                    mode + "'");
    }
    CsvTable table = read_table(results_dir / "flip_grid.csv");
    std::size_t n = column_index(table, "observed_size",
                                 results_dir / "flip_grid.csv");
    std::size_t c = column_index(table, "quota", results_dir / "flip_grid.csv");
    std::size_t e = column_index(table, "epsilon_total",
                                 results_dir / "flip_grid.csv");
    std::size_t p = column_index(table, "mean_flip_prob",
                                 results_dir / "flip_grid.csv");
    std::vector<std::string> columns{"N", "c", "epsilon_total",
                                     "mean_flip_prob"};
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < table.data.size(); ++i) {
      auto row = table.data.row(i);
      rows.push_back({format_double(row[n]), format_double(row[c]),
                      format_double(row[e]), format_double(row[p])});
    }
    fs::path path = out_dir / "fig1.csv";
    write_csv_rows(path, columns, rows);
    artifacts.files.push_back(path);
    return artifacts;
  }

  if (kind == "fig2") {
    if (mode != "paired_benchmark") {
      throw ValidationError(
          "", "fig2 needs a paired_benchmark run, found mode '" + mode + "'");
    }
    CsvTable table = read_table(results_dir / "benchmark.csv");
    fs::path src = results_dir / "benchmark.csv";
    std::size_t abc = column_index(table, "epsilon_abc", src);
    std::size_t total = column_index(table, "epsilon_total", src);
    std::size_t resample = column_index(table, "resample", src);
    std::size_t mse = column_index(table, "mse_mean", src);
    std::size_t se = column_index(table, "mse_stderr", src);
    std::vector<std::string> columns{"epsilon_abc", "epsilon_total",
                                     "resample", "mse_mean", "mse_stderr"};
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < table.data.size(); ++i) {
      auto row = table.data.row(i);
      rows.push_back({format_double(row[abc]), format_double(row[total]),
                      format_double(row[resample]), format_double(row[mse]),
                      format_double(row[se])});
    }
    fs::path path = out_dir / "fig2.csv";
    write_csv_rows(path, columns, rows);
    artifacts.files.push_back(path);
    return artifacts;
  }

  if (kind == "posterior_hist") {
    if (mode != "dp_run") {
      throw ValidationError(
          "", "posterior_hist needs a dp_run, found mode '" + mode + "'");
    }
    fs::path src = results_dir / "accepted_theta.csv";
    CsvTable table = read_table(src);
    std::vector<std::size_t> param_cols;
    std::vector<std::string> param_names;
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
      if (table.columns[j] == "replication" ||
          table.columns[j] == "accept_index") {
        continue;
      }
      param_cols.push_back(j);
      param_names.push_back(table.columns[j]);
    }
    std::ostringstream os;
    os << "parameter,value\n";
    for (std::size_t i = 0; i < table.data.size(); ++i) {
      auto row = table.data.row(i);
      for (std::size_t k = 0; k < param_cols.size(); ++k) {
        os << param_names[k] << ',' << format_double(row[param_cols[k]])
           << '\n';
      }
    }
    fs::path path = out_dir / "posterior_hist.csv";
    write_text(path, os.str());
    artifacts.files.push_back(path);
    return artifacts;
  }

  throw ValidationError("", "unknown plot kind '" + kind +
                                "' (expected fig1, fig2, or posterior_hist)");
}

}  // namespace abcdp
