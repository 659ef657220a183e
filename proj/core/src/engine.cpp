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

#include "abcdp/engine.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace abcdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_budget_inputs(double epsilon_total, std::size_t quota,
                            double delta_rho) {
  if (std::isnan(epsilon_total) || epsilon_total <= 0.0) {
    throw std::invalid_argument("privacy budget: epsilon_total must be > 0 or infinite");
  }
  if (quota == 0) {
    throw std::invalid_argument("privacy budget: acceptance quota must be >= 1");
  }
  if (!(delta_rho > 0.0) || !std::isfinite(delta_rho)) {
    throw std::invalid_argument("privacy budget: delta_rho must be finite and > 0");
  }
}

}  // namespace

LaplaceScale noise_scale_from_budget(double epsilon_total, std::size_t quota,
                                     bool resample, double delta_rho) {
  validate_budget_inputs(epsilon_total, quota, delta_rho);
  if (epsilon_total == kInf) return LaplaceScale(0.0);
  double dc = static_cast<double>(quota);
  double b = resample ? 2.0 * dc * delta_rho / epsilon_total
                      : (dc + 1.0) * delta_rho / epsilon_total;
  return LaplaceScale(b);
}

PrivacyBudget::PrivacyBudget(double epsilon_total, std::size_t quota,
                             bool resample, double delta_rho)
    : epsilon_total_(epsilon_total),
      quota_(quota),
      resample_(resample),
      scale_(noise_scale_from_budget(epsilon_total, quota, resample, delta_rho)) {}

PrivacyBudget PrivacyBudget::non_private(std::size_t quota, bool resample) {
  return PrivacyBudget(kInf, quota, resample, 1.0);
}

IndicatorTrace rejection_trace(std::span<const double> rho, double epsilon_abc,
                               std::optional<std::size_t> c_stop) {
  if (c_stop && *c_stop == 0) {
    throw std::invalid_argument("rejection_trace: c_stop must be >= 1");
  }
  IndicatorTrace trace;
  trace.indicators.reserve(rho.size());
  for (std::size_t t = 0; t < rho.size(); ++t) {
    bool accepted = rho[t] <= epsilon_abc;
    trace.indicators.push_back(accepted ? 1 : 0);
    if (accepted) {
      trace.accepted_indices.push_back(t + 1);
      if (c_stop && trace.accepted_indices.size() >= *c_stop) break;
    }
  }
  trace.terminated_early = trace.indicators.size() < rho.size();
  return trace;
}

IndicatorTrace noisy_threshold_trace(std::span<const double> rho,
                                     double epsilon_abc,
                                     const PrivacyBudget& budget, Rng& rng,
                                     const TraceOptions& options) {
  const LaplaceScale& b = budget.noise_scale();
  const LaplaceScale b2(2.0 * b.value());
  IndicatorTrace trace;
  trace.indicators.reserve(rho.size());
  double m = sample_laplace(b, rng);
  for (std::size_t t = 0; t < rho.size(); ++t) {
    double nu = sample_laplace(b2, rng);
    bool accepted = rho[t] + nu <= epsilon_abc + m;
    trace.indicators.push_back(accepted ? 1 : 0);
    if (options.record_noise_log) trace.noise_log.push_back({m, nu});
    if (accepted) {
      trace.accepted_indices.push_back(t + 1);
      if (budget.resample()) m = sample_laplace(b, rng);
      if (options.stop_after_quota &&
          trace.accepted_indices.size() >= budget.quota()) {
        break;
      }
    }
  }
  trace.terminated_early = trace.indicators.size() < rho.size();
  return trace;
}

namespace {

void validate_proposals(std::span<const ProposalRecord> proposals) {
  if (proposals.empty()) {
    throw std::invalid_argument("engine: empty proposal sequence");
  }
  for (std::size_t t = 0; t < proposals.size(); ++t) {
    if (proposals[t].index != t + 1) {
      throw std::invalid_argument(
          "engine: proposal indices must be contiguous from 1");
    }
  }
}

// Assembles acceptance bookkeeping from an evaluated trace.  `rho` covers
// exactly the evaluated prefix of the proposals.
AbcResult assemble_result(IndicatorTrace trace,
                          std::span<const ProposalRecord> proposals,
                          std::vector<double> rho, bool expose_distances) {
  AbcResult result;
  result.accepted_thetas.reserve(trace.accepted_indices.size());
  for (std::size_t idx : trace.accepted_indices) {
    result.accepted_thetas.push_back(proposals[idx - 1].theta);
  }
  if (!result.accepted_thetas.empty()) {
    std::size_t dim = result.accepted_thetas.front().size();
    std::vector<double> mean(dim, 0.0);
    for (const auto& theta : result.accepted_thetas) {
      for (std::size_t j = 0; j < dim; ++j) mean[j] += theta[j];
    }
    for (double& v : mean) v /= static_cast<double>(result.accepted_thetas.size());
    result.posterior_mean = std::move(mean);
  }
  if (expose_distances) result.distances = std::move(rho);
  result.trace = std::move(trace);
  return result;
}

}  // namespace

AbcResult run_rejection_abc(std::span<const ProposalRecord> proposals,
                            const Dataset& observed, const DistanceSpec& spec,
                            double epsilon_abc,
                            std::optional<std::size_t> c_stop) {
  validate_proposals(proposals);
  if (c_stop && *c_stop == 0) {
    throw std::invalid_argument("run_rejection_abc: c_stop must be >= 1");
  }
  DistanceEvaluator evaluate(spec, observed);
  IndicatorTrace trace;
  std::vector<double> rho;
  rho.reserve(proposals.size());
  for (std::size_t t = 0; t < proposals.size(); ++t) {
    double d = evaluate(proposals[t].pseudo_data);
    rho.push_back(d);
    bool accepted = d <= epsilon_abc;
    trace.indicators.push_back(accepted ? 1 : 0);
    if (accepted) {
      trace.accepted_indices.push_back(t + 1);
      if (c_stop && trace.accepted_indices.size() >= *c_stop) break;
    }
  }
  trace.terminated_early = trace.indicators.size() < proposals.size();
  return assemble_result(std::move(trace), proposals, std::move(rho), true);
}

AbcResult run_abcdp(std::span<const ProposalRecord> proposals,
                    const Dataset& observed, const DistanceSpec& spec,
                    double epsilon_abc, const PrivacyBudget& budget, Rng& rng,
                    const RunOptions& options) {
  validate_proposals(proposals);
  DistanceEvaluator evaluate(spec, observed);
  const LaplaceScale& b = budget.noise_scale();
  const LaplaceScale b2(2.0 * b.value());
  IndicatorTrace trace;
  std::vector<double> rho;
  rho.reserve(proposals.size());
  double m = sample_laplace(b, rng);
  for (std::size_t t = 0; t < proposals.size(); ++t) {
    double d = evaluate(proposals[t].pseudo_data);
    rho.push_back(d);
    double nu = sample_laplace(b2, rng);
    bool accepted = d + nu <= epsilon_abc + m;
    trace.indicators.push_back(accepted ? 1 : 0);
    if (options.trace.record_noise_log) trace.noise_log.push_back({m, nu});
    if (accepted) {
      trace.accepted_indices.push_back(t + 1);
      if (budget.resample()) m = sample_laplace(b, rng);
      if (options.trace.stop_after_quota &&
          trace.accepted_indices.size() >= budget.quota()) {
        break;
      }
    }
  }
  trace.terminated_early = trace.indicators.size() < proposals.size();
  bool expose = budget.is_non_private() || options.observed_is_synthetic;
  return assemble_result(std::move(trace), proposals, std::move(rho), expose);
}

AccountantLedger accountant_report(const PrivacyBudget& budget,
                                   double delta_rho) {
  if (!(delta_rho > 0.0) || !std::isfinite(delta_rho)) {
    throw std::invalid_argument("accountant_report: delta_rho must be finite and > 0");
  }
  AccountantLedger ledger;
  ledger.epsilon_total = budget.epsilon_total();
  ledger.quota = budget.quota();
  ledger.resample = budget.resample();
  ledger.noise_scale = budget.noise_scale().value();
  ledger.delta_rho = delta_rho;
  double dc = static_cast<double>(budget.quota());
  if (budget.noise_scale().is_noiseless()) {
    ledger.epsilon_rederived = kInf;
  } else if (budget.resample()) {
    ledger.epsilon_rederived = 2.0 * dc * delta_rho / ledger.noise_scale;
  } else {
    ledger.epsilon_rederived = (dc + 1.0) * delta_rho / ledger.noise_scale;
  }
  bool both_infinite = ledger.epsilon_total == kInf && ledger.epsilon_rederived == kInf;
  if (!both_infinite &&
      !(std::fabs(ledger.epsilon_rederived - ledger.epsilon_total) <= 1e-12)) {
    throw std::logic_error(
        "accountant_report: budget round-trip failed; the noise scale is "
        "inconsistent with (epsilon_total, quota, resample, delta_rho)");
  }
  return ledger;
}

}  // namespace abcdp
