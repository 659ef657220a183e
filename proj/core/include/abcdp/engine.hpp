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

#ifndef ABCDP_ENGINE_HPP_
#define ABCDP_ENGINE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abcdp/dataset.hpp"
#include "abcdp/distance.hpp"
#include "abcdp/noise.hpp"
#include "abcdp/rng.hpp"

namespace abcdp {

// One (parameters, pseudo-data) pair from the public prior-simulation phase.
// Indices are 1-based and contiguous.
struct ProposalRecord {
  std::size_t index = 0;
  std::vector<double> theta;
  Dataset pseudo_data;
};

// Total privacy budget and the Laplace scale it buys.  The scale is derived
// at construction: b = 2 c delta_rho / epsilon with threshold resampling,
// b = (c + 1) delta_rho / epsilon without.  An infinite budget is the
// explicit non-private mode and maps to the zero noise scale.
class PrivacyBudget {
 public:
  PrivacyBudget(double epsilon_total, std::size_t quota, bool resample,
                double delta_rho);

  static PrivacyBudget non_private(std::size_t quota, bool resample = false);

  double epsilon_total() const { return epsilon_total_; }
  std::size_t quota() const { return quota_; }
  bool resample() const { return resample_; }
  const LaplaceScale& noise_scale() const { return scale_; }
  bool is_non_private() const { return scale_.is_noiseless(); }

  friend bool operator==(const PrivacyBudget&, const PrivacyBudget&) = default;

 private:
  double epsilon_total_;
  std::size_t quota_;
  bool resample_;
  LaplaceScale scale_;
};

// Laplace scale that spends exactly `epsilon_total` over a run accepting up
// to `quota` samples.  Infinite budget yields the zero-scale sentinel.
LaplaceScale noise_scale_from_budget(double epsilon_total, std::size_t quota,
                                     bool resample, double delta_rho);

// Per-step noise draws; retained only when explicitly requested by white-box
// tests.  Never serialized.
struct NoiseDraw {
  double threshold_noise = 0.0;
  double distance_noise = 0.0;
};

// Ordered accept/reject indicators with acceptance bookkeeping.  The
// sequence may be shorter than the proposal count when the run stopped at
// its acceptance quota; `terminated_early` records exactly that.
struct IndicatorTrace {
  std::vector<std::uint8_t> indicators;
  std::vector<std::size_t> accepted_indices;  // 1-based proposal indices
  bool terminated_early = false;
  std::vector<NoiseDraw> noise_log;  // empty unless recording was enabled

  std::size_t accepted_count() const { return accepted_indices.size(); }
};

// Outcome of one inference run.  `posterior_mean` is absent when nothing was
// accepted.  `distances` is present only for non-private or synthetic-data
// runs; a private run must not expose realized distances.
struct AbcResult {
  IndicatorTrace trace;
  std::vector<std::vector<double>> accepted_thetas;
  std::optional<std::vector<double>> posterior_mean;
  std::optional<std::vector<double>> distances;
};

struct TraceOptions {
  // Break after the acceptance quota is reached (the production behavior).
  // Disabled only by benchmark diagnostics that need the full indicator
  // sequence; such traces are not privacy-calibrated outputs.
  bool stop_after_quota = true;
  // Record per-step noise draws for white-box tests.
  bool record_noise_log = false;
};

// Plain threshold pass over precomputed distances: indicator t is 1 iff
// rho[t] <= epsilon_abc, optionally stopping after c_stop acceptances.
IndicatorTrace rejection_trace(std::span<const double> rho, double epsilon_abc,
                               std::optional<std::size_t> c_stop);

// Noisy threshold pass over precomputed distances.  The threshold
// perturbation is drawn once up front and compared against each distance
// plus its own fresh perturbation; on acceptance the threshold perturbation
// is re-drawn exactly when the budget says to resample.  With a zero noise
// scale no generator state is consumed and the trace is bit-identical to
// rejection_trace with c_stop equal to the quota.
IndicatorTrace noisy_threshold_trace(std::span<const double> rho,
                                     double epsilon_abc,
                                     const PrivacyBudget& budget, Rng& rng,
                                     const TraceOptions& options = {});

// Non-private rejection pass over proposal records.  Distances for all
// evaluated steps are recorded in the result.
AbcResult run_rejection_abc(std::span<const ProposalRecord> proposals,
                            const Dataset& observed, const DistanceSpec& spec,
                            double epsilon_abc,
                            std::optional<std::size_t> c_stop = std::nullopt);

struct RunOptions {
  TraceOptions trace;
  // The observed data is synthetic benchmark data, so realized distances may
  // be included in the result for diagnostics.
  bool observed_is_synthetic = false;
};

// The private counterpart: same proposals, same acceptance rule, but both
// sides of the comparison carry calibrated Laplace perturbations.  The
// caller is responsible for having derived the budget's noise scale from
// this distance's sensitivity at this observed size.
AbcResult run_abcdp(std::span<const ProposalRecord> proposals,
                    const Dataset& observed, const DistanceSpec& spec,
                    double epsilon_abc, const PrivacyBudget& budget, Rng& rng,
                    const RunOptions& options = {});

// What a run spends.  `epsilon_rederived` inverts the scale derivation from
// the actual noise scale as an end-to-end consistency check.
struct AccountantLedger {
  double epsilon_total = 0.0;
  std::size_t quota = 0;
  bool resample = false;
  double noise_scale = 0.0;
  double delta_rho = 0.0;
  double epsilon_rederived = 0.0;
  std::string composition = "linear";
};

// Re-derives the spent budget from the noise scale and asserts the
// round-trip recovers epsilon_total to 1e-12; a mismatch (for example a
// delta_rho different from the one the budget was built with) is a contract
// violation and throws logic_error.
AccountantLedger accountant_report(const PrivacyBudget& budget,
                                   double delta_rho);

}  // namespace abcdp

#endif  // ABCDP_ENGINE_HPP_
