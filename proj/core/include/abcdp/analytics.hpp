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

#ifndef ABCDP_ANALYTICS_HPP_
#define ABCDP_ANALYTICS_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "abcdp/noise.hpp"

namespace abcdp {

// Probability that a noisy acceptance indicator disagrees with its
// noiseless counterpart at a step with realized distance `rho`.  This is
// the upper tail of the threshold-minus-distance noise difference at the
// gap |rho - epsilon_abc|; the noiseless sentinel never flips anything.
double flip_probability(double rho, double epsilon_abc,
                        const LaplaceScale& scale);

// Realized distances together with their per-step flip probabilities at a
// fixed threshold and noise scale.  Everything downstream of the error
// bounds consumes this profile, so it is computed once per run.
struct FlipProfile {
  std::vector<double> rho_values;
  double epsilon_abc = 0.0;
  LaplaceScale noise_scale{0.0};
  std::vector<double> flip_probs;

  static FlipProfile make(std::vector<double> rho, double epsilon_abc,
                          const LaplaceScale& scale);
};

// Test function f applied to accepted parameters when estimating posterior
// expectations.  `sup_norm` is the largest Euclidean norm f attains over the
// proposal set, which scales every error bound.
struct PosteriorFunctional {
  std::string name;
  std::function<std::vector<double>(std::span<const double>)> map;
  double sup_norm = 0.0;
};

// Identity functional (posterior-mean estimation); sup_norm is computed
// over the supplied proposal parameters.
PosteriorFunctional identity_functional(
    std::span<const std::vector<double>> thetas);

// Upper bound on the expected Euclidean gap between the noisy-run and
// plain-run posterior-functional estimates sharing one proposal sequence:
// (2 sup_norm / c_prime) * sum_t flip_prob_t.
double expected_error_bound(const FlipProfile& profile,
                            const PosteriorFunctional& functional,
                            std::size_t c_prime);

// Lower bound on P[gap <= a]:
// max(0, 1 - (4 sup_norm / (3 a c_prime)) * sum_t exp(-gap_t / (2b))).
double tail_error_bound(const FlipProfile& profile,
                        const PosteriorFunctional& functional,
                        std::size_t c_prime, double a);

// Bound report for one paired run (or one family of noise replications over
// a fixed proposal sequence).
struct ErrorBoundReport {
  double expected_bound = 0.0;
  double realized_error = 0.0;
  std::size_t c = 0;        // noisy-run acceptance count
  std::size_t c_prime = 0;  // plain-run acceptance count
  double sup_norm = 0.0;
  // sum_t exp(-|rho_t - epsilon_abc| / (2b)); zero in the noiseless case.
  double tail_exp_sum = 0.0;

  double tail_bound(double a) const;
};

ErrorBoundReport make_error_bound_report(const FlipProfile& profile,
                                         const PosteriorFunctional& functional,
                                         std::size_t c, std::size_t c_prime,
                                         double realized_error);

// One cell of the privacy/utility trade-off table: the mean flip
// probability over a sample of distances when the noise scale is calibrated
// for `observed_size` records and `quota` acceptances at `epsilon_total`.
struct FlipGridRow {
  std::size_t observed_size = 0;
  std::size_t quota = 0;
  double epsilon_total = 0.0;
  double mean_flip_prob = 0.0;
};

// Evaluates the closed-form mean flip probability over the full grid.  The
// per-cell sensitivity is the kernel-distance value 2 sqrt(kernel_bound) /
// observed_size.  Rows are ordered observed_size-major, then quota, then
// epsilon_total, all in the order given.
std::vector<FlipGridRow> flip_profile_grid(
    std::span<const double> rho_samples, double epsilon_abc,
    std::span<const std::size_t> observed_sizes,
    std::span<const std::size_t> quotas,
    std::span<const double> epsilon_totals, bool resample, double kernel_bound);

}  // namespace abcdp

#endif  // ABCDP_ANALYTICS_HPP_
