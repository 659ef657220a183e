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

#ifndef ABCDP_DISTANCE_HPP_
#define ABCDP_DISTANCE_HPP_

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abcdp/dataset.hpp"
#include "abcdp/rng.hpp"

namespace abcdp {

// Bounded positive-definite kernel.  `bound` is the uniform bound on k(x, y),
// which every sensitivity computation downstream depends on.
struct KernelSpec {
  double bandwidth = 1.0;
  double bound = 1.0;

  static KernelSpec gaussian(double bandwidth);

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

// Gaussian kernel value exp(-|x - y|^2 / (2 l^2)).
double kernel_value(const KernelSpec& kernel, std::span<const double> x,
                    std::span<const double> y);

// Sum over all ordered pairs within one dataset, diagonal included.
double kernel_self_sum(const Dataset& x, const KernelSpec& kernel);

// Sum over all ordered cross pairs.
double kernel_cross_sum(const Dataset& x, const Dataset& y,
                        const KernelSpec& kernel);

// Biased (V-statistic) estimate of squared maximum mean discrepancy.  The
// diagonal terms are kept, so the estimate is nonnegative by construction up
// to rounding; tiny negative rounding residue is clamped to zero.
double mmd_squared(const Dataset& x, const Dataset& y, const KernelSpec& kernel);

double mmd(const Dataset& x, const Dataset& y, const KernelSpec& kernel);

struct BandwidthResult {
  double value = 1.0;
  // Set when the pooled points were too degenerate to produce a positive
  // median, in which case `value` is the fallback 1.0.
  bool degenerate = false;
};

// Median of pairwise Euclidean distances over a pool of simulated datasets.
// Only simulated data may enter the pool; the observed data must stay out of
// every tuning decision.  Pools above `subsample_cap` points are thinned with
// a seeded uniform subsample so the cost stays quadratic in the cap.
BandwidthResult median_heuristic_bandwidth(std::span<const Dataset> pool,
                                           Rng& rng,
                                           std::size_t subsample_cap = 2000);

// Named summary-statistic map from a dataset to a fixed-length vector.
struct SummaryFn {
  std::string name;
  std::size_t output_length = 0;
  std::function<std::vector<double>(const Dataset&)> map;
};

// Identity summary: flattens the rows in order (length n * d).
SummaryFn raw_values_summary(std::size_t expected_length);

// Cluster-size summary for outbreak data: given a table of cluster sizes,
// returns {cluster count, largest cluster, singleton count, total cases}.
SummaryFn cluster_stats_summary();

// Distance between summary vectors: sqrt(sum_j w_j (s_j(x) - s_j(y))^2),
// clipped at `clip` so the result is bounded regardless of the summaries.
double weighted_l2_distance(const Dataset& x, const Dataset& y,
                            const SummaryFn& summary,
                            std::span<const double> weights, double clip);

// Closed choice of distance for a run: kernel MMD or clipped weighted L2.
// The spec of a distance carries everything needed to bound how much one
// record of the observed data can move it.
class DistanceSpec {
 public:
  static DistanceSpec make_mmd(KernelSpec kernel);
  static DistanceSpec make_weighted_l2(
      SummaryFn summary, std::vector<double> weights, double clip,
      std::optional<double> declared_sensitivity = std::nullopt);

  bool is_mmd() const { return is_mmd_; }
  const KernelSpec& kernel() const;
  const SummaryFn& summary() const;
  std::span<const double> weights() const { return weights_; }
  double clip() const { return clip_; }
  std::optional<double> declared_sensitivity() const {
    return declared_sensitivity_;
  }

  // Worst-case change of the distance when one observed record is replaced.
  // For MMD on n observed points this is 2 sqrt(bound) / n; for clipped
  // distances it is the declared per-record bound if one was supplied and
  // otherwise the conservative clip value itself.
  double sensitivity(std::size_t observed_size) const;

  // Uniform upper bound on the distance value itself.
  double upper_bound() const;

  // Distance between an observed dataset and one pseudo dataset.
  double evaluate(const Dataset& observed, const Dataset& pseudo) const;

 private:
  DistanceSpec() = default;

  bool is_mmd_ = true;
  KernelSpec kernel_;
  SummaryFn summary_;
  std::vector<double> weights_;
  double clip_ = 0.0;
  std::optional<double> declared_sensitivity_;
};

// Repeated evaluation against one fixed observed dataset.  Precomputes the
// observed-side term (kernel self sum or summary vector) once; the per-call
// arithmetic is ordered identically to DistanceSpec::evaluate so both paths
// produce bit-equal results.
class DistanceEvaluator {
 public:
  DistanceEvaluator(const DistanceSpec& spec, const Dataset& observed);

  double operator()(const Dataset& pseudo) const;

  const DistanceSpec& spec() const { return spec_; }
  std::size_t observed_size() const { return observed_size_; }

 private:
  DistanceSpec spec_;
  std::size_t observed_size_;
  Dataset observed_;
  double observed_self_sum_ = 0.0;      // MMD path
  std::vector<double> observed_summary_;  // weighted L2 path
};

}  // namespace abcdp

#endif  // ABCDP_DISTANCE_HPP_
