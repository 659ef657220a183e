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

#include "abcdp/distance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace abcdp {

KernelSpec KernelSpec::gaussian(double bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw std::invalid_argument("KernelSpec: bandwidth must be finite and > 0");
  }
  return KernelSpec{bandwidth, 1.0};
}

double kernel_value(const KernelSpec& kernel, std::span<const double> x,
                    std::span<const double> y) {
  double sq = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    double d = x[j] - y[j];
    sq += d * d;
  }
  return std::exp(-sq / (2.0 * kernel.bandwidth * kernel.bandwidth));
}

double kernel_self_sum(const Dataset& x, const KernelSpec& kernel) {
  std::size_t n = x.size();
  // Diagonal terms are all k(x, x) = 1; off-diagonal pairs are symmetric.
  double sum = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      sum += 2.0 * kernel_value(kernel, x.row(i), x.row(j));
    }
  }
  return sum;
}

double kernel_cross_sum(const Dataset& x, const Dataset& y,
                        const KernelSpec& kernel) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) {
      sum += kernel_value(kernel, x.row(i), y.row(j));
    }
  }
  return sum;
}

namespace {

double mmd_squared_from_sums(double sxx, double syy, double sxy, std::size_t m,
                             std::size_t n) {
  double dm = static_cast<double>(m);
  double dn = static_cast<double>(n);
  double v = sxx / (dm * dm) + syy / (dn * dn) - 2.0 * sxy / (dm * dn);
  return std::max(v, 0.0);
}

}  // namespace

double mmd_squared(const Dataset& x, const Dataset& y, const KernelSpec& kernel) {
  if (x.empty() || y.empty()) {
    throw std::invalid_argument("mmd_squared: datasets must be non-empty");
  }
  if (x.dim() != y.dim()) {
    throw std::invalid_argument("mmd_squared: dimension mismatch");
  }
  return mmd_squared_from_sums(kernel_self_sum(x, kernel),
                               kernel_self_sum(y, kernel),
                               kernel_cross_sum(x, y, kernel), x.size(),
                               y.size());
}

double mmd(const Dataset& x, const Dataset& y, const KernelSpec& kernel) {
  return std::sqrt(mmd_squared(x, y, kernel));
}

BandwidthResult median_heuristic_bandwidth(std::span<const Dataset> pool,
                                           Rng& rng,
                                           std::size_t subsample_cap) {
  std::vector<std::vector<double>> points;
  for (const Dataset& d : pool) {
    for (std::size_t i = 0; i < d.size(); ++i) {
      auto r = d.row(i);
      points.emplace_back(r.begin(), r.end());
    }
  }
  if (points.size() > subsample_cap) {
    // Partial Fisher-Yates: the first `subsample_cap` slots end up holding a
    // uniform subsample, drawn deterministically from the caller's stream.
    for (std::size_t i = 0; i < subsample_cap; ++i) {
      std::size_t j = i + static_cast<std::size_t>(
                              rng.uniform_unit() * double(points.size() - i));
      if (j >= points.size()) j = points.size() - 1;
      std::swap(points[i], points[j]);
    }
    points.resize(subsample_cap);
  }
  if (points.size() < 2) return {1.0, true};

  std::vector<double> dists;
  dists.reserve(points.size() * (points.size() - 1) / 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      double sq = 0.0;
      for (std::size_t k = 0; k < points[i].size(); ++k) {
        double d = points[i][k] - points[j][k];
        sq += d * d;
      }
      dists.push_back(std::sqrt(sq));
    }
  }
  std::sort(dists.begin(), dists.end());
  std::size_t half = dists.size() / 2;
  double med = (dists.size() % 2 == 1)
                   ? dists[half]
                   : 0.5 * (dists[half - 1] + dists[half]);
  if (!(med > 0.0)) return {1.0, true};
  return {med, false};
}

SummaryFn raw_values_summary(std::size_t expected_length) {
  SummaryFn fn;
  fn.name = "raw_values";
  fn.output_length = expected_length;
  fn.map = [expected_length](const Dataset& d) {
    if (d.flat().size() != expected_length) {
      throw std::invalid_argument("raw_values summary: dataset has " +
                                  std::to_string(d.flat().size()) +
                                  " values, expected " +
                                  std::to_string(expected_length));
    }
    return std::vector<double>(d.flat().begin(), d.flat().end());
  };
  return fn;
}

SummaryFn cluster_stats_summary() {
  SummaryFn fn;
  fn.name = "cluster_stats";
  fn.output_length = 4;
  fn.map = [](const Dataset& d) {
    if (d.dim() != 1) {
      throw std::invalid_argument(
          "cluster_stats summary: expects a one-column table of cluster sizes");
    }
    double count = static_cast<double>(d.size());
    double largest = 0.0;
    double singletons = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      double v = d.at(i, 0);
      largest = std::max(largest, v);
      if (v == 1.0) singletons += 1.0;
      total += v;
    }
    return std::vector<double>{count, largest, singletons, total};
  };
  return fn;
}

double weighted_l2_distance(const Dataset& x, const Dataset& y,
                            const SummaryFn& summary,
                            std::span<const double> weights, double clip) {
  std::vector<double> sx = summary.map(x);
  std::vector<double> sy = summary.map(y);
  if (sx.size() != weights.size() || sy.size() != weights.size()) {
    throw std::invalid_argument(
        "weighted_l2_distance: summary length does not match weight vector");
  }
  double sq = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    double d = sx[j] - sy[j];
    sq += weights[j] * d * d;
  }
  return std::min(std::sqrt(sq), clip);
}

DistanceSpec DistanceSpec::make_mmd(KernelSpec kernel) {
  if (!(kernel.bandwidth > 0.0) || !(kernel.bound > 0.0)) {
    throw std::invalid_argument("DistanceSpec: kernel must have positive bandwidth and bound");
  }
  DistanceSpec spec;
  spec.is_mmd_ = true;
  spec.kernel_ = kernel;
  return spec;
}

DistanceSpec DistanceSpec::make_weighted_l2(
    SummaryFn summary, std::vector<double> weights, double clip,
    std::optional<double> declared_sensitivity) {
  if (!(clip > 0.0) || !std::isfinite(clip)) {
    throw std::invalid_argument("DistanceSpec: clip must be finite and > 0");
  }
  if (weights.empty()) {
    weights.assign(summary.output_length, 1.0);
  }
  if (weights.size() != summary.output_length) {
    throw std::invalid_argument(
        "DistanceSpec: weight vector length does not match summary length");
  }
  for (double w : weights) {
    if (!(w >= 0.0)) {
      throw std::invalid_argument("DistanceSpec: weights must be >= 0");
    }
  }
  if (declared_sensitivity && !(*declared_sensitivity > 0.0)) {
    throw std::invalid_argument("DistanceSpec: declared sensitivity must be > 0");
  }
  DistanceSpec spec;
  spec.is_mmd_ = false;
  spec.summary_ = std::move(summary);
  spec.weights_ = std::move(weights);
  spec.clip_ = clip;
  spec.declared_sensitivity_ = declared_sensitivity;
  return spec;
}

const KernelSpec& DistanceSpec::kernel() const {
  if (!is_mmd_) throw std::logic_error("DistanceSpec: no kernel on a summary distance");
  return kernel_;
}

const SummaryFn& DistanceSpec::summary() const {
  if (is_mmd_) throw std::logic_error("DistanceSpec: no summary on a kernel distance");
  return summary_;
}

double DistanceSpec::sensitivity(std::size_t observed_size) const {
  if (observed_size == 0) {
    throw std::invalid_argument("DistanceSpec::sensitivity: empty observed data");
  }
  if (is_mmd_) {
    return 2.0 * std::sqrt(kernel_.bound) / static_cast<double>(observed_size);
  }
  // Without a declared per-record bound, fall back to the full clipped range:
  // replacing one record can move a clipped distance by at most the clip.
  return declared_sensitivity_.value_or(clip_);
}

double DistanceSpec::upper_bound() const {
  return is_mmd_ ? 2.0 * std::sqrt(kernel_.bound) : clip_;
}

double DistanceSpec::evaluate(const Dataset& observed,
                              const Dataset& pseudo) const {
  if (is_mmd_) {
    return std::sqrt(mmd_squared(observed, pseudo, kernel_));
  }
  return weighted_l2_distance(observed, pseudo, summary_, weights_, clip_);
}

DistanceEvaluator::DistanceEvaluator(const DistanceSpec& spec,
                                     const Dataset& observed)
    : spec_(spec), observed_size_(observed.size()), observed_(observed) {
  if (observed.empty()) {
    throw std::invalid_argument("DistanceEvaluator: observed data is empty");
  }
  if (spec_.is_mmd()) {
    observed_self_sum_ = kernel_self_sum(observed_, spec_.kernel());
  } else {
    observed_summary_ = spec_.summary().map(observed_);
    if (observed_summary_.size() != spec_.weights().size()) {
      throw std::invalid_argument(
          "DistanceEvaluator: observed summary length does not match weights");
    }
  }
}

double DistanceEvaluator::operator()(const Dataset& pseudo) const {
  if (spec_.is_mmd()) {
    if (pseudo.empty()) {
      throw std::invalid_argument("DistanceEvaluator: pseudo data is empty");
    }
    if (pseudo.dim() != observed_.dim()) {
      throw std::invalid_argument("DistanceEvaluator: dimension mismatch");
    }
    double syy = kernel_self_sum(pseudo, spec_.kernel());
    double sxy = kernel_cross_sum(observed_, pseudo, spec_.kernel());
    double dm = static_cast<double>(observed_.size());
    double dn = static_cast<double>(pseudo.size());
    double v = observed_self_sum_ / (dm * dm) + syy / (dn * dn) -
               2.0 * sxy / (dm * dn);
    return std::sqrt(std::max(v, 0.0));
  }
  std::vector<double> sy = spec_.summary().map(pseudo);
  if (sy.size() != spec_.weights().size()) {
    throw std::invalid_argument(
        "DistanceEvaluator: summary length does not match weights");
  }
  double sq = 0.0;
  auto w = spec_.weights();
  for (std::size_t j = 0; j < w.size(); ++j) {
    double d = observed_summary_[j] - sy[j];
    sq += w[j] * d * d;
  }
  return std::min(std::sqrt(sq), spec_.clip());
}

}  // namespace abcdp
