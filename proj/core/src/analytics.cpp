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

#include "abcdp/analytics.hpp"

#include <cmath>
#include <stdexcept>

#include "abcdp/engine.hpp"

namespace abcdp {

double flip_probability(double rho, double epsilon_abc,
                        const LaplaceScale& scale) {
  if (scale.is_noiseless()) return 0.0;
  return NoiseDiffDistribution(scale).tail(std::fabs(rho - epsilon_abc));
}

FlipProfile FlipProfile::make(std::vector<double> rho, double epsilon_abc,
                              const LaplaceScale& scale) {
  FlipProfile profile;
  profile.epsilon_abc = epsilon_abc;
  profile.noise_scale = scale;
  profile.flip_probs.reserve(rho.size());
  for (double r : rho) {
    profile.flip_probs.push_back(flip_probability(r, epsilon_abc, scale));
  }
  profile.rho_values = std::move(rho);
  return profile;
}

PosteriorFunctional identity_functional(
    std::span<const std::vector<double>> thetas) {
  PosteriorFunctional fn;
  fn.name = "identity";
  fn.map = [](std::span<const double> theta) {
    return std::vector<double>(theta.begin(), theta.end());
  };
  double sup = 0.0;
  for (const auto& theta : thetas) {
    double sq = 0.0;
    for (double v : theta) sq += v * v;
    sup = std::max(sup, sq);
  }
  fn.sup_norm = std::sqrt(sup);
  return fn;
}

double expected_error_bound(const FlipProfile& profile,
                            const PosteriorFunctional& functional,
                            std::size_t c_prime) {
  if (c_prime == 0) {
    throw std::invalid_argument(
        "expected_error_bound: undefined for zero plain-run acceptances");
  }
  double sum = 0.0;
  for (double p : profile.flip_probs) sum += p;
  return 2.0 * functional.sup_norm / static_cast<double>(c_prime) * sum;
}

namespace {

double tail_exp_sum_of(const FlipProfile& profile) {
  if (profile.noise_scale.is_noiseless()) return 0.0;
  double two_b = 2.0 * profile.noise_scale.value();
  double sum = 0.0;
  for (double r : profile.rho_values) {
    sum += std::exp(-std::fabs(r - profile.epsilon_abc) / two_b);
  }
  return sum;
}

double tail_bound_from(double sup_norm, double tail_exp_sum,
                       std::size_t c_prime, double a) {
  if (c_prime == 0) {
    throw std::invalid_argument(
        "tail_error_bound: undefined for zero plain-run acceptances");
  }
  if (!(a > 0.0)) {
    throw std::invalid_argument("tail_error_bound: a must be > 0");
  }
  double bound = 1.0 - 4.0 * sup_norm * tail_exp_sum /
                           (3.0 * a * static_cast<double>(c_prime));
  return std::max(bound, 0.0);
}

}  // namespace

double tail_error_bound(const FlipProfile& profile,
                        const PosteriorFunctional& functional,
                        std::size_t c_prime, double a) {
  return tail_bound_from(functional.sup_norm, tail_exp_sum_of(profile),
                         c_prime, a);
}

double ErrorBoundReport::tail_bound(double a) const {
  return tail_bound_from(sup_norm, tail_exp_sum, c_prime, a);
}

ErrorBoundReport make_error_bound_report(const FlipProfile& profile,
                                         const PosteriorFunctional& functional,
                                         std::size_t c, std::size_t c_prime,
                                         double realized_error) {
  ErrorBoundReport report;
  report.expected_bound = expected_error_bound(profile, functional, c_prime);
  report.realized_error = realized_error;
  report.c = c;
  report.c_prime = c_prime;
  report.sup_norm = functional.sup_norm;
  report.tail_exp_sum = tail_exp_sum_of(profile);
  return report;
}

std::vector<FlipGridRow> flip_profile_grid(
    std::span<const double> rho_samples, double epsilon_abc,
    std::span<const std::size_t> observed_sizes,
    std::span<const std::size_t> quotas,
    std::span<const double> epsilon_totals, bool resample,
    double kernel_bound) {
  if (rho_samples.empty() || observed_sizes.empty() || quotas.empty() ||
      epsilon_totals.empty()) {
    throw std::invalid_argument("flip_profile_grid: empty grid axis");
  }
  if (!(kernel_bound > 0.0)) {
    throw std::invalid_argument("flip_profile_grid: kernel bound must be > 0");
  }
  std::vector<FlipGridRow> rows;
  rows.reserve(observed_sizes.size() * quotas.size() * epsilon_totals.size());
  for (std::size_t n : observed_sizes) {
    if (n == 0) {
      throw std::invalid_argument("flip_profile_grid: observed size must be >= 1");
    }
    double delta_rho = 2.0 * std::sqrt(kernel_bound) / static_cast<double>(n);
    for (std::size_t c : quotas) {
      for (double eps : epsilon_totals) {
        LaplaceScale b = noise_scale_from_budget(eps, c, resample, delta_rho);
        double sum = 0.0;
        for (double r : rho_samples) {
          sum += flip_probability(r, epsilon_abc, b);
        }
        rows.push_back(
            {n, c, eps, sum / static_cast<double>(rho_samples.size())});
      }
    }
  }
  return rows;
}

}  // namespace abcdp
