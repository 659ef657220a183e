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

#include "abcdp/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace abcdp {

LaplaceScale::LaplaceScale(double b) : b_(b) {
  if (!(b >= 0.0) || !std::isfinite(b)) {
    throw std::invalid_argument("LaplaceScale: scale must be finite and >= 0");
  }
}

double sample_laplace(const LaplaceScale& scale, Rng& rng) {
  if (scale.is_noiseless()) return 0.0;
  // u is uniform on (-1/2, 1/2), never hitting the endpoints, so the log
  // argument stays strictly positive.
  double u = rng.uniform_unit() - 0.5;
  double s = (u < 0.0) ? -1.0 : 1.0;
  return -scale.value() * s * std::log(1.0 - 2.0 * std::fabs(u));
}

double sample_laplace(double scale, Rng& rng) {
  return sample_laplace(LaplaceScale(scale), rng);
}

NoiseDiffDistribution::NoiseDiffDistribution(const LaplaceScale& scale)
    : b_(scale.value()) {
  if (scale.is_noiseless()) {
    throw std::invalid_argument(
        "NoiseDiffDistribution: degenerate at scale 0; the noiseless case has "
        "no continuous law");
  }
}

double NoiseDiffDistribution::pdf(double z) const {
  double a = std::fabs(z);
  return (2.0 * std::exp(-a / (2.0 * b_)) - std::exp(-a / b_)) / (6.0 * b_);
}

double NoiseDiffDistribution::tail(double a) const {
  if (a < 0.0) {
    throw std::invalid_argument("NoiseDiffDistribution::tail: a must be >= 0");
  }
  return (4.0 * std::exp(-a / (2.0 * b_)) - std::exp(-a / b_)) / 6.0;
}

double NoiseDiffDistribution::cdf(double a) const {
  return (a >= 0.0) ? 1.0 - tail(a) : tail(-a);
}

}  // namespace abcdp
