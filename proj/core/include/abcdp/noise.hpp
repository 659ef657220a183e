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

#ifndef ABCDP_NOISE_HPP_
#define ABCDP_NOISE_HPP_

#include "abcdp/rng.hpp"

namespace abcdp {

// Scale parameter of a Laplace perturbation.  Zero is the explicit noiseless
// sentinel: samplers short-circuit to 0.0 without consuming generator state,
// so a noiseless run is bit-identical to one that never touches the sampler.
class LaplaceScale {
 public:
  explicit LaplaceScale(double b);

  double value() const { return b_; }
  bool is_noiseless() const { return b_ == 0.0; }

  friend bool operator==(const LaplaceScale&, const LaplaceScale&) = default;

 private:
  double b_;
};

// Draws Lap(0, scale) by inverting the CDF on a signed uniform.
double sample_laplace(const LaplaceScale& scale, Rng& rng);

// Convenience overload; rejects negative scales at the call site.
double sample_laplace(double scale, Rng& rng);

// Law of the difference Z = M - V where M ~ Lap(b) is a threshold
// perturbation and V ~ Lap(2b) is a distance perturbation.  An acceptance
// indicator flips exactly when Z crosses the gap between the distance and the
// threshold, so the tail of this law is the flip probability.
class NoiseDiffDistribution {
 public:
  explicit NoiseDiffDistribution(const LaplaceScale& scale);

  double scale() const { return b_; }

  // Density of Z at z.
  double pdf(double z) const;

  // Upper tail P[Z > a] for a >= 0 (equivalently P[Z < -a] by symmetry).
  double tail(double a) const;

  // CDF P[Z <= a] for any real a, assembled from the symmetric tail.
  double cdf(double a) const;

 private:
  double b_;
};

}  // namespace abcdp

#endif  // ABCDP_NOISE_HPP_
