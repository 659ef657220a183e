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
#include <limits>
#include <stdexcept>

#include "abcdp/rng.hpp"
#include "doctest.h"

namespace {

using abcdp::LaplaceScale;
using abcdp::NoiseDiffDistribution;
using abcdp::Rng;
using abcdp::sample_laplace;

TEST_CASE("laplace scale rejects invalid values") {
  CHECK_THROWS_AS(LaplaceScale(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(LaplaceScale(std::numeric_limits<double>::infinity()),
                  std::invalid_argument);
  CHECK_THROWS_AS(LaplaceScale(std::nan("")), std::invalid_argument);
  CHECK(LaplaceScale(0.5).value() == 0.5);
  CHECK_FALSE(LaplaceScale(0.5).is_noiseless());
  CHECK(LaplaceScale(0.0).is_noiseless());
}

TEST_CASE("zero scale returns zero without touching the generator") {
  Rng sampled = Rng::for_stream(42, "noise", 7);
  Rng untouched = Rng::for_stream(42, "noise", 7);
  LaplaceScale zero(0.0);
  for (int i = 0; i < 5; ++i) CHECK(sample_laplace(zero, sampled) == 0.0);
  CHECK(sampled.next_u64() == untouched.next_u64());
}

TEST_CASE("scalar overload matches the typed one") {
  Rng a = Rng::for_stream(9, "noise", 0);
  Rng b = Rng::for_stream(9, "noise", 0);
  LaplaceScale scale(0.7);
  for (int i = 0; i < 20; ++i) {
    CHECK(sample_laplace(scale, a) == sample_laplace(0.7, b));
  }
  CHECK_THROWS_AS(sample_laplace(-0.1, a), std::invalid_argument);
}

TEST_CASE("sampling is deterministic per stream") {
  Rng a = Rng::for_stream(123, "noise", 4);
  Rng b = Rng::for_stream(123, "noise", 4);
  Rng c = Rng::for_stream(123, "noise", 5);
  LaplaceScale scale(1.3);
  bool diverged = false;
  for (int i = 0; i < 10; ++i) {
    double da = sample_laplace(scale, a);
    CHECK(da == sample_laplace(scale, b));
    if (da != sample_laplace(scale, c)) diverged = true;
  }
  CHECK(diverged);
}

// Reference values below are frozen from an independent numerical
// convolution of the Lap(b) and Lap(2b) densities (composite Simpson on the
// convolution integral, agreeing with the closed form to 1e-11).
TEST_CASE("difference density matches the convolution reference") {
  NoiseDiffDistribution d(LaplaceScale(0.5));
  CHECK(d.pdf(0.5) == doctest::Approx(0.28172729275127484).epsilon(1e-9));
  CHECK(d.pdf(-0.5) == d.pdf(0.5));
  CHECK(d.pdf(0.0) > d.pdf(0.1));
}

TEST_CASE("difference tail and cdf match the quadrature reference") {
  NoiseDiffDistribution d(LaplaceScale(0.4));
  CHECK(d.tail(0.1) == doctest::Approx(0.45853113787782945).epsilon(1e-9));
  CHECK(d.cdf(0.1) == doctest::Approx(0.5414688621221706).epsilon(1e-9));
  CHECK(d.cdf(-0.1) == doctest::Approx(0.45853113787782945).epsilon(1e-9));
  CHECK(d.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d.tail(0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d.cdf(0.1) + d.tail(0.1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(d.tail(-0.1), std::invalid_argument);
}

TEST_CASE("difference density integrates to one") {
  for (double b : {0.01, 0.1, 1.0, 10.0}) {
    NoiseDiffDistribution d{LaplaceScale(b)};
    const double half_width = 60.0 * b;
    const int intervals = 40000;  // even, composite Simpson
    const double h = 2.0 * half_width / intervals;
    double sum = d.pdf(-half_width) + d.pdf(half_width);
    for (int i = 1; i < intervals; ++i) {
      double x = -half_width + i * h;
      sum += d.pdf(x) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    double integral = sum * h / 3.0;
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("difference tail grows with the scale") {
  double prev = 0.0;
  for (double b : {0.1, 0.2, 0.4, 0.8, 1.6}) {
    double t = NoiseDiffDistribution(LaplaceScale(b)).tail(0.1);
    CHECK(t > prev);
    prev = t;
  }
  CHECK(prev < 0.5);
}

TEST_CASE("laplace draws match their distribution") {
  Rng rng = Rng::for_stream(2024, "noise", 0);
  LaplaceScale scale(0.4);
  const int n = 200000;
  double mean = 0.0;
  int above = 0;
  for (int i = 0; i < n; ++i) {
    double x = sample_laplace(scale, rng);
    mean += x;
    if (x > 0.4) ++above;
  }
  mean /= n;
  // P[X > 0.4] = exp(-1) / 2 for Lap(0.4); tolerances are ~4 sigma.
  CHECK(std::abs(mean) < 0.006);
  CHECK(std::abs(static_cast<double>(above) / n - 0.18393972058572117) <
        0.005);
}

}  // namespace
