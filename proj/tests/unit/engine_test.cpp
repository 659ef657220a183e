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
#include <vector>

#include "abcdp/distance.hpp"
#include "abcdp/rng.hpp"
#include "abcdp/simulators.hpp"
#include "doctest.h"

namespace {

using abcdp::Dataset;
using abcdp::DistanceSpec;
using abcdp::IndicatorTrace;
using abcdp::PrivacyBudget;
using abcdp::ProposalRecord;
using abcdp::Rng;
using abcdp::TraceOptions;

constexpr double kInf = std::numeric_limits<double>::infinity();

TEST_CASE("noise scale derives from the budget") {
  CHECK(abcdp::noise_scale_from_budget(1.0, 10, true, 0.02).value() ==
        doctest::Approx(0.4).epsilon(1e-15));
  CHECK(abcdp::noise_scale_from_budget(1.0, 5, false, 0.02).value() ==
        doctest::Approx(0.12).epsilon(1e-15));
  CHECK(abcdp::noise_scale_from_budget(kInf, 10, true, 0.02).is_noiseless());

  PrivacyBudget budget(1.0, 10, true, 0.02);
  CHECK(budget.noise_scale().value() == doctest::Approx(0.4).epsilon(1e-15));
  CHECK_FALSE(budget.is_non_private());
  CHECK(PrivacyBudget::non_private(5).is_non_private());
  CHECK(PrivacyBudget(kInf, 5, true, 0.02).is_non_private());
}

TEST_CASE("budget construction validates its inputs") {
  CHECK_THROWS_AS(PrivacyBudget(0.0, 10, true, 0.02), std::invalid_argument);
  CHECK_THROWS_AS(PrivacyBudget(-1.0, 10, true, 0.02), std::invalid_argument);
  CHECK_THROWS_AS(PrivacyBudget(1.0, 0, true, 0.02), std::invalid_argument);
  CHECK_THROWS_AS(PrivacyBudget(1.0, 10, true, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(PrivacyBudget(1.0, 10, true, -0.5), std::invalid_argument);
}

TEST_CASE("rejection trace applies the threshold in order") {
  std::vector<double> rho{0.5, 0.2, 0.7, 0.1};
  IndicatorTrace full = abcdp::rejection_trace(rho, 0.3, std::nullopt);
  CHECK(full.indicators == std::vector<std::uint8_t>{0, 1, 0, 1});
  CHECK(full.accepted_indices == std::vector<std::size_t>{2, 4});
  CHECK_FALSE(full.terminated_early);
  CHECK(full.accepted_count() == 2);

  IndicatorTrace stopped = abcdp::rejection_trace(rho, 0.3, 1);
  CHECK(stopped.indicators == std::vector<std::uint8_t>{0, 1});
  CHECK(stopped.accepted_indices == std::vector<std::size_t>{2});
  CHECK(stopped.terminated_early);

  CHECK_THROWS_AS(abcdp::rejection_trace(rho, 0.3, 0), std::invalid_argument);

  // A distance exactly at the threshold is accepted.
  std::vector<double> edge{0.3};
  CHECK(abcdp::rejection_trace(edge, 0.3, std::nullopt).accepted_count() == 1);
}

TEST_CASE("zero noise scale reproduces the plain trace bit for bit") {
  Rng source = Rng::for_stream(31, "rho", 0);
  std::vector<double> rho(400);
  for (double& r : rho) r = source.uniform_unit();

  for (bool resample : {true, false}) {
    PrivacyBudget budget = PrivacyBudget::non_private(7, resample);
    Rng rng = Rng::for_stream(31, "trace", 0);
    Rng pristine = Rng::for_stream(31, "trace", 0);
    IndicatorTrace noisy = abcdp::noisy_threshold_trace(rho, 0.4, budget, rng);
    IndicatorTrace plain = abcdp::rejection_trace(rho, 0.4, 7);
    CHECK(noisy.indicators == plain.indicators);
    CHECK(noisy.accepted_indices == plain.accepted_indices);
    CHECK(noisy.terminated_early == plain.terminated_early);
    CHECK(rng.next_u64() == pristine.next_u64());
  }
}

TEST_CASE("threshold noise is redrawn exactly on resampled acceptances") {
  Rng source = Rng::for_stream(8, "rho", 0);
  std::vector<double> rho(200);
  for (double& r : rho) r = source.uniform_unit();
  TraceOptions options;
  options.stop_after_quota = false;
  options.record_noise_log = true;

  PrivacyBudget resampled(1.0, 3, true, 0.05);
  Rng rng_a = Rng::for_stream(8, "trace", 1);
  IndicatorTrace trace = abcdp::noisy_threshold_trace(rho, 0.5, resampled,
                                                      rng_a, options);
  REQUIRE(trace.noise_log.size() == rho.size());
  REQUIRE(trace.indicators.size() == rho.size());
  CHECK(trace.accepted_count() > 3);  // full pass keeps accepting past quota
  for (std::size_t t = 0; t + 1 < rho.size(); ++t) {
    bool redrawn = trace.noise_log[t + 1].threshold_noise !=
                   trace.noise_log[t].threshold_noise;
    CHECK(redrawn == (trace.indicators[t] == 1));
  }

  PrivacyBudget held(1.0, 3, false, 0.05);
  Rng rng_b = Rng::for_stream(8, "trace", 2);
  IndicatorTrace fixed = abcdp::noisy_threshold_trace(rho, 0.5, held, rng_b,
                                                      options);
  REQUIRE(fixed.noise_log.size() == rho.size());
  for (const auto& draw : fixed.noise_log) {
    CHECK(draw.threshold_noise == fixed.noise_log.front().threshold_noise);
  }

  // Distance noise must be fresh every step.
  CHECK(fixed.noise_log[0].distance_noise != fixed.noise_log[1].distance_noise);

  // Logging is strictly opt-in.
  Rng rng_c = Rng::for_stream(8, "trace", 3);
  CHECK(abcdp::noisy_threshold_trace(rho, 0.5, resampled, rng_c).noise_log
            .empty());
}

TEST_CASE("noisy trace stops once the quota is filled") {
  std::vector<double> rho(1000, 0.0);  // everything is accepted
  PrivacyBudget budget(2.0, 4, true, 0.1);
  Rng rng = Rng::for_stream(17, "trace", 0);
  IndicatorTrace trace = abcdp::noisy_threshold_trace(rho, 0.5, budget, rng);
  CHECK(trace.accepted_count() == 4);
  CHECK(trace.terminated_early);
  CHECK(trace.indicators.size() < rho.size());
}

TEST_CASE("plain abc run aggregates accepted parameters") {
  std::vector<ProposalRecord> proposals;
  for (std::size_t i = 1; i <= 3; ++i) {
    ProposalRecord record;
    record.index = i;
    record.theta = {static_cast<double>(i)};
    record.pseudo_data = Dataset::scalars({static_cast<double>(i)});
    proposals.push_back(std::move(record));
  }
  Dataset observed = Dataset::scalars({2.0});
  DistanceSpec spec = DistanceSpec::make_weighted_l2(
      abcdp::raw_values_summary(1), {1.0}, 10.0);

  abcdp::AbcResult result =
      abcdp::run_rejection_abc(proposals, observed, spec, 0.5);
  CHECK(result.trace.accepted_indices == std::vector<std::size_t>{2});
  REQUIRE(result.posterior_mean.has_value());
  CHECK((*result.posterior_mean)[0] == doctest::Approx(2.0).epsilon(1e-15));
  REQUIRE(result.distances.has_value());
  CHECK(*result.distances == std::vector<double>{1.0, 0.0, 1.0});

  // Nothing within threshold: no posterior mean.
  abcdp::AbcResult empty =
      abcdp::run_rejection_abc(proposals, observed, spec, -1.0);
  CHECK_FALSE(empty.posterior_mean.has_value());
  CHECK(empty.trace.accepted_count() == 0);
}

abcdp::SimulatorSpec mixture_spec() {
  abcdp::SimulatorSpec spec;
  spec.kind = abcdp::SimulatorKind::uniform_mixture;
  abcdp::PriorComponent weights;
  weights.name = "theta";
  weights.dist = abcdp::DirichletComponent{{1.0, 1.0}};
  spec.prior.components.push_back(std::move(weights));
  spec.n_pseudo = 25;
  return spec;
}

TEST_CASE("infinite budget run coincides with the plain run") {
  abcdp::SimulatorSpec sim = mixture_spec();
  auto proposals = abcdp::build_proposals(sim, 60, 99);
  auto truth = abcdp::make_ground_truth(sim, {0.4, 0.6}, 25, 99);
  DistanceSpec spec = DistanceSpec::make_mmd(abcdp::KernelSpec::gaussian(1.0));

  PrivacyBudget budget = PrivacyBudget::non_private(5);
  Rng rng = Rng::for_stream(99, "noise", 0);
  Rng pristine = Rng::for_stream(99, "noise", 0);
  abcdp::AbcResult noisy = abcdp::run_abcdp(proposals, truth.observed, spec,
                                            0.35, budget, rng);
  abcdp::AbcResult plain =
      abcdp::run_rejection_abc(proposals, truth.observed, spec, 0.35, 5);

  CHECK(noisy.trace.indicators == plain.trace.indicators);
  CHECK(noisy.trace.accepted_indices == plain.trace.accepted_indices);
  CHECK(noisy.accepted_thetas == plain.accepted_thetas);
  CHECK(noisy.posterior_mean == plain.posterior_mean);
  CHECK(rng.next_u64() == pristine.next_u64());
}

TEST_CASE("private runs withhold realized distances") {
  abcdp::SimulatorSpec sim = mixture_spec();
  auto proposals = abcdp::build_proposals(sim, 30, 7);
  auto truth = abcdp::make_ground_truth(sim, {0.5, 0.5}, 25, 7);
  DistanceSpec spec = DistanceSpec::make_mmd(abcdp::KernelSpec::gaussian(1.0));

  PrivacyBudget budget(1.0, 3, true, spec.sensitivity(25));
  Rng rng = Rng::for_stream(7, "noise", 0);
  abcdp::AbcResult priv = abcdp::run_abcdp(proposals, truth.observed, spec,
                                           0.35, budget, rng);
  CHECK_FALSE(priv.distances.has_value());

  abcdp::RunOptions options;
  options.observed_is_synthetic = true;
  Rng rng2 = Rng::for_stream(7, "noise", 1);
  abcdp::AbcResult synthetic = abcdp::run_abcdp(
      proposals, truth.observed, spec, 0.35, budget, rng2, options);
  CHECK(synthetic.distances.has_value());
}

TEST_CASE("accountant ledger round-trips the budget") {
  PrivacyBudget budget(1.0, 10, true, 0.02);
  abcdp::AccountantLedger ledger = abcdp::accountant_report(budget, 0.02);
  CHECK(ledger.noise_scale == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(std::fabs(ledger.epsilon_rederived - 1.0) <= 1e-12);
  CHECK(ledger.composition == "linear");
  CHECK(ledger.quota == 10);
  CHECK(ledger.resample);

  PrivacyBudget free = PrivacyBudget::non_private(4);
  CHECK(abcdp::accountant_report(free, 0.02).epsilon_rederived == kInf);

  CHECK_THROWS_AS(abcdp::accountant_report(budget, 0.03), std::logic_error);
  CHECK_THROWS_AS(abcdp::accountant_report(budget, -0.02),
                  std::invalid_argument);
  CHECK_THROWS_AS(abcdp::accountant_report(budget, kInf),
                  std::invalid_argument);
}

}  // namespace
