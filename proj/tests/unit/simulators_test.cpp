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

#include "abcdp/simulators.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "abcdp/dataset.hpp"
#include "abcdp/expression.hpp"
#include "abcdp/rng.hpp"
#include "doctest.h"

namespace {

using abcdp::Dataset;
using abcdp::Expression;
using abcdp::PriorComponent;
using abcdp::PriorSpec;
using abcdp::Rng;

double eval_with(const Expression& e,
                 const std::vector<std::pair<std::string, double>>& vars) {
  return e.eval([&](std::string_view name) {
    for (const auto& [key, value] : vars) {
      if (key == name) return value;
    }
    throw std::out_of_range("unknown identifier: " + std::string(name));
  });
}

TEST_CASE("expressions parse with the usual precedence") {
  CHECK(eval_with(Expression::parse("2 + 3 * 4"), {}) == 14.0);
  CHECK(eval_with(Expression::parse("(2 + 3) * 4"), {}) == 20.0);
  CHECK(eval_with(Expression::parse("-2 + 3"), {}) == 1.0);
  CHECK(eval_with(Expression::parse("8 / 2 / 2"), {}) == 2.0);
  CHECK(eval_with(Expression::parse("1 - 2 - 3"), {}) == -4.0);
  CHECK(Expression::parse("3.5").is_constant());
  CHECK(Expression::constant(2.5).is_constant());
  CHECK(eval_with(Expression::constant(2.5), {}) == 2.5);
}

TEST_CASE("expressions resolve identifiers through the lookup") {
  Expression upper = Expression::parse("(1 - 0.05 * R1) / 0.95");
  CHECK_FALSE(upper.is_constant());
  CHECK(upper.identifiers() == std::vector<std::string>{"R1"});
  CHECK(eval_with(upper, {{"R1", 19.0}}) ==
        doctest::Approx(0.052631578947368356).epsilon(1e-12));
  CHECK(eval_with(upper, {{"R1", 1.0}}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(eval_with(upper, {}), std::out_of_range);
}

PriorSpec outbreak_prior() {
  PriorSpec prior;
  PriorComponent beta;
  beta.name = "beta";
  beta.dist = abcdp::NormalComponent{200.0, 30.0};
  PriorComponent r1;
  r1.name = "R1";
  r1.dist = abcdp::UniformComponent{Expression::constant(1.01),
                                    Expression::constant(20.0)};
  PriorComponent t1;
  t1.name = "t1";
  t1.dist = abcdp::UniformComponent{Expression::constant(0.01),
                                    Expression::constant(30.0)};
  PriorComponent r2;
  r2.name = "R2";
  r2.dist = abcdp::UniformComponent{
      Expression::constant(0.01), Expression::parse("(1 - 0.05 * R1) / 0.95")};
  prior.components = {beta, r1, t1, r2};
  return prior;
}

TEST_CASE("prior draws respect dependent bounds") {
  PriorSpec prior = outbreak_prior();
  abcdp::validate_prior(prior);
  CHECK(prior.dimension() == 4);
  CHECK(prior.parameter_names() ==
        std::vector<std::string>{"beta", "R1", "t1", "R2"});

  Rng rng = Rng::for_stream(11, "prior", 0);
  for (int i = 0; i < 200; ++i) {
    auto draw = abcdp::sample_prior(prior, rng);
    REQUIRE(draw.theta.size() == 4);
    CHECK(draw.theta[1] >= 1.01);
    CHECK(draw.theta[1] <= 20.0);
    CHECK(draw.theta[2] >= 0.01);
    CHECK(draw.theta[2] <= 30.0);
    CHECK(draw.theta[3] >= 0.01);
    CHECK(draw.theta[3] <= (1.0 - 0.05 * draw.theta[1]) / 0.95 + 1e-12);
  }
}

TEST_CASE("normal components track their parameters") {
  PriorSpec prior;
  PriorComponent c;
  c.name = "x";
  c.dist = abcdp::NormalComponent{5.0, 2.0};
  prior.components.push_back(c);
  Rng rng = Rng::for_stream(3, "prior", 1);
  double mean = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double v = abcdp::sample_prior(prior, rng).theta[0];
    mean += v;
    sq += v * v;
  }
  mean /= n;
  double stddev = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(mean - 5.0) < 0.06);   // ~4 sigma of the sample mean
  CHECK(std::abs(stddev - 2.0) < 0.06);
}

TEST_CASE("dirichlet components land on the simplex") {
  PriorSpec prior;
  PriorComponent c;
  c.name = "theta";
  c.dist = abcdp::DirichletComponent{{1.0, 2.0, 0.5}};
  prior.components.push_back(c);
  CHECK(prior.dimension() == 3);
  Rng rng = Rng::for_stream(3, "prior", 2);
  for (int i = 0; i < 100; ++i) {
    auto draw = abcdp::sample_prior(prior, rng);
    double sum = 0.0;
    for (double v : draw.theta) {
      CHECK(v > 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("prior validation names the offending component") {
  PriorSpec dup;
  PriorComponent a;
  a.name = "x";
  a.dist = abcdp::NormalComponent{0.0, 1.0};
  dup.components = {a, a};
  CHECK_THROWS_AS(abcdp::validate_prior(dup), std::invalid_argument);

  PriorSpec bad_spread;
  PriorComponent b;
  b.name = "x";
  b.dist = abcdp::NormalComponent{0.0, 0.0};
  bad_spread.components = {b};
  CHECK_THROWS_AS(abcdp::validate_prior(bad_spread), std::invalid_argument);

  PriorSpec forward_ref;
  PriorComponent u;
  u.name = "u";
  u.dist = abcdp::UniformComponent{Expression::constant(0.0),
                                   Expression::parse("later")};
  PriorComponent later;
  later.name = "later";
  later.dist = abcdp::NormalComponent{1.0, 1.0};
  forward_ref.components = {u, later};
  CHECK_THROWS_AS(abcdp::validate_prior(forward_ref), std::invalid_argument);
}

TEST_CASE("unsatisfiable bounds exhaust the redraw allowance") {
  PriorSpec prior;
  PriorComponent u;
  u.name = "u";
  u.dist = abcdp::UniformComponent{Expression::constant(2.0),
                                   Expression::constant(1.0)};
  prior.components.push_back(u);
  Rng rng = Rng::for_stream(3, "prior", 3);
  CHECK_THROWS_AS(abcdp::sample_prior(prior, rng, 10), std::runtime_error);
}

TEST_CASE("polynomial outbreak evaluates the cubic exactly") {
  std::vector<double> t_grid{0.0, 2.0, 3.0};
  std::vector<double> ascending{0.0, 1.0, 1.0, 1.0};
  Dataset curve = abcdp::simulate_polynomial_outbreak(ascending, t_grid);
  REQUIRE(curve.size() == 3);
  CHECK(curve.at(0, 0) == 1.0);
  CHECK(curve.at(1, 0) == 7.0);   // 1 + 2 + 4
  CHECK(curve.at(2, 0) == 13.0);  // 1 + 3 + 9

  std::vector<double> cubic{1.0, 0.0, 0.0, 0.0};
  Dataset pure = abcdp::simulate_polynomial_outbreak(cubic, t_grid);
  CHECK(pure.at(1, 0) == 8.0);
  CHECK(pure.at(2, 0) == 27.0);
}

TEST_CASE("uniform mixture emits points from the chosen band") {
  Rng rng = Rng::for_stream(21, "mixture", 0);
  std::vector<double> single{1.0};
  Dataset one = abcdp::simulate_uniform_mixture(single, 500, rng);
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one.at(i, 0) >= 0.0);
    CHECK(one.at(i, 0) <= 1.0);
  }

  std::vector<double> second{0.0, 1.0};
  Dataset two = abcdp::simulate_uniform_mixture(second, 500, rng);
  for (std::size_t i = 0; i < two.size(); ++i) {
    CHECK(two.at(i, 0) >= 1.0);
    CHECK(two.at(i, 0) <= 2.0);
  }

  std::vector<double> split{0.3, 0.7};
  Dataset mixed = abcdp::simulate_uniform_mixture(split, 20000, rng);
  std::size_t low = 0;
  for (std::size_t i = 0; i < mixed.size(); ++i) {
    if (mixed.at(i, 0) <= 1.0) ++low;
  }
  CHECK(std::abs(static_cast<double>(low) / 20000.0 - 0.3) < 0.015);
}

TEST_CASE("birth death clusters partition the observed cases") {
  Rng rng = Rng::for_stream(21, "bd", 0);
  std::vector<double> theta{200.0, 3.0, 15.0, 0.45};
  abcdp::BirthDeathParams params;
  auto result = abcdp::simulate_birth_death(theta, 1000, params, rng);
  CHECK_FALSE(result.truncated);
  double total = 0.0;
  for (std::size_t i = 0; i < result.cluster_sizes.size(); ++i) {
    double size = result.cluster_sizes.at(i, 0);
    CHECK(size >= 1.0);
    CHECK(size == std::floor(size));
    total += size;
  }
  CHECK(total == 1000.0);
}

TEST_CASE("subcritical outbreaks stay near singleton clusters") {
  Rng rng = Rng::for_stream(21, "bd", 1);
  std::vector<double> theta{10.0, 0.01, 5.0, 0.01};
  abcdp::BirthDeathParams params;
  double cases = 0.0, clusters = 0.0;
  for (int i = 0; i < 5; ++i) {
    auto result = abcdp::simulate_birth_death(theta, 2000, params, rng);
    cases += 2000.0;
    clusters += static_cast<double>(result.cluster_sizes.size());
  }
  double mean_size = cases / clusters;
  CHECK(mean_size >= 1.0);
  CHECK(mean_size < 1.1);
}

TEST_CASE("event cap truncates and pads to the case count") {
  Rng rng = Rng::for_stream(21, "bd", 2);
  std::vector<double> theta{50.0, 5.0, 100.0, 0.5};
  abcdp::BirthDeathParams params;
  params.event_cap = 50;
  auto result = abcdp::simulate_birth_death(theta, 500, params, rng);
  CHECK(result.truncated);
  double total = 0.0;
  for (std::size_t i = 0; i < result.cluster_sizes.size(); ++i) {
    total += result.cluster_sizes.at(i, 0);
  }
  CHECK(total == 500.0);
}

TEST_CASE("birth death rejects out-of-range parameters") {
  Rng rng = Rng::for_stream(21, "bd", 3);
  abcdp::BirthDeathParams params;
  std::vector<double> zero_beta{0.0, 1.0, 1.0, 0.5};
  CHECK_THROWS_AS(abcdp::simulate_birth_death(zero_beta, 10, params, rng),
                  std::invalid_argument);
  std::vector<double> zero_r1{10.0, 0.0, 1.0, 0.5};
  CHECK_THROWS_AS(abcdp::simulate_birth_death(zero_r1, 10, params, rng),
                  std::invalid_argument);
  std::vector<double> negative_r2{10.0, 1.0, 1.0, -0.1};
  CHECK_THROWS_AS(abcdp::simulate_birth_death(negative_r2, 10, params, rng),
                  std::invalid_argument);
  std::vector<double> short_theta{10.0, 1.0, 1.0};
  CHECK_THROWS_AS(abcdp::simulate_birth_death(short_theta, 10, params, rng),
                  std::invalid_argument);
}

TEST_CASE("simulation is deterministic per stream") {
  std::vector<double> theta{200.0, 3.0, 15.0, 0.45};
  abcdp::BirthDeathParams params;
  Rng a = Rng::for_stream(5, "bd", 0);
  Rng b = Rng::for_stream(5, "bd", 0);
  CHECK(abcdp::simulate_birth_death(theta, 300, params, a).cluster_sizes ==
        abcdp::simulate_birth_death(theta, 300, params, b).cluster_sizes);

  std::vector<double> weights{0.5, 0.5};
  Rng c = Rng::for_stream(5, "mix", 0);
  Rng d = Rng::for_stream(5, "mix", 0);
  CHECK(abcdp::simulate_uniform_mixture(weights, 100, c) ==
        abcdp::simulate_uniform_mixture(weights, 100, d));
}

abcdp::SimulatorSpec mixture_sim() {
  abcdp::SimulatorSpec spec;
  spec.kind = abcdp::SimulatorKind::uniform_mixture;
  PriorComponent weights;
  weights.name = "theta";
  weights.dist = abcdp::DirichletComponent{{1.0, 1.0, 1.0}};
  spec.prior.components.push_back(std::move(weights));
  spec.n_pseudo = 40;
  return spec;
}

TEST_CASE("proposal records are contiguous and per-index stable") {
  abcdp::SimulatorSpec spec = mixture_sim();
  auto ten = abcdp::build_proposals(spec, 10, 12345);
  REQUIRE(ten.size() == 10);
  for (std::size_t i = 0; i < ten.size(); ++i) {
    CHECK(ten[i].index == i + 1);
    CHECK(ten[i].theta.size() == 3);
    CHECK(ten[i].pseudo_data.size() == 40);
  }

  // Shrinking the count must not change the surviving records.
  auto five = abcdp::build_proposals(spec, 5, 12345);
  REQUIRE(five.size() == 5);
  for (std::size_t i = 0; i < five.size(); ++i) {
    CHECK(five[i].theta == ten[i].theta);
    CHECK(five[i].pseudo_data == ten[i].pseudo_data);
  }
}

TEST_CASE("ground truth is reproducible") {
  abcdp::SimulatorSpec spec = mixture_sim();
  auto a = abcdp::make_ground_truth(spec, {0.2, 0.3, 0.5}, 60, 777);
  auto b = abcdp::make_ground_truth(spec, {0.2, 0.3, 0.5}, 60, 777);
  CHECK(a.theta_star == std::vector<double>{0.2, 0.3, 0.5});
  CHECK(a.observed.size() == 60);
  CHECK(a.observed == b.observed);
}

TEST_CASE("proposals survive a save and reload") {
  abcdp::SimulatorSpec spec = mixture_sim();
  auto original = abcdp::build_proposals(spec, 6, 2026);
  auto dir = std::filesystem::temp_directory_path() /
             "abcdp_proposals_roundtrip_test";
  std::filesystem::remove_all(dir);
  abcdp::save_proposals(original, dir);
  auto reloaded = abcdp::load_proposals(dir);
  REQUIRE(reloaded.size() == original.size());
  for (std::size_t i = 0; i < original.size(); ++i) {
    CHECK(reloaded[i].index == original[i].index);
    CHECK(reloaded[i].theta == original[i].theta);
    CHECK(reloaded[i].pseudo_data == original[i].pseudo_data);
  }
  std::filesystem::remove_all(dir);
}

}  // namespace
