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

#ifndef ABCDP_SIMULATORS_HPP_
#define ABCDP_SIMULATORS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "abcdp/dataset.hpp"
#include "abcdp/engine.hpp"
#include "abcdp/expression.hpp"
#include "abcdp/rng.hpp"

namespace abcdp {

// Prior building blocks.  Components are drawn in declaration order; uniform
// bounds and derived values may reference earlier scalar components by name.
struct DirichletComponent {
  std::vector<double> alpha;

  friend bool operator==(const DirichletComponent&,
                         const DirichletComponent&) = default;
};
struct NormalComponent {
  double mean = 0.0;
  double stddev = 1.0;

  friend bool operator==(const NormalComponent&,
                         const NormalComponent&) = default;
};
struct UniformComponent {
  Expression lo;
  Expression hi;

  friend bool operator==(const UniformComponent&,
                         const UniformComponent&) = default;
};
struct DerivedComponent {
  Expression value;

  friend bool operator==(const DerivedComponent&,
                         const DerivedComponent&) = default;
};

struct PriorComponent {
  std::string name;
  std::variant<DirichletComponent, NormalComponent, UniformComponent,
               DerivedComponent>
      dist;

  friend bool operator==(const PriorComponent&,
                         const PriorComponent&) = default;
};

struct PriorSpec {
  std::vector<PriorComponent> components;

  // Total parameter-vector width (a Dirichlet block contributes its length).
  std::size_t dimension() const;

  // Expanded names, one per vector entry ("theta[0]", "R1", ...).
  std::vector<std::string> parameter_names() const;

  friend bool operator==(const PriorSpec&, const PriorSpec&) = default;
};

// Structural validation: unique non-empty names, positive Dirichlet
// concentrations, positive normal spread, expressions referencing only
// earlier scalar components.  Throws invalid_argument with the offending
// component named.
void validate_prior(const PriorSpec& spec);

struct PriorDraw {
  std::vector<double> theta;
  // Whole-vector redraws forced by an inverted uniform bound.
  std::size_t redraws = 0;
};

// One draw from the prior.  Inverted bounds (lo >= hi after evaluating the
// expressions) reject the entire draw and retry, up to `max_redraws`, after
// which a runtime error reports unsatisfiable bounds.
PriorDraw sample_prior(const PriorSpec& spec, Rng& rng,
                       std::size_t max_redraws = 1000);

// Mixture of unit-width uniform components: component i (1-based, chosen
// with probability theta[i-1]) emits a point uniform on [i-1, i].
Dataset simulate_uniform_mixture(std::span<const double> theta, std::size_t n,
                                 Rng& rng);

// Deterministic cubic count curve y(t) = a3 + a2 t + a1 t^2 + a0 t^3
// evaluated on a time grid; theta is (a0, a1, a2, a3).
Dataset simulate_polynomial_outbreak(std::span<const double> theta,
                                     std::span<const double> t_grid);

struct BirthDeathParams {
  std::size_t event_cap = 1'000'000;

  friend bool operator==(const BirthDeathParams&,
                         const BirthDeathParams&) = default;
};

struct BirthDeathResult {
  // One row per transmission cluster: the number of observed cases in it.
  Dataset cluster_sizes;
  // Event cap hit; the remaining cases were padded in as singletons so the
  // truncation contract (sizes sum to n) still holds.
  bool truncated = false;
};

// Two-phase linear birth-death outbreak, simulated event by event.  New
// cases arrive by importation at rate beta, each starting a fresh cluster;
// every active case transmits at per-case rate R1 before time t1 and R2
// after (growing its own cluster) and recovers at per-case rate 1.  The
// simulation observes every case as it appears and stops at n cases; theta
// is (beta, R1, t1, R2).
BirthDeathResult simulate_birth_death(std::span<const double> theta,
                                      std::size_t n,
                                      const BirthDeathParams& params,
                                      Rng& rng);

enum class SimulatorKind { uniform_mixture, polynomial_outbreak, birth_death };

std::string to_string(SimulatorKind kind);

struct SimulatorSpec {
  SimulatorKind kind = SimulatorKind::uniform_mixture;
  PriorSpec prior;
  std::size_t n_pseudo = 1;
  // polynomial_outbreak: evaluation grid; must have n_pseudo entries.
  std::vector<double> t_grid;
  // birth_death settings.
  BirthDeathParams birth_death;

  friend bool operator==(const SimulatorSpec&, const SimulatorSpec&) = default;
};

void validate_simulator(const SimulatorSpec& spec);

// One pseudo-dataset of n points from the configured model.
Dataset simulate(const SimulatorSpec& spec, std::span<const double> theta,
                 std::size_t n, Rng& rng);

// T (theta, pseudo-data) records with indices 1..T.  Record t draws from
// its own generator stream derived from (master_seed, "proposal", t), so
// records are reproducible individually and generation order is free.
std::vector<ProposalRecord> build_proposals(const SimulatorSpec& spec,
                                            std::size_t count,
                                            std::uint64_t master_seed);

// Synthetic ground truth: parameters plus the observed dataset generated
// from them under the stream (master_seed, "observed", 0).
struct GroundTruth {
  std::vector<double> theta_star;
  Dataset observed;
};

GroundTruth make_ground_truth(const SimulatorSpec& spec,
                              std::vector<double> theta_star,
                              std::size_t observed_size,
                              std::uint64_t master_seed);

// Persists a proposal set as an index CSV plus one data CSV per record;
// reload restores a byte-identical sequence.
void save_proposals(std::span<const ProposalRecord> proposals,
                    const std::filesystem::path& dir);
std::vector<ProposalRecord> load_proposals(const std::filesystem::path& dir);

}  // namespace abcdp

#endif  // ABCDP_SIMULATORS_HPP_
