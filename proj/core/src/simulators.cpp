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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

namespace abcdp {

std::size_t PriorSpec::dimension() const {
  std::size_t dim = 0;
  for (const auto& comp : components) {
    if (const auto* d = std::get_if<DirichletComponent>(&comp.dist)) {
      dim += d->alpha.size();
    } else {
      dim += 1;
    }
  }
  return dim;
}

std::vector<std::string> PriorSpec::parameter_names() const {
  std::vector<std::string> names;
  for (const auto& comp : components) {
    if (const auto* d = std::get_if<DirichletComponent>(&comp.dist)) {
      for (std::size_t i = 0; i < d->alpha.size(); ++i) {
        names.push_back(comp.name + "[" + std::to_string(i) + "]");
      }
    } else {
      names.push_back(comp.name);
    }
  }
  return names;
}

void validate_prior(const PriorSpec& spec) {
  if (spec.components.empty()) {
    throw std::invalid_argument("prior: no components");
  }
  std::vector<std::string> scalar_names;
  std::vector<std::string> all_names;
  auto check_refs = [&scalar_names](const Expression& e,
                                    const std::string& where) {
    for (const auto& id : e.identifiers()) {
      if (std::find(scalar_names.begin(), scalar_names.end(), id) ==
          scalar_names.end()) {
        throw std::invalid_argument("prior: " + where + " references '" + id +
                                    "', which is not an earlier scalar "
                                    "component");
      }
    }
  };
  for (const auto& comp : spec.components) {
    if (comp.name.empty()) {
      throw std::invalid_argument("prior: component with empty name");
    }
    if (std::find(all_names.begin(), all_names.end(), comp.name) !=
        all_names.end()) {
      throw std::invalid_argument("prior: duplicate component name '" +
                                  comp.name + "'");
    }
    all_names.push_back(comp.name);
    if (const auto* d = std::get_if<DirichletComponent>(&comp.dist)) {
      if (d->alpha.empty()) {
        throw std::invalid_argument("prior: component '" + comp.name +
                                    "' has an empty concentration vector");
      }
      for (double a : d->alpha) {
        if (!(a > 0.0)) {
          throw std::invalid_argument("prior: component '" + comp.name +
                                      "' has non-positive concentration");
        }
      }
    } else if (const auto* nc = std::get_if<NormalComponent>(&comp.dist)) {
      if (!(nc->stddev > 0.0)) {
        throw std::invalid_argument("prior: component '" + comp.name +
                                    "' has non-positive stddev");
      }
      scalar_names.push_back(comp.name);
    } else if (const auto* u = std::get_if<UniformComponent>(&comp.dist)) {
      check_refs(u->lo, "lower bound of '" + comp.name + "'");
      check_refs(u->hi, "upper bound of '" + comp.name + "'");
      scalar_names.push_back(comp.name);
    } else if (const auto* dv = std::get_if<DerivedComponent>(&comp.dist)) {
      check_refs(dv->value, "derived component '" + comp.name + "'");
      scalar_names.push_back(comp.name);
    }
  }
}

PriorDraw sample_prior(const PriorSpec& spec, Rng& rng,
                       std::size_t max_redraws) {
  PriorDraw draw;
  for (std::size_t attempt = 0; attempt <= max_redraws; ++attempt) {
    std::vector<double> theta;
    std::unordered_map<std::string, double> scalars;
    auto lookup = [&scalars](std::string_view name) {
      auto it = scalars.find(std::string(name));
      if (it == scalars.end()) {
        throw std::invalid_argument(
            "prior: expression references unknown or non-scalar component '" +
            std::string(name) + "'");
      }
      return it->second;
    };
    bool inverted = false;
    for (const auto& comp : spec.components) {
      if (const auto* d = std::get_if<DirichletComponent>(&comp.dist)) {
        auto block = rng.dirichlet(d->alpha);
        theta.insert(theta.end(), block.begin(), block.end());
      } else if (const auto* nc = std::get_if<NormalComponent>(&comp.dist)) {
        double v = rng.normal(nc->mean, nc->stddev);
        scalars[comp.name] = v;
        theta.push_back(v);
      } else if (const auto* u = std::get_if<UniformComponent>(&comp.dist)) {
        double lo = u->lo.eval(lookup);
        double hi = u->hi.eval(lookup);
        if (!(lo < hi)) {
          inverted = true;
          break;
        }
        double v = rng.uniform(lo, hi);
        scalars[comp.name] = v;
        theta.push_back(v);
      } else if (const auto* dv = std::get_if<DerivedComponent>(&comp.dist)) {
        double v = dv->value.eval(lookup);
        scalars[comp.name] = v;
        theta.push_back(v);
      }
    }
    if (!inverted) {
      draw.theta = std::move(theta);
      return draw;
    }
    ++draw.redraws;
  }
  throw std::runtime_error(
      "sample_prior: bounds still inverted after maximum redraws; the prior "
      "is unsatisfiable");
}

Dataset simulate_uniform_mixture(std::span<const double> theta, std::size_t n,
                                 Rng& rng) {
  if (theta.empty()) {
    throw std::invalid_argument("uniform mixture: empty weight vector");
  }
  double total = 0.0;
  for (double w : theta) {
    if (w < -1e-9) {
      throw std::invalid_argument("uniform mixture: negative component weight");
    }
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    throw std::invalid_argument(
        "uniform mixture: weights must sum to 1 within 1e-9");
  }
  std::vector<double> clamped(theta.begin(), theta.end());
  for (double& w : clamped) w = std::max(w, 0.0);
  std::vector<double> values;
  values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t comp = rng.categorical(clamped);
    values.push_back(rng.uniform(static_cast<double>(comp),
                                 static_cast<double>(comp) + 1.0));
  }
  return Dataset::scalars(std::move(values));
}

Dataset simulate_polynomial_outbreak(std::span<const double> theta,
                                     std::span<const double> t_grid) {
  if (theta.size() != 4) {
    throw std::invalid_argument(
        "polynomial outbreak: expected 4 coefficients (a0, a1, a2, a3)");
  }
  if (t_grid.empty()) {
    throw std::invalid_argument("polynomial outbreak: empty time grid");
  }
  std::vector<double> values;
  values.reserve(t_grid.size());
  for (double t : t_grid) {
    values.push_back(theta[3] + theta[2] * t + theta[1] * t * t +
                     theta[0] * t * t * t);
  }
  return Dataset::scalars(std::move(values));
}

BirthDeathResult simulate_birth_death(std::span<const double> theta,
                                      std::size_t n,
                                      const BirthDeathParams& params,
                                      Rng& rng) {
  if (theta.size() != 4) {
    throw std::invalid_argument(
        "birth-death: expected parameters (beta, R1, t1, R2)");
  }
  double beta = theta[0], r1 = theta[1], t1 = theta[2], r2 = theta[3];
  if (!(beta > 0.0) || !(r1 > 0.0) || !(t1 > 0.0) || r2 < 0.0) {
    throw std::invalid_argument(
        "birth-death: beta, R1, t1 must be > 0 and R2 >= 0");
  }
  if (n == 0) {
    throw std::invalid_argument("birth-death: requested case count must be >= 1");
  }

  std::vector<double> cluster_sizes;
  std::vector<std::size_t> active;  // cluster index per active case
  std::size_t observed = 0;
  std::size_t events = 0;
  double now = 0.0;
  bool truncated = false;

  auto new_case = [&](std::size_t cluster) {
    cluster_sizes[cluster] += 1.0;
    active.push_back(cluster);
    ++observed;
  };

  // Seed nothing: the first event is necessarily an importation.
  while (observed < n) {
    if (++events > params.event_cap) {
      truncated = true;
      break;
    }
    double r = (now < t1) ? r1 : r2;
    double n_active = static_cast<double>(active.size());
    double rate_import = beta;
    double rate_transmit = n_active * r;
    double rate_remove = n_active;
    double total_rate = rate_import + rate_transmit + rate_remove;
    double dt = rng.exponential(total_rate);
    if (now < t1 && now + dt > t1) {
      // The per-case rate changes at t1; advance to the boundary and redraw
      // (exact for exponential waiting times).
      now = t1;
      continue;
    }
    now += dt;
    double pick[] = {rate_import, rate_transmit, rate_remove};
    switch (rng.categorical(pick)) {
      case 0:
        cluster_sizes.push_back(0.0);
        new_case(cluster_sizes.size() - 1);
        break;
      case 1: {
        std::size_t i = static_cast<std::size_t>(rng.uniform_unit() * n_active);
        if (i >= active.size()) i = active.size() - 1;
        new_case(active[i]);
        break;
      }
      default: {
        std::size_t i = static_cast<std::size_t>(rng.uniform_unit() * n_active);
        if (i >= active.size()) i = active.size() - 1;
        active[i] = active.back();
        active.pop_back();
        break;
      }
    }
  }
  // Pad to the contract size if the event cap cut the run short.
  while (observed < n) {
    cluster_sizes.push_back(1.0);
    ++observed;
  }
  BirthDeathResult result;
  result.cluster_sizes = Dataset::scalars(std::move(cluster_sizes));
  result.truncated = truncated;
  return result;
}

std::string to_string(SimulatorKind kind) {
  switch (kind) {
    case SimulatorKind::uniform_mixture:
      return "uniform_mixture";
    case SimulatorKind::polynomial_outbreak:
      return "polynomial_outbreak";
    case SimulatorKind::birth_death:
      return "birth_death";
  }
  throw std::logic_error("unknown simulator kind");
}

void validate_simulator(const SimulatorSpec& spec) {
  validate_prior(spec.prior);
  if (spec.n_pseudo == 0) {
    throw std::invalid_argument("simulator: n_pseudo must be >= 1");
  }
  if (spec.kind == SimulatorKind::polynomial_outbreak) {
    if (spec.t_grid.size() != spec.n_pseudo) {
      throw std::invalid_argument(
          "simulator: polynomial time grid length must equal n_pseudo");
    }
    if (spec.prior.dimension() != 4) {
      throw std::invalid_argument(
          "simulator: polynomial outbreak needs a 4-parameter prior");
    }
  }
  if (spec.kind == SimulatorKind::birth_death &&
      spec.prior.dimension() != 4) {
    throw std::invalid_argument(
        "simulator: birth-death needs a 4-parameter prior (beta, R1, t1, R2)");
  }
}

Dataset simulate(const SimulatorSpec& spec, std::span<const double> theta,
                 std::size_t n, Rng& rng) {
  switch (spec.kind) {
    case SimulatorKind::uniform_mixture:
      return simulate_uniform_mixture(theta, n, rng);
    case SimulatorKind::polynomial_outbreak:
      return simulate_polynomial_outbreak(theta, spec.t_grid);
    case SimulatorKind::birth_death:
      return simulate_birth_death(theta, n, spec.birth_death, rng)
          .cluster_sizes;
  }
  throw std::logic_error("unknown simulator kind");
}

std::vector<ProposalRecord> build_proposals(const SimulatorSpec& spec,
                                            std::size_t count,
                                            std::uint64_t master_seed) {
  if (count == 0) {
    throw std::invalid_argument("build_proposals: count must be >= 1");
  }
  std::vector<ProposalRecord> records(count);
  for (std::size_t t = 0; t < count; ++t) {
    Rng rng = Rng::for_stream(master_seed, "proposal", t + 1);
    ProposalRecord& rec = records[t];
    rec.index = t + 1;
    rec.theta = sample_prior(spec.prior, rng).theta;
    rec.pseudo_data = simulate(spec, rec.theta, spec.n_pseudo, rng);
  }
  return records;
}

GroundTruth make_ground_truth(const SimulatorSpec& spec,
                              std::vector<double> theta_star,
                              std::size_t observed_size,
                              std::uint64_t master_seed) {
  if (theta_star.size() != spec.prior.dimension()) {
    throw std::invalid_argument(
        "make_ground_truth: theta_star width does not match the prior");
  }
  Rng rng = Rng::for_stream(master_seed, "observed");
  GroundTruth truth;
  truth.observed = simulate(spec, theta_star, observed_size, rng);
  truth.theta_star = std::move(theta_star);
  return truth;
}

namespace {

std::string record_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "pseudo_%06zu.csv", index);
  return buf;
}

}  // namespace

void save_proposals(std::span<const ProposalRecord> proposals,
                    const std::filesystem::path& dir) {
  if (proposals.empty()) {
    throw std::invalid_argument("save_proposals: empty proposal sequence");
  }
  std::filesystem::create_directories(dir);
  std::size_t theta_dim = proposals.front().theta.size();
  std::size_t data_dim = proposals.front().pseudo_data.dim();
  std::vector<std::string> index_columns{"t"};
  for (std::size_t j = 0; j < theta_dim; ++j) {
    index_columns.push_back("theta_" + std::to_string(j));
  }
  index_columns.push_back("data_file");

  std::vector<std::string> data_columns;
  for (std::size_t j = 0; j < data_dim; ++j) {
    data_columns.push_back("c" + std::to_string(j));
  }

  std::ofstream out(dir / "index.csv", std::ios::binary);
  if (!out) {
    throw std::runtime_error("save_proposals: cannot open index file");
  }
  for (std::size_t j = 0; j < index_columns.size(); ++j) {
    if (j) out << ',';
    out << index_columns[j];
  }
  out << '\n';
  for (const auto& rec : proposals) {
    if (rec.theta.size() != theta_dim) {
      throw std::invalid_argument("save_proposals: ragged theta widths");
    }
    std::string file = record_file_name(rec.index);
    out << rec.index;
    for (double v : rec.theta) out << ',' << format_double(v);
    out << ',' << file << '\n';
    save_csv(rec.pseudo_data, dir / file, data_columns);
  }
}

std::vector<ProposalRecord> load_proposals(const std::filesystem::path& dir) {
  std::ifstream in(dir / "index.csv");
  if (!in) {
    throw std::invalid_argument("load_proposals: cannot open " +
                                (dir / "index.csv").string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("load_proposals: empty index file");
  }
  std::size_t columns = 1;
  for (char ch : line) {
    if (ch == ',') ++columns;
  }
  if (columns < 3) {
    throw std::invalid_argument("load_proposals: malformed index header");
  }
  std::size_t theta_dim = columns - 2;
  std::vector<ProposalRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        fields.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur.push_back(ch);
      }
    }
    fields.push_back(cur);
    if (fields.size() != columns) {
      throw std::invalid_argument("load_proposals: malformed index row");
    }
    ProposalRecord rec;
    rec.index = static_cast<std::size_t>(std::stoull(fields[0]));
    for (std::size_t j = 0; j < theta_dim; ++j) {
      rec.theta.push_back(std::strtod(fields[1 + j].c_str(), nullptr));
    }
    rec.pseudo_data = load_csv(dir / fields.back());
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace abcdp
