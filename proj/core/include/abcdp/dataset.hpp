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

#ifndef ABCDP_DATASET_HPP_
#define ABCDP_DATASET_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace abcdp {

// Fixed-width numeric table: n rows of dimension d, stored row-major.
// Simulator outputs, observed data, and summary vectors all travel as
// datasets so distances only ever see one shape of input.
class Dataset {
 public:
  Dataset() : dim_(1) {}
  Dataset(std::size_t n, std::size_t dim);

  // Wraps a flat row-major buffer; size must be a multiple of dim.
  static Dataset from_flat(std::vector<double> values, std::size_t dim);

  // One-dimensional convenience constructor.
  static Dataset scalars(std::vector<double> values);

  std::size_t size() const { return dim_ == 0 ? 0 : values_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return values_.empty(); }

  double at(std::size_t i, std::size_t j) const {
    return values_[i * dim_ + j];
  }
  double& at(std::size_t i, std::size_t j) { return values_[i * dim_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<const double> flat() const { return values_; }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<double> values_;
  std::size_t dim_;
};

// Reads a headered CSV of doubles (UTF-8, LF line endings).  The header row
// is required; column count fixes the dataset dimension.
Dataset load_csv(const std::filesystem::path& path);

// Writes a headered CSV (UTF-8, LF).  `columns` must match the dataset
// dimension; values are rendered with enough digits to round-trip exactly.
void save_csv(const Dataset& data, const std::filesystem::path& path,
              std::span<const std::string> columns);

// Shortest decimal form of x that parses back to the same double.  Used for
// every numeric field the harness persists so reruns are byte-identical.
std::string format_double(double x);

}  // namespace abcdp

#endif  // ABCDP_DATASET_HPP_
