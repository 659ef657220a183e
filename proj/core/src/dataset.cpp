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

#include "abcdp/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace abcdp {

Dataset::Dataset(std::size_t n, std::size_t dim) : values_(n * dim, 0.0), dim_(dim) {
  if (dim == 0) throw std::invalid_argument("Dataset: dimension must be > 0");
}

Dataset Dataset::from_flat(std::vector<double> values, std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("Dataset: dimension must be > 0");
  if (values.size() % dim != 0) {
    throw std::invalid_argument("Dataset: buffer size is not a multiple of dim");
  }
  Dataset d;
  d.values_ = std::move(values);
  d.dim_ = dim;
  return d;
}

Dataset Dataset::scalars(std::vector<double> values) {
  return from_flat(std::move(values), 1);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("load_csv: cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("load_csv: missing header row in " + path.string());
  }
  std::size_t dim = split_fields(line).size();
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != dim) {
      throw std::invalid_argument("load_csv: row " + std::to_string(lineno) +
                                  " has " + std::to_string(fields.size()) +
                                  " fields, expected " + std::to_string(dim));
    }
    for (const auto& f : fields) {
      const char* begin = f.c_str();
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin || *end != '\0') {
        throw std::invalid_argument("load_csv: non-numeric field '" + f +
                                    "' at row " + std::to_string(lineno));
      }
      values.push_back(v);
    }
  }
  return Dataset::from_flat(std::move(values), dim);
}

void save_csv(const Dataset& data, const std::filesystem::path& path,
              std::span<const std::string> columns) {
  if (columns.size() != data.dim()) {
    throw std::invalid_argument("save_csv: header width does not match dataset dim");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("save_csv: cannot open " + path.string());
  }
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (j) out << ',';
    out << columns[j];
  }
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data.dim(); ++j) {
      if (j) out << ',';
      out << format_double(data.at(i, j));
    }
    out << '\n';
  }
}

std::string format_double(double x) {
  char buf[64];
  // Integers in the exactly-representable range print without an exponent.
  if (std::isfinite(x) && x == std::floor(x) && std::fabs(x) < 1e15) {
    std::snprintf(buf, sizeof(buf), "%.0f", x);
    return buf;
  }
  // Try increasing precision until the text round-trips to the same bits.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

}  // namespace abcdp
