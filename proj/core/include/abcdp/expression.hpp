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

#ifndef ABCDP_EXPRESSION_HPP_
#define ABCDP_EXPRESSION_HPP_

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace abcdp {

// Tiny arithmetic expression over named scalars: numbers, identifiers,
// + - * /, unary minus, parentheses.  Prior bounds like
// "(1 - 0.05*R1)/0.95" are expressed with it, referencing parameters drawn
// earlier in the prior.  Parsed once into postfix form; evaluation resolves
// identifiers through a caller-supplied lookup.
class Expression {
 public:
  static Expression parse(std::string_view text);
  static Expression constant(double value);

  double eval(const std::function<double(std::string_view)>& lookup) const;

  // True when no identifiers appear, so eval never consults the lookup.
  bool is_constant() const;

  // Identifiers in first-appearance order.
  std::vector<std::string> identifiers() const;

  const std::string& text() const { return text_; }

  friend bool operator==(const Expression& a, const Expression& b) {
    return a.text_ == b.text_;
  }

 private:
  enum class OpCode { push_const, push_var, add, sub, mul, div, neg };
  struct Step {
    OpCode op;
    double value = 0.0;   // push_const
    std::string name;     // push_var
  };

  std::string text_;
  std::vector<Step> steps_;

  friend class ExpressionParser;
};

}  // namespace abcdp

#endif  // ABCDP_EXPRESSION_HPP_
