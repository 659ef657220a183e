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

#include "abcdp/expression.hpp"

#include <cctype>
#include <cstdlib>
#include <stdexcept>

#include "abcdp/dataset.hpp"

namespace abcdp {

class ExpressionParser {
 public:
  ExpressionParser(std::string_view text, Expression& out)
      : text_(text), out_(out) {}

  void run() {
    parse_sum();
    skip_ws();
    if (pos_ != text_.size()) {
      fail("unexpected trailing characters");
    }
  }

 private:
  void parse_sum() {
    parse_product();
    for (;;) {
      skip_ws();
      if (consume('+')) {
        parse_product();
        emit(Expression::OpCode::add);
      } else if (consume('-')) {
        parse_product();
        emit(Expression::OpCode::sub);
      } else {
        return;
      }
    }
  }

  void parse_product() {
    parse_factor();
    for (;;) {
      skip_ws();
      if (consume('*')) {
        parse_factor();
        emit(Expression::OpCode::mul);
      } else if (consume('/')) {
        parse_factor();
        emit(Expression::OpCode::div);
      } else {
        return;
      }
    }
  }

  void parse_factor() {
    skip_ws();
    if (consume('-')) {
      parse_factor();
      emit(Expression::OpCode::neg);
      return;
    }
    if (consume('(')) {
      parse_sum();
      skip_ws();
      if (!consume(')')) fail("expected ')'");
      return;
    }
    if (pos_ < text_.size() &&
        (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
         text_[pos_] == '.')) {
      const char* begin = text_.data() + pos_;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      Expression::Step s{Expression::OpCode::push_const, v, {}};
      out_.steps_.push_back(std::move(s));
      return;
    }
    if (pos_ < text_.size() &&
        (std::isalpha(static_cast<unsigned char>(text_[pos_])) ||
         text_[pos_] == '_')) {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_')) {
        ++pos_;
      }
      Expression::Step s{Expression::OpCode::push_var, 0.0,
                         std::string(text_.substr(start, pos_ - start))};
      out_.steps_.push_back(std::move(s));
      return;
    }
    fail("expected number, identifier, or '('");
  }

  void emit(Expression::OpCode op) { out_.steps_.push_back({op, 0.0, {}}); }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool consume(char ch) {
    if (pos_ < text_.size() && text_[pos_] == ch) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) {
    throw std::invalid_argument("expression '" + std::string(text_) +
                                "': " + what + " at offset " +
                                std::to_string(pos_));
  }

  std::string_view text_;
  Expression& out_;
  std::size_t pos_ = 0;
};

Expression Expression::parse(std::string_view text) {
  Expression e;
  e.text_ = std::string(text);
  ExpressionParser(text, e).run();
  return e;
}

Expression Expression::constant(double value) {
  Expression e;
  e.text_ = format_double(value);
  e.steps_.push_back({OpCode::push_const, value, {}});
  return e;
}

double Expression::eval(
    const std::function<double(std::string_view)>& lookup) const {
  std::vector<double> stack;
  stack.reserve(steps_.size());
  auto pop = [&stack]() {
    double v = stack.back();
    stack.pop_back();
    return v;
  };
  for (const Step& s : steps_) {
    switch (s.op) {
      case OpCode::push_const:
        stack.push_back(s.value);
        break;
      case OpCode::push_var:
        stack.push_back(lookup(s.name));
        break;
      case OpCode::add: {
        double r = pop(), l = pop();
        stack.push_back(l + r);
        break;
      }
      case OpCode::sub: {
        double r = pop(), l = pop();
        stack.push_back(l - r);
        break;
      }
      case OpCode::mul: {
        double r = pop(), l = pop();
        stack.push_back(l * r);
        break;
      }
      case OpCode::div: {
        double r = pop(), l = pop();
        stack.push_back(l / r);
        break;
      }
      case OpCode::neg:
        stack.back() = -stack.back();
        break;
    }
  }
  if (stack.size() != 1) {
    throw std::logic_error("expression: corrupted evaluation stack");
  }
  return stack.front();
}

bool Expression::is_constant() const {
  for (const Step& s : steps_) {
    if (s.op == OpCode::push_var) return false;
  }
  return true;
}

std::vector<std::string> Expression::identifiers() const {
  std::vector<std::string> names;
  for (const Step& s : steps_) {
    if (s.op != OpCode::push_var) continue;
    bool seen = false;
    for (const auto& n : names) {
      if (n == s.name) {
        seen = true;
        break;
      }
    }
    if (!seen) names.push_back(s.name);
  }
  return names;
}

}  // namespace abcdp
