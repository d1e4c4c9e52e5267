// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

#include "agentkit/common/error.hpp"

namespace agentkit::tools {

class MathError : public Error {
 public:
  using Error::Error;
};

/// Evaluates an arithmetic expression: + - * / % ^ (right-assoc), unary minus,
/// parentheses, constants pi and e, and the functions sqrt abs exp ln log
/// log10 log2 sin cos tan asin acos atan floor ceil round min max pow.
double evaluate_expression(std::string_view expr);

/// Integers print without a fraction; other values use up to 12 significant digits.
std::string format_number(double v);

}  // namespace agentkit::tools
