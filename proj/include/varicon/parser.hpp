#pragma once

#include <string_view>

#include "varicon/expr.hpp"

namespace varicon {

// Parse expression text against a space.
//
// Grammar (highest precedence first):
//   atoms      numeric literals, parameters, field names (order-0 jet
//              coordinates), base coordinates x0..x{m-1} (`t` aliases x0
//              when m = 1), parenthesized expressions, function calls
//   functions  sin(e) cos(e) sqrt(e) abs(e) sign(e) pow(e, e)
//   derivative d(f, mu) where f is a field name or a nested d(...), mu a
//              base index; nesting depth is capped at 3
//   ^          right-associative, binds above unary minus
//   unary -
//   * /        left-associative
//   + -        left-associative
//
// Throws ParseError with a byte offset on syntax errors, unknown
// identifiers, out-of-range base indices, and d(...) applied to anything
// that is not a field.
ExprPtr parse(std::string_view src, const Space& space);

}  // namespace varicon
