#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "ectfuzz/expr.hpp"

namespace ectfuzz {

class ParseError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// SMT-LIB flavoured text, e.g. `(bvsge #x00000039 (concat #x000000 k!95))`.
// print(parse(t)) == t for any text print() can produce.
std::string print(const Expr& expr);
Expr parse_expr(std::string_view text);

/// Same text with every `k!<n>` replaced by `k!*`.
std::string normalized_text(const Expr& expr);

}  // namespace ectfuzz
