#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ectfuzz {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

Bytes to_bytes(std::string_view text);
std::string to_string(ByteView bytes);

enum class CmpOp { EQ, NE, SLT, SLE, SGT, SGE, ULT, ULE, UGT, UGE };

class ExprError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

class IndexOutOfRange : public std::out_of_range {
 public:
  explicit IndexOutOfRange(std::size_t index);
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Immutable symbolic bit-vector / boolean expression over input bytes.
///
/// Nodes are shared, so copying an Expr is cheap. Bit-vector widths are
/// multiples of 8 up to 32; comparisons and negations are boolean (width 0).
class Expr {
 public:
  enum class Kind { ByteVar, Const, ZeroExtend, Concat, Cmp, Not };

  static Expr byte_var(std::size_t index);
  static Expr constant(std::uint32_t value, unsigned width);
  static Expr zero_extend(Expr inner, unsigned to_width);
  static Expr concat(std::vector<Expr> parts);
  static Expr cmp(CmpOp op, Expr lhs, Expr rhs);
  static Expr negate(Expr inner);

  Kind kind() const;
  /// Bit width; 0 for boolean-valued expressions.
  unsigned width() const;
  bool is_bool() const { return width() == 0; }

  std::size_t var_index() const;      // ByteVar
  std::uint32_t const_value() const;  // Const
  CmpOp op() const;                   // Cmp
  const Expr& lhs() const;            // Cmp
  const Expr& rhs() const;            // Cmp
  const Expr& inner() const;          // ZeroExtend, Not
  const std::vector<Expr>& parts() const;  // Concat

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Concrete value of an expression: a bit-vector, or a boolean when width is 0.
struct Value {
  std::uint32_t bits = 0;
  unsigned width = 0;

  bool is_bool() const { return width == 0; }
  bool truth() const { return bits != 0; }
  friend bool operator==(const Value&, const Value&) = default;
};

/// Evaluates `expr` under k!n := input[n]. Throws IndexOutOfRange.
Value eval(const Expr& expr, ByteView input);
bool eval_bool(const Expr& expr, ByteView input);

/// All ByteVar indices reachable in `expr`.
std::set<std::size_t> positions(const Expr& expr);

/// Widens a byte-level expression to 32 bits as `(concat #x000000 e)`.
Expr widen32(const Expr& byte_expr);

const char* op_name(CmpOp op);

}  // namespace ectfuzz
