#include "ectfuzz/expr.hpp"

namespace ectfuzz {

Bytes to_bytes(std::string_view text) { return Bytes(text.begin(), text.end()); }

std::string to_string(ByteView bytes) { return std::string(bytes.begin(), bytes.end()); }

IndexOutOfRange::IndexOutOfRange(std::size_t index)
    : std::out_of_range("symbolic byte k!" + std::to_string(index) + " is outside the input"),
      index_(index) {}

struct Expr::Node {
  Kind kind;
  unsigned width = 0;
  std::uint32_t value = 0;  // Const value or ByteVar index
  CmpOp op = CmpOp::EQ;
  std::vector<Expr> children;
};

namespace {

bool valid_width(unsigned w) { return w >= 8 && w <= 32 && w % 8 == 0; }

std::uint32_t mask(unsigned width) {
  return width >= 32 ? 0xffffffffu : ((1u << width) - 1u);
}

std::int64_t as_signed(std::uint32_t bits, unsigned width) {
  const std::uint32_t sign = 1u << (width - 1);
  return (bits & sign) ? static_cast<std::int64_t>(bits) - (std::int64_t{1} << width)
                       : static_cast<std::int64_t>(bits);
}

}  // namespace

Expr Expr::byte_var(std::size_t index) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::ByteVar;
  n->width = 8;
  n->value = static_cast<std::uint32_t>(index);
  return Expr(std::move(n));
}

Expr Expr::constant(std::uint32_t value, unsigned width) {
  if (!valid_width(width)) throw ExprError("constant width must be 8, 16, 24 or 32");
  if ((value & mask(width)) != value) throw ExprError("constant does not fit its width");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Const;
  n->width = width;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::zero_extend(Expr inner, unsigned to_width) {
  if (inner.is_bool()) throw ExprError("zero_extend of a boolean");
  if (!valid_width(to_width) || to_width <= inner.width())
    throw ExprError("zero_extend target width must exceed the operand width");
  auto n = std::make_shared<Node>();
  n->kind = Kind::ZeroExtend;
  n->width = to_width;
  n->children.push_back(std::move(inner));
  return Expr(std::move(n));
}

Expr Expr::concat(std::vector<Expr> parts) {
  if (parts.empty()) throw ExprError("empty concat");
  unsigned total = 0;
  for (const auto& p : parts) {
    if (p.is_bool()) throw ExprError("concat of a boolean");
    total += p.width();
  }
  if (!valid_width(total)) throw ExprError("concat width exceeds 32 bits");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Concat;
  n->width = total;
  n->children = std::move(parts);
  return Expr(std::move(n));
}

Expr Expr::cmp(CmpOp op, Expr lhs, Expr rhs) {
  if (lhs.is_bool() || rhs.is_bool()) throw ExprError("comparison of a boolean");
  if (lhs.width() != rhs.width()) throw ExprError("comparison operands differ in width");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Cmp;
  n->op = op;
  n->children = {std::move(lhs), std::move(rhs)};
  return Expr(std::move(n));
}

Expr Expr::negate(Expr inner) {
  if (!inner.is_bool()) throw ExprError("not of a bit-vector");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Not;
  n->children.push_back(std::move(inner));
  return Expr(std::move(n));
}

Expr::Kind Expr::kind() const { return node_->kind; }
unsigned Expr::width() const { return node_->width; }

std::size_t Expr::var_index() const {
  if (kind() != Kind::ByteVar) throw ExprError("not a byte variable");
  return node_->value;
}
std::uint32_t Expr::const_value() const {
  if (kind() != Kind::Const) throw ExprError("not a constant");
  return node_->value;
}
CmpOp Expr::op() const {
  if (kind() != Kind::Cmp) throw ExprError("not a comparison");
  return node_->op;
}
const Expr& Expr::lhs() const {
  if (kind() != Kind::Cmp) throw ExprError("not a comparison");
  return node_->children[0];
}
const Expr& Expr::rhs() const {
  if (kind() != Kind::Cmp) throw ExprError("not a comparison");
  return node_->children[1];
}
const Expr& Expr::inner() const {
  if (kind() != Kind::ZeroExtend && kind() != Kind::Not) throw ExprError("no inner operand");
  return node_->children[0];
}
const std::vector<Expr>& Expr::parts() const {
  if (kind() != Kind::Concat) throw ExprError("not a concat");
  return node_->children;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  return x.kind == y.kind && x.width == y.width && x.value == y.value && x.op == y.op &&
         x.children == y.children;
}

Value eval(const Expr& expr, ByteView input) {
  switch (expr.kind()) {
    case Expr::Kind::ByteVar: {
      const auto i = expr.var_index();
      if (i >= input.size()) throw IndexOutOfRange(i);
      return {input[i], 8};
    }
    case Expr::Kind::Const:
      return {expr.const_value(), expr.width()};
    case Expr::Kind::ZeroExtend:
      return {eval(expr.inner(), input).bits, expr.width()};
    case Expr::Kind::Concat: {
      std::uint32_t bits = 0;
      for (const auto& p : expr.parts()) {
        const auto v = eval(p, input);
        bits = v.width >= 32 ? v.bits : ((bits << v.width) | v.bits);
      }
      return {bits, expr.width()};
    }
    case Expr::Kind::Not:
      return {eval(expr.inner(), input).truth() ? 0u : 1u, 0};
    case Expr::Kind::Cmp: {
      const auto l = eval(expr.lhs(), input);
      const auto r = eval(expr.rhs(), input);
      const auto w = l.width;
      const auto sl = as_signed(l.bits, w);
      const auto sr = as_signed(r.bits, w);
      bool out = false;
      switch (expr.op()) {
        case CmpOp::EQ: out = l.bits == r.bits; break;
        case CmpOp::NE: out = l.bits != r.bits; break;
        case CmpOp::SLT: out = sl < sr; break;
        case CmpOp::SLE: out = sl <= sr; break;
        case CmpOp::SGT: out = sl > sr; break;
        case CmpOp::SGE: out = sl >= sr; break;
        case CmpOp::ULT: out = l.bits < r.bits; break;
        case CmpOp::ULE: out = l.bits <= r.bits; break;
        case CmpOp::UGT: out = l.bits > r.bits; break;
        case CmpOp::UGE: out = l.bits >= r.bits; break;
      }
      return {out ? 1u : 0u, 0};
    }
  }
  throw ExprError("corrupt expression");
}

bool eval_bool(const Expr& expr, ByteView input) {
  if (!expr.is_bool()) throw ExprError("expected a boolean expression");
  return eval(expr, input).truth();
}

namespace {
void collect(const Expr& e, std::set<std::size_t>& out) {
  switch (e.kind()) {
    case Expr::Kind::ByteVar: out.insert(e.var_index()); return;
    case Expr::Kind::Const: return;
    case Expr::Kind::ZeroExtend:
    case Expr::Kind::Not: collect(e.inner(), out); return;
    case Expr::Kind::Concat:
      for (const auto& p : e.parts()) collect(p, out);
      return;
    case Expr::Kind::Cmp:
      collect(e.lhs(), out);
      collect(e.rhs(), out);
      return;
  }
}
}  // namespace

std::set<std::size_t> positions(const Expr& expr) {
  std::set<std::size_t> out;
  collect(expr, out);
  return out;
}

Expr widen32(const Expr& byte_expr) {
  if (byte_expr.width() == 32) return byte_expr;
  return Expr::concat({Expr::constant(0, 32 - byte_expr.width()), byte_expr});
}

const char* op_name(CmpOp op) {
  switch (op) {
    case CmpOp::EQ: return "=";
    case CmpOp::NE: return "distinct";
    case CmpOp::SLT: return "bvslt";
    case CmpOp::SLE: return "bvsle";
    case CmpOp::SGT: return "bvsgt";
    case CmpOp::SGE: return "bvsge";
    case CmpOp::ULT: return "bvult";
    case CmpOp::ULE: return "bvule";
    case CmpOp::UGT: return "bvugt";
    case CmpOp::UGE: return "bvuge";
  }
  return "?";
}

}  // namespace ectfuzz
