#include "ectfuzz/smt_text.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <utility>

namespace ectfuzz {

namespace {

void emit(const Expr& e, std::string& out, bool normalize) {
  switch (e.kind()) {
    case Expr::Kind::ByteVar:
      out += "k!";
      out += normalize ? std::string("*") : std::to_string(e.var_index());
      return;
    case Expr::Kind::Const: {
      char buf[16];
      std::snprintf(buf, sizeof buf, "#x%0*x", static_cast<int>(e.width() / 4), e.const_value());
      out += buf;
      return;
    }
    case Expr::Kind::ZeroExtend:
      out += "((_ zero_extend " + std::to_string(e.width() - e.inner().width()) + ") ";
      emit(e.inner(), out, normalize);
      out += ')';
      return;
    case Expr::Kind::Concat:
      out += "(concat";
      for (const auto& p : e.parts()) {
        out += ' ';
        emit(p, out, normalize);
      }
      out += ')';
      return;
    case Expr::Kind::Cmp:
      out += '(';
      out += op_name(e.op());
      out += ' ';
      emit(e.lhs(), out, normalize);
      out += ' ';
      emit(e.rhs(), out, normalize);
      out += ')';
      return;
    case Expr::Kind::Not:
      out += "(not ";
      emit(e.inner(), out, normalize);
      out += ')';
      return;
  }
}

constexpr std::array<std::pair<std::string_view, CmpOp>, 10> kOps{{
    {"=", CmpOp::EQ},
    {"distinct", CmpOp::NE},
    {"bvslt", CmpOp::SLT},
    {"bvsle", CmpOp::SLE},
    {"bvsgt", CmpOp::SGT},
    {"bvsge", CmpOp::SGE},
    {"bvult", CmpOp::ULT},
    {"bvule", CmpOp::ULE},
    {"bvugt", CmpOp::UGT},
    {"bvuge", CmpOp::UGE},
}};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse_all() {
    Expr e = parse();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("constraint text, offset " + std::to_string(pos_) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string_view atom() {
    skip_ws();
    const auto start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    if (start == pos_) fail("expected an atom");
    return text_.substr(start, pos_ - start);
  }

  static std::uint64_t number(std::string_view digits, int base, const Parser& p) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v, base);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty())
      p.fail("bad number '" + std::string(digits) + "'");
    return v;
  }

  Expr parse() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end");
    if (text_[pos_] != '(') return leaf(atom());
    ++pos_;
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      // ((_ zero_extend N) e)
      ++pos_;
      if (atom() != "_" || atom() != "zero_extend") fail("unknown indexed operator");
      const auto extra = number(atom(), 10, *this);
      expect(')');
      Expr inner = parse();
      expect(')');
      return Expr::zero_extend(inner, inner.width() + static_cast<unsigned>(extra));
    }
    const auto head = atom();
    if (head == "not") {
      Expr inner = parse();
      expect(')');
      return Expr::negate(inner);
    }
    if (head == "concat") {
      std::vector<Expr> parts;
      for (;;) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ')') break;
        parts.push_back(parse());
      }
      expect(')');
      return Expr::concat(std::move(parts));
    }
    for (const auto& [name, op] : kOps) {
      if (head == name) {
        Expr l = parse();
        Expr r = parse();
        expect(')');
        return Expr::cmp(op, l, r);
      }
    }
    fail("unknown operator '" + std::string(head) + "'");
  }

  Expr leaf(std::string_view a) {
    if (a.starts_with("k!")) return Expr::byte_var(number(a.substr(2), 10, *this));
    if (a.starts_with("#x")) {
      const auto digits = a.substr(2);
      if (digits.size() > 8) fail("constant wider than 32 bits");
      return Expr::constant(static_cast<std::uint32_t>(number(digits, 16, *this)),
                            static_cast<unsigned>(digits.size() * 4));
    }
    fail("unknown atom '" + std::string(a) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string print(const Expr& expr) {
  std::string out;
  emit(expr, out, false);
  return out;
}

std::string normalized_text(const Expr& expr) {
  std::string out;
  emit(expr, out, true);
  return out;
}

Expr parse_expr(std::string_view text) {
  try {
    return Parser(text).parse_all();
  } catch (const ExprError& e) {
    throw ParseError(std::string("ill-typed constraint: ") + e.what());
  }
}

}  // namespace ectfuzz
