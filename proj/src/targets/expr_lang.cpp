#include <array>
#include <stdexcept>

#include "cursor.hpp"
#include "ectfuzz/targets.hpp"

namespace ectfuzz::targets {

namespace {

enum class Tok { End, LParen, RParen, Comma, Plus, Minus, Star, Slash, Semi, Number, Ident, Return, Error };

constexpr std::array<std::uint8_t, 8> kPunct{'(', ')', ',', '+', '-', '*', '/', ';'};
constexpr std::array<std::uint8_t, 3> kSpace{' ', '\t', '\n'};
constexpr std::size_t kMaxLiteralDigits = 9;

class ExprParser {
 public:
  explicit ExprParser(TraceContext& ctx) : in_(ctx) {}

  Outcome run() {
    auto f = ctx().frame("expr_program");
    advance();
    if (tok_ == Tok::End) return Outcome::reject();
    for (;;) {
      if (!statement()) return Outcome::reject();
      if (tok_ == Tok::End) return Outcome::accept();
      if (tok_ != Tok::Semi) return Outcome::reject();
      advance();
      if (tok_ == Tok::End) return Outcome::accept();
    }
  }

 private:
  TraceContext& ctx() { return in_.ctx; }

  bool is_digit() {
    const auto c = in_.cur();
    return ctx().branch_if(c >= '0') && ctx().branch_if('9' >= c);
  }

  bool is_alpha() {
    const auto c = in_.cur();
    if (ctx().branch_if(c >= 'a') && ctx().branch_if('z' >= c)) return true;
    return ctx().branch_if(c >= 'A') && ctx().branch_if('Z' >= c);
  }

  bool is_ident_start() { return is_alpha() || in_.is('_') || in_.is('$'); }

  bool is_ident_part() {
    auto f = ctx().frame("expr_is_ident_part");
    return is_digit() || is_alpha() || in_.is('$') || in_.is('_');
  }

  // Token boundaries come from the branches above, so comparing the
  // concrete token kind afterwards adds no hidden input dependence.
  void advance() {
    auto f = ctx().frame("expr_lex");
    while (!in_.eof() && ctx().branch_switch(in_.cur(), kSpace)) ++in_.pos;
    if (in_.eof()) {
      tok_ = Tok::End;
      return;
    }
    if (const auto p = ctx().branch_switch(in_.cur(), kPunct)) {
      ++in_.pos;
      switch (*p) {
        case '(': tok_ = Tok::LParen; return;
        case ')': tok_ = Tok::RParen; return;
        case ',': tok_ = Tok::Comma; return;
        case '+': tok_ = Tok::Plus; return;
        case '-': tok_ = Tok::Minus; return;
        case '*': tok_ = Tok::Star; return;
        case '/': tok_ = Tok::Slash; return;
        default: tok_ = Tok::Semi; return;
      }
    }
    if (is_digit()) {
      lex_number();
      return;
    }
    if (is_ident_start()) {
      lex_ident();
      return;
    }
    tok_ = Tok::Error;
  }

  void lex_number() {
    auto f = ctx().frame("expr_lex_number");
    const auto start = in_.pos;
    ++in_.pos;
    while (!in_.eof() && is_digit()) ++in_.pos;
    if (in_.pos - start > kMaxLiteralDigits)
      throw std::overflow_error("integer literal overflows the 32-bit accumulator");
    tok_ = Tok::Number;
  }

  void lex_ident() {
    auto f = ctx().frame("expr_lex_ident");
    const auto start = in_.pos;
    ++in_.pos;
    while (!in_.eof() && is_ident_part()) ++in_.pos;
    tok_ = in_.pos - start == 6 && is_return_keyword(start) ? Tok::Return : Tok::Ident;
  }

  bool is_return_keyword(std::size_t at) {
    auto f = ctx().frame("expr_keyword");
    const auto& s = ctx().input();
    return ctx().branch_if(s.at(at) == 'r') && ctx().branch_if(s.at(at + 1) == 'e') &&
           ctx().branch_if(s.at(at + 2) == 't') && ctx().branch_if(s.at(at + 3) == 'u') &&
           ctx().branch_if(s.at(at + 4) == 'r') && ctx().branch_if(s.at(at + 5) == 'n');
  }

  bool statement() {
    auto f = ctx().frame("expr_statement");
    if (tok_ == Tok::Return) advance();
    return expression();
  }

  bool expression() {
    auto f = ctx().frame("expr_additive");
    if (!term()) return false;
    while (tok_ == Tok::Plus || tok_ == Tok::Minus) {
      advance();
      if (!term()) return false;
    }
    return true;
  }

  bool term() {
    auto f = ctx().frame("expr_term");
    if (!unary()) return false;
    while (tok_ == Tok::Star || tok_ == Tok::Slash) {
      advance();
      if (!unary()) return false;
    }
    return true;
  }

  bool unary() {
    auto f = ctx().frame("expr_unary");
    if (tok_ == Tok::Minus) {
      advance();
      return unary();
    }
    return primary();
  }

  bool primary() {
    auto f = ctx().frame("expr_primary");
    switch (tok_) {
      case Tok::Number:
        advance();
        return true;
      case Tok::Ident:
        advance();
        return tok_ == Tok::LParen ? call_args() : true;
      case Tok::LParen:
        advance();
        if (!expression() || tok_ != Tok::RParen) return false;
        advance();
        return true;
      default:
        return false;
    }
  }

  bool call_args() {
    auto f = ctx().frame("expr_call_args");
    advance();  // '('
    if (tok_ == Tok::RParen) {
      advance();
      return true;
    }
    for (;;) {
      if (!expression()) return false;
      if (tok_ == Tok::RParen) {
        advance();
        return true;
      }
      if (tok_ != Tok::Comma) return false;
      advance();
    }
  }

  Cursor in_;
  Tok tok_ = Tok::End;
};

}  // namespace

Outcome expr_lang(TraceContext& ctx) { return ExprParser(ctx).run(); }

}  // namespace ectfuzz::targets
