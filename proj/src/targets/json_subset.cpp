#include <array>
#include <stdexcept>

#include "cursor.hpp"
#include "ectfuzz/targets.hpp"

namespace ectfuzz::targets {

namespace {

constexpr std::array<std::uint8_t, 4> kWhitespace{' ', '\t', '\n', '\r'};
constexpr std::array<std::uint8_t, 17> kValueStart{'{', '[', '"', 't', 'f', 'n', '-', '0', '1',
                                                    '2', '3', '4', '5', '6', '7', '8', '9'};
constexpr std::array<std::uint8_t, 9> kEscapes{'"', '\\', '/', 'b', 'f', 'n', 'r', 't', 'u'};
constexpr std::array<std::uint8_t, 2> kObjectNext{',', '}'};
constexpr std::array<std::uint8_t, 2> kArrayNext{',', ']'};

class JsonParser {
 public:
  explicit JsonParser(TraceContext& ctx) : in_(ctx) {}

  Outcome run() {
    auto f = ctx().frame("json_parse");
    skip_ws();
    if (in_.eof() || !value()) return Outcome::reject();
    skip_ws();
    return in_.eof() ? Outcome::accept() : Outcome::reject();
  }

 private:
  TraceContext& ctx() { return in_.ctx; }

  void skip_ws() {
    while (!in_.eof() && ctx().branch_switch(in_.cur(), kWhitespace)) ++in_.pos;
  }

  bool is_digit() {
    if (in_.eof()) return false;
    const auto c = in_.cur();
    return ctx().branch_if(c >= '0') && ctx().branch_if('9' >= c);
  }

  bool is_hex() {
    if (in_.eof()) return false;
    const auto c = in_.cur();
    if (ctx().branch_if(c >= '0') && ctx().branch_if('9' >= c)) return true;
    if (ctx().branch_if(c >= 'a') && ctx().branch_if('f' >= c)) return true;
    return ctx().branch_if(c >= 'A') && ctx().branch_if('F' >= c);
  }

  bool value() {
    auto f = ctx().frame("json_value");
    if (in_.eof()) return false;
    const auto head = ctx().branch_switch(in_.cur(), kValueStart);
    if (!head) return false;
    switch (*head) {
      case '{': return object();
      case '[': return array();
      case '"': return string();
      case 't': return literal_true();
      case 'f': return literal_false();
      case 'n': return literal_null();
      default: return number();
    }
  }

  bool object() {
    auto f = ctx().frame("json_object");
    ++in_.pos;  // '{'
    skip_ws();
    if (in_.eat('}')) return true;
    for (;;) {
      if (!in_.is('"') || !string()) return false;
      skip_ws();
      if (!in_.eat(':')) return false;
      skip_ws();
      if (!value()) return false;
      skip_ws();
      if (in_.eof()) return false;
      const auto next = ctx().branch_switch(in_.cur(), kObjectNext);
      if (!next) return false;
      ++in_.pos;
      if (*next == '}') return true;
      skip_ws();
    }
  }

  bool array() {
    auto f = ctx().frame("json_array");
    ++in_.pos;  // '['
    skip_ws();
    if (in_.eat(']')) return true;
    for (;;) {
      if (!value()) return false;
      skip_ws();
      if (in_.eof()) return false;
      const auto next = ctx().branch_switch(in_.cur(), kArrayNext);
      if (!next) return false;
      ++in_.pos;
      if (*next == ']') return true;
      skip_ws();
    }
  }

  bool string() {
    auto f = ctx().frame("json_string");
    ++in_.pos;  // opening quote
    for (;;) {
      if (in_.eof()) return false;
      if (in_.eat('"')) return true;
      if (in_.eat('\\')) {
        if (in_.eof()) return false;
        const auto esc = ctx().branch_switch(in_.cur(), kEscapes, true);
        if (!esc) return false;
        ++in_.pos;
        if (*esc == 'u' && !unicode_escape()) return false;
        continue;
      }
      if (ctx().branch_if(in_.cur() < ' ')) return false;
      ++in_.pos;
    }
  }

  // Each hex digit is its own branch site so partial progress shows up as coverage.
  bool unicode_escape() {
    auto f = ctx().frame("json_unicode_escape");
    bool all_zero = true;
    if (!is_hex()) return false;
    all_zero = ctx().branch_if(in_.cur() == '0') && all_zero;
    ++in_.pos;
    if (!is_hex()) return false;
    all_zero = ctx().branch_if(in_.cur() == '0') && all_zero;
    ++in_.pos;
    if (!is_hex()) return false;
    all_zero = ctx().branch_if(in_.cur() == '0') && all_zero;
    ++in_.pos;
    if (!is_hex()) return false;
    all_zero = ctx().branch_if(in_.cur() == '0') && all_zero;
    ++in_.pos;
    if (all_zero) throw std::runtime_error("embedded NUL escape reached the string buffer");
    return true;
  }

  bool number() {
    auto f = ctx().frame("json_number");
    in_.eat('-');
    if (in_.eat('0')) return true;
    if (!is_digit()) return false;
    while (is_digit()) ++in_.pos;
    return true;
  }

  bool literal_true() {
    auto f = ctx().frame("json_literal");
    ++in_.pos;
    return in_.eat('r') && in_.eat('u') && in_.eat('e');
  }

  bool literal_false() {
    auto f = ctx().frame("json_literal");
    ++in_.pos;
    return in_.eat('a') && in_.eat('l') && in_.eat('s') && in_.eat('e');
  }

  bool literal_null() {
    auto f = ctx().frame("json_literal");
    ++in_.pos;
    return in_.eat('u') && in_.eat('l') && in_.eat('l');
  }

  Cursor in_;
};

}  // namespace

Outcome json_subset(TraceContext& ctx) { return JsonParser(ctx).run(); }

}  // namespace ectfuzz::targets
