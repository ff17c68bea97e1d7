#include <array>
#include <stdexcept>

#include "cursor.hpp"
#include "ectfuzz/targets.hpp"

namespace ectfuzz::targets {

namespace {

constexpr std::array<std::uint8_t, 4> kLineStart{'[', ';', '#', '\n'};
constexpr std::size_t kSectionBuffer = 16;

class IniParser {
 public:
  explicit IniParser(TraceContext& ctx) : in_(ctx) {}

  Outcome run() {
    auto f = ctx().frame("ini_parse");
    while (!in_.eof())
      if (!line()) return Outcome::reject();
    return Outcome::accept();
  }

 private:
  TraceContext& ctx() { return in_.ctx; }

  bool is_name_char() {
    if (in_.eof()) return false;
    const auto c = in_.cur();
    if (ctx().branch_if(c >= 'a') && ctx().branch_if('z' >= c)) return true;
    if (ctx().branch_if(c >= 'A') && ctx().branch_if('Z' >= c)) return true;
    if (ctx().branch_if(c >= '0') && ctx().branch_if('9' >= c)) return true;
    return in_.is('_') || in_.is('.');
  }

  void skip_blanks() {
    while (in_.is(' ') || in_.is('\t')) ++in_.pos;
  }

  bool end_of_line() {
    skip_blanks();
    return in_.eof() || in_.eat('\n');
  }

  bool line() {
    auto f = ctx().frame("ini_line");
    const auto kind = ctx().branch_switch(in_.cur(), kLineStart);
    if (!kind) return key_value();
    switch (*kind) {
      case '[': return section();
      case '\n': ++in_.pos; return true;
      default: return comment();
    }
  }

  bool section() {
    auto f = ctx().frame("ini_section");
    ++in_.pos;  // '['
    const auto start = in_.pos;
    while (is_name_char()) ++in_.pos;
    if (in_.pos == start) return false;
    if (in_.pos - start > kSectionBuffer)
      throw std::overflow_error("section name overflows its fixed buffer");
    if (!in_.eat(']')) return false;
    return end_of_line();
  }

  bool comment() {
    auto f = ctx().frame("ini_comment");
    while (!in_.eof() && !in_.eat('\n')) ++in_.pos;
    return true;
  }

  bool key_value() {
    auto f = ctx().frame("ini_key_value");
    const auto start = in_.pos;
    while (is_name_char()) ++in_.pos;
    if (in_.pos == start) return false;
    skip_blanks();
    if (!in_.eat('=')) return false;
    while (!in_.eof() && !in_.eat('\n')) {
      if (ctx().branch_if(in_.cur() < ' ') && !in_.is('\t')) return false;
      ++in_.pos;
    }
    return true;
  }

  Cursor in_;
};

}  // namespace

Outcome ini_lang(TraceContext& ctx) { return IniParser(ctx).run(); }

}  // namespace ectfuzz::targets
