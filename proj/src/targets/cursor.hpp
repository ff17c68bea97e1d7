#pragma once

#include "ectfuzz/trace.hpp"

namespace ectfuzz::targets {

// Position over a symbolic input. Every byte decision goes through ctx.
struct Cursor {
  TraceContext& ctx;
  std::size_t pos = 0;

  explicit Cursor(TraceContext& c) : ctx(c) {}

  bool eof() const { return pos >= ctx.input().size(); }
  SymByte cur() const { return ctx.input().at(pos); }

  bool is(char c, std::source_location where = std::source_location::current()) {
    return !eof() && ctx.branch_if(cur() == c, where);
  }
  bool eat(char c, std::source_location where = std::source_location::current()) {
    if (!is(c, where)) return false;
    ++pos;
    return true;
  }
};

}  // namespace ectfuzz::targets
