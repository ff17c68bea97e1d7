#include "cursor.hpp"
#include "ectfuzz/targets.hpp"

namespace ectfuzz::targets {

namespace {

class DigitScanner {
 public:
  explicit DigitScanner(TraceContext& ctx) : in_(ctx) {}

  Outcome run() {
    auto f = in_.ctx.frame("scan_digits");
    std::size_t non_digits = 0;
    for (in_.pos = 0; !in_.eof(); ++in_.pos)
      if (!is_digit()) ++non_digits;
    return in_.ctx.input().size() > 0 && non_digits == 0 ? Outcome::accept() : Outcome::reject();
  }

 private:
  bool is_digit() {
    const auto c = in_.cur();
    return in_.ctx.branch_if(c >= '0') && in_.ctx.branch_if('9' >= c);
  }

  Cursor in_;
};

}  // namespace

Outcome digits(TraceContext& ctx) { return DigitScanner(ctx).run(); }

}  // namespace ectfuzz::targets
