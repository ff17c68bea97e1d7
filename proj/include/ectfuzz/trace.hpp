#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <source_location>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ectfuzz/expr.hpp"

namespace ectfuzz {

enum class BranchType { If = 0, Switch = 1 };

/// Branch id used for the head node of a site.
inline constexpr int kHeadBranch = -1;
/// Branch id of the default arm of a switch.
inline constexpr int kDefaultBranch = -2;

struct BranchSite {
  std::string file;
  std::string func;
  int line = 0;
  int col = 0;
  BranchType type = BranchType::If;
  int br_id = kHeadBranch;

  /// `file_func_line_col_if` / `..._switch`, without the branch id.
  std::string head_loc() const;
  /// Full node identifier: head_loc plus `_<br_id>` (`_default` for kDefaultBranch).
  std::string loc() const;
  BranchSite with_branch(int id) const;

  friend bool operator==(const BranchSite&, const BranchSite&) = default;
  friend auto operator<=>(const BranchSite&, const BranchSite&) = default;
};

struct PathConstraint {
  BranchSite site;
  Expr expr = Expr::constant(0, 8);
  bool taken = true;
  std::set<std::size_t> positions;
  int call_stack_size = 0;
  std::size_t order = 0;
  /// Call context (function-name chain joined with '/').
  std::string context;
  /// Case value the constraint compares against, for switch constraints.
  std::optional<std::uint8_t> switch_case;

  PathConstraint negated() const;
  /// The boolean expression that holds on inputs following this direction.
  Expr assertion() const;
  /// Context-qualified node identifier of the arm this constraint records.
  std::string node_key() const;
};

/// Holds iff `pc` evaluates to `pc.taken` on `input`. False when a position
/// is outside the input.
bool evaluate_constraint(const PathConstraint& pc, ByteView input);

struct Visit {
  BranchSite site;
  int call_stack_size = 0;
  std::string context;
};

struct CallRecord {
  std::string context;
  int call_stack_size = 0;
};

struct SwitchInfo {
  std::vector<std::uint8_t> cases;
  bool has_default = false;
};

struct Outcome {
  enum class Kind { Accept, Reject, Crash };
  Kind kind = Kind::Reject;
  std::string reason;

  static Outcome accept() { return {Kind::Accept, {}}; }
  static Outcome reject() { return {Kind::Reject, {}}; }
  static Outcome crash(std::string why) { return {Kind::Crash, std::move(why)}; }
  friend bool operator==(const Outcome&, const Outcome&) = default;
};

const char* outcome_name(Outcome::Kind kind);

struct Trace {
  Bytes input;
  std::vector<PathConstraint> constraints;
  std::vector<Visit> visits;
  std::vector<CallRecord> calls;
  /// Registered switch case lists keyed by head loc.
  std::map<std::string, SwitchInfo> switches;
  Outcome outcome;
};

/// Stable text rendering of a trace; equal traces render equal bytes.
std::string serialize(const Trace& trace);

class ConsistencyError : public std::logic_error {
  using std::logic_error::logic_error;
};
class UnbalancedExit : public std::logic_error {
  using std::logic_error::logic_error;
};

class TraceContext;
class SymBool;
class SymByte;
SymBool compare(CmpOp op, const SymByte& b, std::uint8_t c, bool byte_on_left);

/// A symbolic byte read from the input. Only the trace context can observe
/// its concrete value.
class SymByte {
 public:
  const Expr& expr() const { return expr_; }

 private:
  friend class TraceContext;
  friend class SymInput;
  friend class SymBool;
  friend SymBool compare(CmpOp, const SymByte&, std::uint8_t, bool);
  SymByte(Expr e, std::uint8_t v) : expr_(std::move(e)), concrete_(v) {}
  Expr expr_;
  std::uint8_t concrete_;
};

class SymBool {
 public:
  const Expr& expr() const { return expr_; }
  SymBool operator!() const { return {Expr::negate(expr_), !concrete_}; }

 private:
  friend class TraceContext;
  friend SymBool compare(CmpOp, const SymByte&, std::uint8_t, bool);
  SymBool(Expr e, bool v) : expr_(std::move(e)), concrete_(v) {}
  Expr expr_;
  bool concrete_;
};

/// Comparison of a byte against a constant, both widened to 32 bits.
/// With `byte_on_left` false the constant is the left operand.
SymBool compare(CmpOp op, const SymByte& b, std::uint8_t c, bool byte_on_left = true);

inline SymBool operator==(const SymByte& b, char c) { return compare(CmpOp::EQ, b, c); }
inline SymBool operator!=(const SymByte& b, char c) { return compare(CmpOp::NE, b, c); }
inline SymBool operator>=(const SymByte& b, char c) { return compare(CmpOp::SGE, b, c); }
inline SymBool operator<=(const SymByte& b, char c) { return compare(CmpOp::SLE, b, c); }
inline SymBool operator<(const SymByte& b, char c) { return compare(CmpOp::SLT, b, c); }
inline SymBool operator>(const SymByte& b, char c) { return compare(CmpOp::SGT, b, c); }
inline SymBool operator>=(char c, const SymByte& b) { return compare(CmpOp::SGE, b, c, false); }
inline SymBool operator<=(char c, const SymByte& b) { return compare(CmpOp::SLE, b, c, false); }

class SymInput {
 public:
  explicit SymInput(ByteView bytes);
  /// Input length is concrete.
  std::size_t size() const { return bytes_.size(); }
  SymByte at(std::size_t i) const;

 private:
  ByteView bytes_;
  std::vector<Expr> vars_;
};

struct ContextOptions {
  /// Frames kept in the call context; deeper frames collapse onto the last kept one.
  std::size_t max_context_depth = 8;
};

/// Receives every input-dependent branch of a program under test.
class TraceContext {
 public:
  TraceContext(ByteView input, ContextOptions options = {});

  const SymInput& input() const { return input_; }

  bool branch_if(const SymBool& cond,
                 std::source_location where = std::source_location::current());
  bool branch_if(const BranchSite& site, const Expr& cond, bool concrete);

  /// Returns the matched case, or nullopt when the default arm runs.
  std::optional<std::uint8_t> branch_switch(
      const SymByte& scrutinee, std::span<const std::uint8_t> cases, bool has_default = true,
      std::source_location where = std::source_location::current());
  std::optional<std::uint8_t> branch_switch(const BranchSite& site, const Expr& scrutinee,
                                            std::uint8_t concrete,
                                            std::span<const std::uint8_t> cases,
                                            bool has_default = true);

  void enter_fn(std::string func);
  void exit_fn();
  int depth() const { return static_cast<int>(stack_.size()); }

  /// RAII frame.
  class Frame {
   public:
    Frame(TraceContext& ctx, std::string func) : ctx_(ctx) { ctx_.enter_fn(std::move(func)); }
    ~Frame() { ctx_.exit_fn(); }
    Frame(const Frame&) = delete;
    Frame& operator=(const Frame&) = delete;

   private:
    TraceContext& ctx_;
  };
  Frame frame(std::string func) { return Frame(*this, std::move(func)); }

  Trace take(Outcome outcome) &&;

 private:
  BranchSite site_at(const std::source_location& where, BranchType type) const;
  void record(const BranchSite& site, Expr expr, bool taken,
              std::optional<std::uint8_t> case_value);
  void visit(const BranchSite& site);
  void refresh_context();

  Bytes bytes_;
  SymInput input_;
  ContextOptions options_;
  std::vector<std::string> stack_;
  std::string context_;
  Trace trace_;
};

enum class InputFormat { Json, Expr, Ini, Custom };

const char* format_name(InputFormat f);

struct ProgramUnderTest {
  std::string name;
  InputFormat format = InputFormat::Custom;
  std::string custom_tag;
  std::function<Outcome(TraceContext&)> entry;

  std::string format_label() const;
};

/// Runs `p` on `input`, collecting the trace. Target exceptions are captured
/// as a Crash outcome.
Trace run_concolic(const ProgramUnderTest& p, ByteView input, ContextOptions options = {});

}  // namespace ectfuzz
