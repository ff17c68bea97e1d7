#include "ectfuzz/trace.hpp"

#include <algorithm>
#include <sstream>

#include "ectfuzz/smt_text.hpp"

namespace ectfuzz {

std::string BranchSite::head_loc() const {
  return file + "_" + func + "_" + std::to_string(line) + "_" + std::to_string(col) + "_" +
         (type == BranchType::If ? "if" : "switch");
}

std::string BranchSite::loc() const {
  if (br_id == kHeadBranch) return head_loc();
  if (br_id == kDefaultBranch) return head_loc() + "_default";
  return head_loc() + "_" + std::to_string(br_id);
}

BranchSite BranchSite::with_branch(int id) const {
  BranchSite s = *this;
  s.br_id = id;
  return s;
}

PathConstraint PathConstraint::negated() const {
  PathConstraint n = *this;
  n.taken = !taken;
  return n;
}

Expr PathConstraint::assertion() const {
  if (taken) return expr;
  if (expr.kind() == Expr::Kind::Not) return expr.inner();
  return Expr::negate(expr);
}

std::string PathConstraint::node_key() const {
  return context.empty() ? site.loc() : context + "/" + site.loc();
}

bool evaluate_constraint(const PathConstraint& pc, ByteView input) {
  if (!pc.positions.empty() && *pc.positions.rbegin() >= input.size()) return false;
  return eval_bool(pc.expr, input) == pc.taken;
}

const char* outcome_name(Outcome::Kind kind) {
  switch (kind) {
    case Outcome::Kind::Accept: return "accept";
    case Outcome::Kind::Reject: return "reject";
    case Outcome::Kind::Crash: return "crash";
  }
  return "?";
}

std::string serialize(const Trace& t) {
  std::ostringstream out;
  out << "input " << t.input.size() << ':';
  for (auto b : t.input) out << ' ' << static_cast<int>(b);
  out << "\noutcome " << outcome_name(t.outcome.kind) << ' ' << t.outcome.reason << '\n';
  for (const auto& pc : t.constraints)
    out << "pc " << pc.order << ' ' << pc.node_key() << ' ' << pc.taken << ' '
        << pc.call_stack_size << ' ' << print(pc.expr) << '\n';
  for (const auto& v : t.visits)
    out << "visit " << v.context << '/' << v.site.loc() << ' ' << v.call_stack_size << '\n';
  for (const auto& c : t.calls) out << "call " << c.context << ' ' << c.call_stack_size << '\n';
  for (const auto& [loc, info] : t.switches) {
    out << "switch " << loc << ' ' << info.has_default << ':';
    for (auto c : info.cases) out << ' ' << static_cast<int>(c);
    out << '\n';
  }
  return out.str();
}

SymBool compare(CmpOp op, const SymByte& b, std::uint8_t c, bool byte_on_left) {
  Expr wide = widen32(b.expr());
  Expr k = Expr::constant(c, 32);
  Expr e = byte_on_left ? Expr::cmp(op, wide, k) : Expr::cmp(op, k, wide);
  // Concrete value from the same evaluator the solver uses.
  Bytes probe(b.expr().var_index() + 1, 0);
  probe.back() = b.concrete_;
  const bool v = eval_bool(e, probe);
  return SymBool(std::move(e), v);
}

SymInput::SymInput(ByteView bytes) : bytes_(bytes) {
  vars_.reserve(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) vars_.push_back(Expr::byte_var(i));
}

SymByte SymInput::at(std::size_t i) const {
  if (i >= bytes_.size()) throw IndexOutOfRange(i);
  return SymByte(vars_[i], bytes_[i]);
}

TraceContext::TraceContext(ByteView input, ContextOptions options)
    : bytes_(input.begin(), input.end()), input_(bytes_), options_(options) {
  trace_.input = bytes_;
}

namespace {
std::string basename(const char* path) {
  std::string p(path);
  const auto slash = p.find_last_of("/\\");
  return slash == std::string::npos ? p : p.substr(slash + 1);
}
}  // namespace

BranchSite TraceContext::site_at(const std::source_location& where, BranchType type) const {
  BranchSite s;
  s.file = basename(where.file_name());
  s.func = stack_.empty() ? std::string("main") : stack_.back();
  s.line = static_cast<int>(where.line());
  s.col = static_cast<int>(where.column());
  s.type = type;
  return s;
}

void TraceContext::record(const BranchSite& site, Expr expr, bool taken,
                          std::optional<std::uint8_t> case_value) {
  auto pos = positions(expr);
  PathConstraint pc{site,           std::move(expr), taken,    std::move(pos),
                    depth(),        trace_.constraints.size(), context_, case_value};
  trace_.constraints.push_back(std::move(pc));
}

void TraceContext::visit(const BranchSite& site) {
  trace_.visits.push_back({site, depth(), context_});
}

bool TraceContext::branch_if(const SymBool& cond, std::source_location where) {
  return branch_if(site_at(where, BranchType::If), cond.expr(), cond.concrete_);
}

bool TraceContext::branch_if(const BranchSite& head, const Expr& cond, bool concrete) {
  if (head.type != BranchType::If) throw ConsistencyError("branch_if on a switch site");
  if (eval_bool(cond, bytes_) != concrete)
    throw ConsistencyError("branch condition disagrees with the concrete run at " +
                           head.head_loc());
  const auto site = head.with_branch(concrete ? 0 : 1);
  record(site, cond, concrete, std::nullopt);
  visit(site);
  return concrete;
}

std::optional<std::uint8_t> TraceContext::branch_switch(const SymByte& scrutinee,
                                                        std::span<const std::uint8_t> cases,
                                                        bool has_default,
                                                        std::source_location where) {
  return branch_switch(site_at(where, BranchType::Switch), scrutinee.expr(), scrutinee.concrete_,
                       cases, has_default);
}

std::optional<std::uint8_t> TraceContext::branch_switch(const BranchSite& head,
                                                        const Expr& scrutinee,
                                                        std::uint8_t concrete,
                                                        std::span<const std::uint8_t> cases,
                                                        bool has_default) {
  if (head.type != BranchType::Switch) throw ConsistencyError("branch_switch on an if site");
  if (eval(scrutinee, bytes_).bits != concrete)
    throw ConsistencyError("switch scrutinee disagrees with the concrete run at " +
                           head.head_loc());

  auto& info = trace_.switches[head.head_loc()];
  if (info.cases.empty()) info.cases.assign(cases.begin(), cases.end());
  const bool matched = std::find(cases.begin(), cases.end(), concrete) != cases.end();
  info.has_default = info.has_default || has_default || !matched;

  const Expr wide = widen32(scrutinee);
  if (matched) {
    const auto site = head.with_branch(concrete);
    record(site, Expr::cmp(CmpOp::EQ, wide, Expr::constant(concrete, 32)), true, concrete);
    visit(site);
    return concrete;
  }
  const auto site = head.with_branch(kDefaultBranch);
  for (auto c : cases) record(site, Expr::cmp(CmpOp::NE, wide, Expr::constant(c, 32)), true, c);
  visit(site);
  return std::nullopt;
}

void TraceContext::refresh_context() {
  context_.clear();
  const auto keep = std::min(stack_.size(), options_.max_context_depth);
  for (std::size_t i = 0; i < keep; ++i) {
    if (i) context_ += '/';
    context_ += stack_[i];
  }
}

void TraceContext::enter_fn(std::string func) {
  stack_.push_back(std::move(func));
  refresh_context();
  trace_.calls.push_back({context_, depth()});
}

void TraceContext::exit_fn() {
  if (stack_.empty()) throw UnbalancedExit("exit_fn at call depth 0");
  stack_.pop_back();
  refresh_context();
}

Trace TraceContext::take(Outcome outcome) && {
  trace_.outcome = std::move(outcome);
  return std::move(trace_);
}

const char* format_name(InputFormat f) {
  switch (f) {
    case InputFormat::Json: return "JSON";
    case InputFormat::Expr: return "EXPR";
    case InputFormat::Ini: return "INI";
    case InputFormat::Custom: return "CUSTOM";
  }
  return "?";
}

std::string ProgramUnderTest::format_label() const {
  return format == InputFormat::Custom && !custom_tag.empty() ? custom_tag : format_name(format);
}

Trace run_concolic(const ProgramUnderTest& p, ByteView input, ContextOptions options) {
  TraceContext ctx(input, options);
  Outcome outcome;
  try {
    outcome = p.entry(ctx);
  } catch (const std::logic_error&) {
    throw;  // DSL misuse is a bug in the target, not a finding
  } catch (const std::exception& e) {
    outcome = Outcome::crash(e.what());
  } catch (...) {
    outcome = Outcome::crash("unknown exception");
  }
  return std::move(ctx).take(std::move(outcome));
}

}  // namespace ectfuzz
