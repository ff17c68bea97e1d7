#pragma once

#include <array>
#include <random>
#include <string>
#include <string_view>

#include "ectfuzz/trace.hpp"

namespace ectfuzz::test {

inline BranchSite site(std::string file, std::string func, int line, int col, BranchType type,
                       int br = kHeadBranch) {
  return {std::move(file), std::move(func), line, col, type, br};
}

/// Independent walk collecting ByteVar indices.
inline void collect_vars(const Expr& e, std::set<std::size_t>& out) {
  switch (e.kind()) {
    case Expr::Kind::ByteVar: out.insert(e.var_index()); return;
    case Expr::Kind::Const: return;
    case Expr::Kind::ZeroExtend:
    case Expr::Kind::Not: collect_vars(e.inner(), out); return;
    case Expr::Kind::Concat:
      for (const auto& p : e.parts()) collect_vars(p, out);
      return;
    case Expr::Kind::Cmp:
      collect_vars(e.lhs(), out);
      collect_vars(e.rhs(), out);
      return;
  }
}

/// Random string over `alphabet`, length in [0, max_len].
inline std::string random_text(std::mt19937_64& rng, std::string_view alphabet,
                               std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string s(len(rng), ' ');
  for (auto& c : s) c = alphabet[pick(rng)];
  return s;
}

/// Inputs biased towards each target's grammar so both verdicts show up.
inline std::string grammar_biased(const std::string& target, std::mt19937_64& rng) {
  if (target == "json_subset")
    return random_text(rng, "{}[]\",:01-9tfnruelas \\u0aA", 12);
  if (target == "expr_lang") return random_text(rng, "()+-*/,;0123 abreturn_$\t\n", 12);
  if (target == "ini_lang") return random_text(rng, "[]=;#\n ab.1_\tx", 14);
  return random_text(rng, "0123456789a", 8);
}

/// Random byte comparison over up to three positions below `len`, in the
/// shapes the targets emit: a byte against a constant, widened or not, and
/// two-byte concatenations.
inline PathConstraint random_goal(std::mt19937_64& rng, std::size_t len) {
  static constexpr std::array ops{CmpOp::EQ,  CmpOp::NE,  CmpOp::ULT, CmpOp::ULE, CmpOp::UGT,
                                  CmpOp::UGE, CmpOp::SLT, CmpOp::SLE, CmpOp::SGT, CmpOp::SGE};
  const auto pos = [&] { return static_cast<std::size_t>(rng() % len); };
  Expr lhs = Expr::byte_var(pos());
  Expr rhs = Expr::constant(rng() % 256, 8);
  switch (rng() % 4) {
    case 0: break;
    case 1:
      lhs = widen32(lhs);
      rhs = Expr::constant(rng() % 256, 32);
      break;
    case 2:
      lhs = Expr::concat({Expr::byte_var(pos()), Expr::byte_var(pos())});
      rhs = Expr::constant(rng() % 65536, 16);
      break;
    default:
      rhs = Expr::byte_var(pos());
      break;
  }
  PathConstraint pc;
  const auto op = ops[rng() % ops.size()];
  pc.expr = rng() % 2 ? Expr::cmp(op, lhs, rhs) : Expr::cmp(op, rhs, lhs);
  pc.positions = positions(pc.expr);
  pc.taken = rng() % 2;
  return pc;
}

}  // namespace ectfuzz::test
