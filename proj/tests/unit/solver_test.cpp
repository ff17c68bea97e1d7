#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <random>

#include "ectfuzz/selector.hpp"
#include "ectfuzz/smt_text.hpp"
#include "ectfuzz/solver.hpp"
#include "ectfuzz/targets.hpp"
#include "support.hpp"

namespace ectfuzz {
namespace {

PathConstraint goal(const std::string& text, bool taken) {
  PathConstraint pc;
  pc.expr = parse_expr(text);
  pc.positions = positions(pc.expr);
  pc.taken = taken;
  return pc;
}

TEST(EvaluateConstraint, Examples) {
  const auto open = goal("(= k!0 #x7b)", true);
  EXPECT_TRUE(evaluate_constraint(open, to_bytes("{ab")));
  EXPECT_FALSE(evaluate_constraint(open, to_bytes("[ab")));
  Bytes in(100, 'a');
  in[95] = 'e';
  EXPECT_TRUE(evaluate_constraint(goal("(bvsge #x00000039 (concat #x000000 k!95))", false), in));
  EXPECT_FALSE(evaluate_constraint(goal("(bvsge #x00000039 (concat #x000000 k!95))", false),
                                   to_bytes("short")));
}

TEST(SolveFixed, KeepsTheRestAndPicksNine) {
  const auto g = goal("(bvsge (concat #x000000 k!1) #x00000039)", true);
  EXPECT_EQ(to_string(solve_fixed(g, to_bytes("r?turn 1"))), "r9turn 1");
}

TEST(SolveFixed, ForcedByte) {
  EXPECT_EQ(to_string(solve_fixed(goal("(= k!0 #x7b)", true), to_bytes("abc"))), "{bc");
}

TEST(SolveFixed, Errors) {
  EXPECT_THROW(get_solution(goal("(bvult k!0 #x00)", true)), Unsat);
  EXPECT_THROW(get_solution(goal("(= (concat #x00 k!0 k!1 k!2) #x00010203)", false),
                            SolverOptions{2}),
               TooManyVars);
  EXPECT_THROW(solve_fixed(goal("(= k!5 #x41)", true), to_bytes("abc")), IndexOutOfRange);
}

TEST(GetSolution, Examples) {
  EXPECT_EQ(get_solution(goal("(bvsge (concat #x000000 k!0) #x00000039)", true)),
            (Assignment{{0, 0x39}}));
  EXPECT_EQ(get_solution(goal("(= k!2 #x2c)", true)), (Assignment{{2, 0x2c}}));
  EXPECT_EQ(get_solution(goal("(= (concat k!0 k!3) #x0102)", true)),
            (Assignment{{0, 1}, {3, 2}}));
}

TEST(GetSolution, OneVariableMatchesBruteForceMinimum) {
  std::mt19937_64 rng(3);
  const std::array ops{CmpOp::EQ, CmpOp::NE,  CmpOp::SLT, CmpOp::SLE, CmpOp::SGT,
                       CmpOp::SGE, CmpOp::ULT, CmpOp::ULE, CmpOp::UGT, CmpOp::UGE};
  for (int i = 0; i < 3000; ++i) {
    PathConstraint pc;
    const auto wide = rng() % 2 == 0;
    const auto var = wide ? widen32(Expr::byte_var(0)) : Expr::byte_var(0);
    const auto k = Expr::constant(rng() % 256, wide ? 32 : 8);
    pc.expr = rng() % 2 ? Expr::cmp(ops[rng() % ops.size()], var, k)
                        : Expr::cmp(ops[rng() % ops.size()], k, var);
    pc.positions = {0};
    pc.taken = rng() % 2;
    int want = -1;
    for (int b = 0; b < 256 && want < 0; ++b)
      if (eval_bool(pc.expr, Bytes{static_cast<std::uint8_t>(b)}) == pc.taken) want = b;
    if (want < 0) {
      EXPECT_THROW(get_solution(pc), Unsat);
    } else {
      ASSERT_EQ(get_solution(pc).at(0), want) << print(pc.assertion());
    }
  }
}

TEST(SolveFixed, SoundAndMinimalOnRandomConstraints) {
  std::mt19937_64 rng(5);
  const std::array ops{CmpOp::EQ, CmpOp::NE, CmpOp::ULT, CmpOp::SGE, CmpOp::UGT};
  for (int i = 0; i < 500; ++i) {
    Bytes seed(8);
    for (auto& b : seed) b = rng() % 256;
    const auto a = rng() % 8, b = rng() % 8;
    PathConstraint pc;
    pc.expr = Expr::cmp(ops[rng() % ops.size()],
                        Expr::concat({Expr::byte_var(a), Expr::byte_var(b)}),
                        Expr::constant(rng() % 65536, 16));
    pc.positions = positions(pc.expr);
    pc.taken = rng() % 2;
    try {
      const auto out = solve_fixed(pc, seed);
      ASSERT_TRUE(evaluate_constraint(pc, out));
      for (std::size_t j = 0; j < seed.size(); ++j) {
        if (!pc.positions.count(j)) {
          ASSERT_EQ(out[j], seed[j]);
        }
      }
    } catch (const Unsat&) {
      // Only a == b with an impossible pair can be unsat here.
      ASSERT_EQ(a, b);
    }
  }
}

// A solution that keeps every earlier constraint satisfied must steer the
// replay into the targeted arm at the same point of the path.
class NegationSoundness : public ::testing::TestWithParam<std::string> {};

TEST_P(NegationSoundness, ReplayReachesTargetArm) {
  const auto& p = targets::find(GetParam());
  std::mt19937_64 rng(21);
  int checked = 0;
  for (int i = 0; i < 150; ++i) {
    const auto seed = to_bytes(test::grammar_biased(GetParam(), rng));
    const auto t = run_concolic(p, seed);
    for (const auto& pc : t.constraints) {
      for (const auto& target : negation_targets(pc, t, nullptr)) {
        Bytes y;
        try {
          y = solve_fixed(target.goal, seed);
        } catch (const SolverError&) {
          continue;
        }
        // A default visit records one inequality per case; the replay diverges
        // at the first of them.
        std::size_t start = pc.order;
        if (pc.site.br_id == kDefaultBranch) {
          const auto& cases = t.switches.at(pc.site.head_loc()).cases;
          start -= std::find(cases.begin(), cases.end(), *pc.switch_case) - cases.begin();
        }
        bool prefix_holds = true;
        for (std::size_t j = 0; j < start && prefix_holds; ++j)
          prefix_holds = evaluate_constraint(t.constraints[j], y);
        if (!prefix_holds) continue;
        const auto r = run_concolic(p, y);
        ASSERT_GT(r.constraints.size(), start);
        for (std::size_t j = 0; j < start; ++j)
          ASSERT_EQ(r.constraints[j].node_key(), t.constraints[j].node_key());
        ASSERT_EQ(r.constraints[start].node_key(), target.target_key);
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 100);
}

INSTANTIATE_TEST_SUITE_P(Targets, NegationSoundness,
                         ::testing::Values("json_subset", "expr_lang", "ini_lang", "digits"));

}  // namespace
}  // namespace ectfuzz
