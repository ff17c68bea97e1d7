#include "ectfuzz/solver.hpp"

#include <vector>

#include "ectfuzz/smt_text.hpp"

namespace ectfuzz {

Assignment get_solution(const PathConstraint& goal, SolverOptions options) {
  const std::vector<std::size_t> vars(goal.positions.begin(), goal.positions.end());
  if (vars.size() > options.max_vars)
    throw TooManyVars("constraint over " + std::to_string(vars.size()) +
                      " bytes exceeds the solver cap of " + std::to_string(options.max_vars));

  Bytes scratch(vars.empty() ? 0 : vars.back() + 1, 0);
  if (vars.empty()) {
    if (eval_bool(goal.expr, scratch) == goal.taken) return {};
    throw Unsat("constant constraint is false: " + print(goal.assertion()));
  }

  // Odometer over 0..255 per variable; the last variable spins fastest, so the
  // first hit is the lexicographically smallest assignment.
  std::vector<unsigned> digits(vars.size(), 0);
  for (;;) {
    for (std::size_t i = 0; i < vars.size(); ++i) scratch[vars[i]] = static_cast<std::uint8_t>(digits[i]);
    if (eval_bool(goal.expr, scratch) == goal.taken) {
      Assignment out;
      for (std::size_t i = 0; i < vars.size(); ++i) out[vars[i]] = static_cast<std::uint8_t>(digits[i]);
      return out;
    }
    std::size_t k = vars.size();
    while (k > 0 && digits[k - 1] == 255) digits[--k] = 0;
    if (k == 0) break;
    ++digits[k - 1];
  }
  throw Unsat("no byte assignment satisfies " + print(goal.assertion()));
}

Bytes solve_fixed(const PathConstraint& goal, ByteView seed, SolverOptions options) {
  if (!goal.positions.empty() && *goal.positions.rbegin() >= seed.size())
    throw IndexOutOfRange(*goal.positions.rbegin());
  Bytes out(seed.begin(), seed.end());
  for (const auto& [pos, value] : get_solution(goal, options)) out[pos] = value;
  return out;
}

}  // namespace ectfuzz
