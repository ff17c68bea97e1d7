#pragma once

#include <map>
#include <stdexcept>

#include "ectfuzz/trace.hpp"

namespace ectfuzz {

class SolverError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class Unsat : public SolverError {
  using SolverError::SolverError;
};
class TooManyVars : public SolverError {
  using SolverError::SolverError;
};

using Assignment = std::map<std::size_t, std::uint8_t>;

struct SolverOptions {
  std::size_t max_vars = 3;
};

/// Smallest assignment to `goal.positions`, in lexicographic byte order with
/// the lowest position most significant, under which `goal` holds.
Assignment get_solution(const PathConstraint& goal, SolverOptions options = {});

/// `seed` with only goal.positions rewritten to get_solution(goal).
Bytes solve_fixed(const PathConstraint& goal, ByteView seed, SolverOptions options = {});

}  // namespace ectfuzz
