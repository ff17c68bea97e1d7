#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ectfuzz/ect.hpp"
#include "ectfuzz/trace.hpp"

namespace ectfuzz {

enum class VisitTerm { Literal, Inverse };
enum class DepthSource { TreeDepth, CallStack };

struct SelectorParams {
  double alpha = 1.0;
  double beta = 3.0;
  double gamma = 0.8;
  std::size_t top_k = 16;
  /// Literal uses beta * vc; Inverse uses beta / (1 + vc).
  VisitTerm visit_term = VisitTerm::Literal;
  DepthSource depth_source = DepthSource::TreeDepth;

  /// Throws std::invalid_argument on non-finite weights or top_k == 0.
  void validate() const;
};

struct NormKey {
  std::string loc;   // context-qualified node key
  std::string expr;  // constraint text with every k!n replaced by k!*
  friend auto operator<=>(const NormKey&, const NormKey&) = default;
  friend bool operator==(const NormKey&, const NormKey&) = default;
};

NormKey norm_key(const PathConstraint& pc);

/// Drops constraints that repeat an earlier (site, normalized expression)
/// key of the same trace. Order is preserved.
std::vector<PathConstraint> phase1_dedup(std::span<const PathConstraint> constraints);
inline std::vector<PathConstraint> phase1_dedup(const Trace& trace) {
  return phase1_dedup(trace.constraints);
}

/// alpha * untaken + beta * visit_cnt + gamma * depth, with the visit term
/// shaped by params.visit_term.
double node_weight(bool untaken, std::uint64_t vc, std::size_t depth, const SelectorParams& params);
double score(const EctTree& tree, const PathConstraint& pc, const SelectorParams& params);

/// Norm keys handed to a solver in earlier iterations.
class DispatchMemory {
 public:
  void record(const NormKey& key, std::uint64_t iteration);
  bool contains(const NormKey& key) const { return seen_.count(key) != 0; }
  std::size_t size() const { return seen_.size(); }

 private:
  std::map<NormKey, std::uint64_t> seen_;
};

struct Candidate {
  PathConstraint pc;
  double weight = 0.0;
  NormKey key;
  bool untaken = false;
};

struct SelectionRecord {
  PathConstraint pc;
  double weight = 0.0;
  std::string decision;  // "selected", "dropped:redundant", "dropped:top_k"
};

struct Selection {
  std::vector<Candidate> selected;
  std::vector<SelectionRecord> log;
};

/// Ranks phase-1 survivors by node weight. A candidate is dropped when the
/// branch its negation leads to is already taken and its norm key was
/// dispatched before. Ties break on trace order, then loc, then expression.
Selection phase2_select(const EctTree& tree, std::span<const PathConstraint> candidates,
                        const SelectorParams& params, const DispatchMemory& memory);

/// One negated constraint to solve, with the arm a solution should reach.
struct DispatchTarget {
  PathConstraint goal;     // evaluate_constraint(goal, x) holds on good inputs
  std::string target_key;  // ECT node the solution is expected to reach
};

/// Negations worth solving for `pc`. An if yields its opposite arm. A switch
/// case yields one equality per other case value: every registered case when
/// `tree` is null, only untaken ones otherwise, plus the plain negation when
/// the default arm is (still) open.
std::vector<DispatchTarget> negation_targets(const PathConstraint& pc, const Trace& trace,
                                             const EctTree* tree);

}  // namespace ectfuzz
