#include "ectfuzz/selector.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "ectfuzz/smt_text.hpp"

namespace ectfuzz {

void SelectorParams::validate() const {
  if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(gamma))
    throw std::invalid_argument("selector weights must be finite");
  if (top_k == 0) throw std::invalid_argument("top_k must be at least 1");
}

NormKey norm_key(const PathConstraint& pc) { return {pc.node_key(), normalized_text(pc.expr)}; }

std::vector<PathConstraint> phase1_dedup(std::span<const PathConstraint> constraints) {
  std::set<NormKey> seen;
  std::vector<PathConstraint> out;
  for (const auto& pc : constraints)
    if (seen.insert(norm_key(pc)).second) out.push_back(pc);
  return out;
}

double node_weight(bool untaken, std::uint64_t vc, std::size_t depth,
                   const SelectorParams& params) {
  const double v = static_cast<double>(vc);
  const double visit = params.visit_term == VisitTerm::Literal ? v : 1.0 / (1.0 + v);
  return params.alpha * (untaken ? 1.0 : 0.0) + params.beta * visit +
         params.gamma * static_cast<double>(depth);
}

double score(const EctTree& tree, const PathConstraint& pc, const SelectorParams& params) {
  const auto key = pc.node_key();
  const auto depth = params.depth_source == DepthSource::TreeDepth
                         ? tree.node_depth(key)
                         : static_cast<std::size_t>(pc.call_stack_size);
  return node_weight(tree.untaken_direction(pc), tree.at(key).vc, depth, params);
}

void DispatchMemory::record(const NormKey& key, std::uint64_t iteration) {
  seen_.emplace(key, iteration);
}

Selection phase2_select(const EctTree& tree, std::span<const PathConstraint> candidates,
                        const SelectorParams& params, const DispatchMemory& memory) {
  params.validate();
  Selection out;
  std::vector<Candidate> ranked;
  for (const auto& pc : candidates) {
    Candidate c{pc, score(tree, pc, params), norm_key(pc), tree.untaken_direction(pc)};
    if (!c.untaken && memory.contains(c.key)) {
      out.log.push_back({pc, c.weight, "dropped:redundant"});
      continue;
    }
    ranked.push_back(std::move(c));
  }
  std::sort(ranked.begin(), ranked.end(), [](const Candidate& a, const Candidate& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    if (a.pc.order != b.pc.order) return a.pc.order < b.pc.order;
    if (a.key.loc != b.key.loc) return a.key.loc < b.key.loc;
    return print(a.pc.expr) < print(b.pc.expr);
  });
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const bool keep = i < params.top_k;
    out.log.push_back({ranked[i].pc, ranked[i].weight, keep ? "selected" : "dropped:top_k"});
    if (keep) out.selected.push_back(std::move(ranked[i]));
  }
  return out;
}

namespace {

std::string arm_key(const PathConstraint& pc, int br) {
  const auto loc = pc.site.with_branch(br).loc();
  return pc.context.empty() ? loc : pc.context + "/" + loc;
}

DispatchTarget retarget_case(const PathConstraint& pc, std::uint8_t value) {
  // Both EQ and NE switch constraints compare the widened scrutinee (lhs)
  // against a case constant.
  PathConstraint goal = pc;
  goal.site = pc.site.with_branch(value);
  goal.expr = Expr::cmp(CmpOp::EQ, pc.expr.lhs(), Expr::constant(value, 32));
  goal.taken = true;
  goal.switch_case = value;
  goal.positions = positions(goal.expr);
  return {goal, arm_key(pc, value)};
}

}  // namespace

std::vector<DispatchTarget> negation_targets(const PathConstraint& pc, const Trace& trace,
                                             const EctTree* tree) {
  std::vector<DispatchTarget> out;
  if (pc.site.type == BranchType::If) {
    out.push_back({pc.negated(), arm_key(pc, pc.site.br_id == 0 ? 1 : 0)});
    return out;
  }
  if (pc.site.br_id == kDefaultBranch) {
    // x != c on the default path; its negation is case c.
    if (pc.switch_case) out.push_back({pc.negated(), arm_key(pc, *pc.switch_case)});
    return out;
  }

  const auto it = trace.switches.find(pc.site.head_loc());
  const bool has_default = it != trace.switches.end() && it->second.has_default;
  if (tree == nullptr) {
    if (it != trace.switches.end())
      for (auto c : it->second.cases)
        if (c != pc.site.br_id) out.push_back(retarget_case(pc, c));
    if (has_default) out.push_back({pc.negated(), arm_key(pc, kDefaultBranch)});
    return out;
  }
  for (auto c : tree->untaken_cases(pc)) out.push_back(retarget_case(pc, c));
  if (has_default && tree->default_untaken(pc))
    out.push_back({pc.negated(), arm_key(pc, kDefaultBranch)});
  if (out.empty()) out.push_back({pc.negated(), arm_key(pc, kDefaultBranch)});
  return out;
}

}  // namespace ectfuzz
