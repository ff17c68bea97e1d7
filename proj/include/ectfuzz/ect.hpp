#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ectfuzz/trace.hpp"

namespace ectfuzz {

class SchemaError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class SiteConflict : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class UnknownSite : public std::out_of_range {
  using std::out_of_range::out_of_range;
};

/// Node type tags as serialized in `tp`. Call-context nodes use kCallNode.
inline constexpr int kIfNode = 0;
inline constexpr int kSwitchNode = 1;
inline constexpr int kCallNode = 2;

struct EctNode {
  std::string loc;
  int tp = kIfNode;
  int tk = 0;
  int cs = 0;
  std::uint64_t vc = 0;
  int br = kHeadBranch;
  std::vector<std::size_t> ch;

  std::size_t parent = 0;
  std::string key;  // context-qualified identifier, unique in the tree
};

struct UpdateSummary {
  std::size_t new_taken = 0;
  std::size_t total_taken = 0;
};

struct CoverageStats {
  std::size_t taken_nodes = 0;
  std::size_t total_nodes = 0;
  std::map<int, std::size_t> taken_per_type;  // keyed by tp
};

/// Expressive coverage tree. Node 0 is the synthetic root.
///
/// Children of the root and of call nodes are call nodes (one per function
/// in the call chain) and branch heads; children of a branch head are its
/// arms: `0`/`1` for an if, one per registered case value for a switch, plus
/// `default` when the switch declares one. Untaken arms are materialized
/// eagerly with tk = 0.
class EctTree {
 public:
  EctTree();

  UpdateSummary record_trace(const Trace& trace);

  /// True iff the arm reached by negating `pc` is still untaken.
  bool untaken_direction(const PathConstraint& pc) const;
  /// Untaken case values of the switch `pc` belongs to.
  std::vector<std::uint8_t> untaken_cases(const PathConstraint& pc) const;
  bool default_untaken(const PathConstraint& pc) const;

  std::size_t node_depth(std::string_view key) const;
  const EctNode* find(std::string_view key) const;
  const EctNode& at(std::string_view key) const;
  const EctNode& node(std::size_t i) const { return nodes_[i]; }
  const EctNode& root() const { return nodes_[0]; }
  std::size_t size() const { return nodes_.size(); }

  std::uint64_t generation() const { return generation_; }
  CoverageStats stats() const;

  /// Bookkeeping for validated test cases expected to reach `key`.
  void mark_expected(const std::string& key);
  std::uint64_t expected(const std::string& key) const;

  friend bool operator==(const EctTree& a, const EctTree& b);
  friend EctTree from_json(std::string_view text);

 private:
  std::size_t add_child(std::size_t parent, EctNode node);
  std::size_t ensure_context(const std::string& context, int cs, std::size_t& new_taken);
  std::size_t ensure(std::size_t parent, const std::string& key, const std::string& loc, int tp,
                     int br);
  void take(std::size_t idx, int cs, std::size_t& new_taken);
  const EctNode& head_of(const PathConstraint& pc) const;

  std::vector<EctNode> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::string, std::uint64_t> expected_;
  std::uint64_t generation_ = 0;
};

std::string to_json(const EctTree& tree);
/// Accepts either a `{"loc":"root","ch":[...]}` document or a bare node,
/// which becomes the root's only child.
EctTree from_json(std::string_view text);

}  // namespace ectfuzz
