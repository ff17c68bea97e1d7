#include "ectfuzz/ect.hpp"

#include <algorithm>
#include <functional>

#include <json.hpp>

namespace ectfuzz {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string join_key(const std::string& context, const std::string& loc) {
  return context.empty() ? loc : context + "/" + loc;
}

int type_tag(BranchType t) { return t == BranchType::If ? kIfNode : kSwitchNode; }

}  // namespace

EctTree::EctTree() {
  EctNode root;
  root.loc = "root";
  root.tp = kCallNode;
  nodes_.push_back(std::move(root));
}

std::size_t EctTree::add_child(std::size_t parent, EctNode node) {
  node.parent = parent;
  const auto idx = nodes_.size();
  index_.emplace(node.key, idx);
  nodes_.push_back(std::move(node));
  nodes_[parent].ch.push_back(idx);
  return idx;
}

std::size_t EctTree::ensure(std::size_t parent, const std::string& key, const std::string& loc,
                            int tp, int br) {
  if (auto it = index_.find(key); it != index_.end()) {
    if (nodes_[it->second].tp != tp)
      throw SiteConflict("node " + loc + " recorded with branch type " + std::to_string(tp) +
                         " but the tree holds type " + std::to_string(nodes_[it->second].tp));
    return it->second;
  }
  EctNode n;
  n.loc = loc;
  n.tp = tp;
  n.br = br;
  n.key = key;
  return add_child(parent, std::move(n));
}

void EctTree::take(std::size_t idx, int cs, std::size_t& new_taken) {
  auto& n = nodes_[idx];
  if (n.tk == 0) ++new_taken;
  n.tk = 1;
  n.vc += 1;
  n.cs = cs;
}

std::size_t EctTree::ensure_context(const std::string& context, int cs,
                                    std::size_t& new_taken) {
  std::size_t parent = 0;
  std::string prefix;
  std::size_t start = 0;
  int level = 0;
  while (start < context.size()) {
    auto end = context.find('/', start);
    if (end == std::string::npos) end = context.size();
    const auto func = context.substr(start, end - start);
    prefix = prefix.empty() ? func : prefix + "/" + func;
    ++level;
    const auto before = nodes_.size();
    parent = ensure(parent, prefix, func, kCallNode, kHeadBranch);
    // A frame reached without its own call record (synthetic traces) counts once.
    if (nodes_.size() != before) take(parent, std::min(cs, level), new_taken);
    start = end + 1;
  }
  return parent;
}

UpdateSummary EctTree::record_trace(const Trace& trace) {
  std::size_t new_taken = 0;

  for (const auto& call : trace.calls) {
    const auto before = nodes_.size();
    const auto idx = ensure_context(call.context, call.call_stack_size, new_taken);
    if (idx != 0 && nodes_.size() == before) take(idx, call.call_stack_size, new_taken);
  }

  for (const auto& v : trace.visits) {
    const auto parent = ensure_context(v.context, v.call_stack_size, new_taken);
    const auto head_site = v.site.with_branch(kHeadBranch);
    const auto head_loc = head_site.loc();
    const int tp = type_tag(v.site.type);
    const auto head = ensure(parent, join_key(v.context, head_loc), head_loc, tp, kHeadBranch);
    take(head, v.call_stack_size, new_taken);

    auto arm = [&](int br) {
      const auto loc = v.site.with_branch(br).loc();
      return ensure(head, join_key(v.context, loc), loc, tp, br);
    };
    if (v.site.type == BranchType::If) {
      arm(0);
      arm(1);
    } else if (auto it = trace.switches.find(head_loc); it != trace.switches.end()) {
      for (auto c : it->second.cases) arm(c);
      if (it->second.has_default) arm(kDefaultBranch);
    }
    take(arm(v.site.br_id), v.call_stack_size, new_taken);
  }

  if (new_taken > 0) ++generation_;
  return {new_taken, stats().taken_nodes};
}

const EctNode* EctTree::find(std::string_view key) const {
  auto it = index_.find(std::string(key));
  return it == index_.end() ? nullptr : &nodes_[it->second];
}

const EctNode& EctTree::at(std::string_view key) const {
  if (const auto* n = find(key)) return *n;
  throw UnknownSite("no coverage node " + std::string(key));
}

const EctNode& EctTree::head_of(const PathConstraint& pc) const {
  return nodes_[at(pc.node_key()).parent];
}

bool EctTree::untaken_direction(const PathConstraint& pc) const {
  const auto& head = head_of(pc);
  if (pc.site.type == BranchType::If) {
    const auto other = pc.site.with_branch(pc.site.br_id == 0 ? 1 : 0).loc();
    return at(join_key(pc.context, other)).tk == 0;
  }
  if (pc.site.br_id == kDefaultBranch) {
    // Negating `x != c` on the default path leads to case c.
    if (!pc.switch_case) return false;
    const auto* n = find(join_key(pc.context, pc.site.with_branch(*pc.switch_case).loc()));
    return n != nullptr && n->tk == 0;
  }
  return std::any_of(head.ch.begin(), head.ch.end(), [&](std::size_t i) {
    return nodes_[i].br != pc.site.br_id && nodes_[i].tk == 0;
  });
}

std::vector<std::uint8_t> EctTree::untaken_cases(const PathConstraint& pc) const {
  std::vector<std::uint8_t> out;
  for (auto i : head_of(pc).ch) {
    const auto& n = nodes_[i];
    if (n.tk == 0 && n.br >= 0 && n.br != pc.site.br_id)
      out.push_back(static_cast<std::uint8_t>(n.br));
  }
  return out;
}

bool EctTree::default_untaken(const PathConstraint& pc) const {
  const auto* n = find(join_key(pc.context, pc.site.with_branch(kDefaultBranch).loc()));
  return n != nullptr && n->tk == 0;
}

std::size_t EctTree::node_depth(std::string_view key) const {
  auto it = index_.find(std::string(key));
  if (it == index_.end()) throw UnknownSite("no coverage node " + std::string(key));
  std::size_t idx = it->second;
  std::size_t depth = 0;
  while (idx != 0) {
    idx = nodes_[idx].parent;
    ++depth;
  }
  return depth;
}

CoverageStats EctTree::stats() const {
  CoverageStats s;
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    ++s.total_nodes;
    if (nodes_[i].tk) {
      ++s.taken_nodes;
      ++s.taken_per_type[nodes_[i].tp];
    }
  }
  return s;
}

void EctTree::mark_expected(const std::string& key) { ++expected_[key]; }

std::uint64_t EctTree::expected(const std::string& key) const {
  auto it = expected_.find(key);
  return it == expected_.end() ? 0 : it->second;
}

bool operator==(const EctTree& a, const EctTree& b) {
  std::function<bool(std::size_t, std::size_t)> same = [&](std::size_t i, std::size_t j) {
    const auto& x = a.nodes_[i];
    const auto& y = b.nodes_[j];
    if (x.loc != y.loc || x.tp != y.tp || x.tk != y.tk || x.cs != y.cs || x.vc != y.vc ||
        x.br != y.br || x.ch.size() != y.ch.size())
      return false;
    for (std::size_t k = 0; k < x.ch.size(); ++k)
      if (!same(x.ch[k], y.ch[k])) return false;
    return true;
  };
  return same(0, 0);
}

namespace {

ordered_json node_json(const EctTree& t, std::size_t idx) {
  const auto& n = t.node(idx);
  ordered_json j;
  j["loc"] = n.loc;
  if (idx != 0) {
    j["tp"] = n.tp;
    j["tk"] = n.tk;
    j["cs"] = n.cs;
    j["vc"] = n.vc;
    j["br"] = n.br;
  }
  if (idx == 0 || !n.ch.empty()) {
    j["ch"] = ordered_json::array();
    for (auto c : n.ch) j["ch"].push_back(node_json(t, c));
  }
  return j;
}

}  // namespace

std::string to_json(const EctTree& tree) { return node_json(tree, 0).dump(2) + "\n"; }

EctTree from_json(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("ECT document is not JSON: ") + e.what());
  }

  auto int_field = [](const ordered_json& j, const char* name) -> long long {
    if (!j.contains(name)) throw SchemaError(std::string("ECT node missing field '") + name + "'");
    const auto& v = j.at(name);
    if (!v.is_number_integer())
      throw SchemaError(std::string("ECT field '") + name + "' must be an integer");
    return v.get<long long>();
  };

  EctTree tree;
  std::function<void(const ordered_json&, std::size_t, const std::string&)> load =
      [&](const ordered_json& j, std::size_t parent, const std::string& context) {
        if (!j.is_object()) throw SchemaError("ECT node must be an object");
        for (const auto& [k, v] : j.items()) {
          static const std::vector<std::string> known{"loc", "tp", "tk", "cs", "vc", "br", "ch"};
          if (std::find(known.begin(), known.end(), k) == known.end())
            throw SchemaError("unknown ECT field '" + k + "'");
        }
        if (!j.contains("loc") || !j["loc"].is_string()) throw SchemaError("ECT node needs a loc");
        EctNode n;
        n.loc = j["loc"].get<std::string>();
        n.tp = static_cast<int>(int_field(j, "tp"));
        n.tk = static_cast<int>(int_field(j, "tk"));
        n.cs = static_cast<int>(int_field(j, "cs"));
        const auto vc = int_field(j, "vc");
        n.br = static_cast<int>(int_field(j, "br"));
        if (n.tp < kIfNode || n.tp > kCallNode) throw SchemaError("ECT tp out of range");
        if (n.tk != 0 && n.tk != 1) throw SchemaError("ECT tk must be 0 or 1");
        if (vc < 0 || n.cs < 0) throw SchemaError("ECT counters must be non-negative");
        n.vc = static_cast<std::uint64_t>(vc);
        std::string child_context = context;
        if (n.tp == kCallNode) {
          n.key = join_key(context, n.loc);
          child_context = n.key;
        } else {
          n.key = join_key(context, n.loc);
        }
        if (tree.index_.count(n.key)) throw SchemaError("duplicate ECT node " + n.key);
        const auto idx = tree.add_child(parent, std::move(n));
        if (j.contains("ch")) {
          if (!j["ch"].is_array()) throw SchemaError("ECT ch must be an array");
          for (const auto& c : j["ch"]) load(c, idx, child_context);
        }
      };

  if (!doc.is_object()) throw SchemaError("ECT document must be an object");
  if (doc.contains("loc") && doc["loc"] == "root") {
    for (const auto& [k, v] : doc.items())
      if (k != "loc" && k != "ch") throw SchemaError("unknown ECT root field '" + k + "'");
    if (!doc.contains("ch") || !doc["ch"].is_array()) throw SchemaError("ECT root needs ch");
    for (const auto& c : doc["ch"]) load(c, 0, "");
  } else {
    load(doc, 0, "");
  }
  return tree;
}

}  // namespace ectfuzz
