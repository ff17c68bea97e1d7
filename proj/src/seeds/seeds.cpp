#include <map>
#include <regex>
#include <sstream>

#include "ectfuzz/seeds.hpp"

namespace ectfuzz {

namespace {

std::string_view loc_of_key(std::string_view key) {
  const auto slash = key.rfind('/');
  return slash == std::string_view::npos ? key : key.substr(slash + 1);
}

std::string file_func(const std::string& loc) {
  static const std::regex tail(R"(_\d+_\d+_(if|switch)(_[A-Za-z0-9]+)?$)");
  return std::regex_replace(loc, tail, "");
}

// Arm locs for one side of the partition, deduplicated across contexts.
std::vector<std::string> arm_locs(const std::set<std::string>& keys) {
  static const std::regex arm(R"(_\d+_\d+_(if|switch)_[A-Za-z0-9]+$)");
  std::set<std::string> locs;
  for (const auto& k : keys) {
    std::string loc(loc_of_key(k));
    if (std::regex_search(loc, arm)) locs.insert(std::move(loc));
  }
  return {locs.begin(), locs.end()};
}

void grouped(std::ostringstream& out, const std::vector<std::string>& locs) {
  std::map<std::string, std::vector<std::string>> groups;
  for (std::size_t i = 0; i < locs.size() && i < kPromptLocBudget; ++i)
    groups[file_func(locs[i])].push_back(locs[i]);
  for (const auto& [group, members] : groups) {
    out << group << ":\n";
    for (const auto& m : members) out << "  " << m << '\n';
  }
}

std::string reply_format(std::size_t count) {
  return "Reply with exactly " + std::to_string(count) +
         " test inputs, each inside its own fenced code block. Inside a block, write \\\\ for a "
         "backslash and \\xHH for a byte that is not printable.\n";
}

}  // namespace

void record_history(HistoryRecord& h, std::uint64_t id, const Trace& trace, const EctTree& tree,
                    std::uint64_t iteration) {
  HistoryEntry e{id, trace.input, {}, trace.outcome.kind, iteration};
  for (const auto& v : trace.visits)
    e.covered.insert(v.context.empty() ? v.site.loc() : v.context + "/" + v.site.loc());
  h.entries.push_back(std::move(e));

  h.covered.clear();
  h.uncovered.clear();
  for (std::size_t i = 1; i < tree.size(); ++i) {
    const auto& n = tree.node(i);
    (n.tk > 0 ? h.covered : h.uncovered).insert(n.key);
  }

  h.recent.push_back(trace.input);
  while (h.recent.size() > HistoryRecord::kRecentCapacity) h.recent.pop_front();
}

void note_progress(SaturationState& s, std::uint64_t generation,
                   std::chrono::duration<double> now, std::uint64_t iteration) {
  if (generation != s.last_generation) rearm(s, generation, now, iteration);
}

void rearm(SaturationState& s, std::uint64_t generation, std::chrono::duration<double> now,
           std::uint64_t iteration) {
  s.last_generation = generation;
  s.last_change = now;
  s.last_change_iteration = iteration;
}

bool is_saturated(const SaturationState& s, std::uint64_t generation,
                  std::chrono::duration<double> now, std::uint64_t iteration) {
  if (generation != s.last_generation) return false;
  if (s.iteration_window) return iteration - s.last_change_iteration >= *s.iteration_window;
  return now - s.last_change >= s.window;
}

std::string build_initial_seed_prompt(std::string_view format, std::size_t count) {
  std::ostringstream out;
  out << "You are a test input generator for " << format << " parsers.\n\n"
      << "Public bug reports and fuzzing corpora for " << format
      << " parsers contain inputs that once crashed or confused them: deep nesting, unusual "
         "escapes, boundary numbers, empty or missing parts.\n\n"
      << "Think step by step.\n"
      << "Step 1: recall input features that such reports exercised.\n"
      << "Step 2: write inputs that combine those features while staying syntactically valid "
      << format << ".\n\n"
      << reply_format(count);
  return out.str();
}

std::string build_fresh_seed_prompt(const HistoryRecord& h, std::string_view format,
                                    std::size_t count) {
  auto uncovered = arm_locs(h.uncovered);
  const auto covered = arm_locs(h.covered);
  // Prefer arms no context has reached; fall back to context-specific ones.
  std::vector<std::string> never;
  for (const auto& loc : uncovered)
    if (!std::binary_search(covered.begin(), covered.end(), loc)) never.push_back(loc);
  if (!never.empty()) uncovered = std::move(never);

  std::ostringstream out;
  out << "You are a test input generator for " << format << " parsers. "
      << "Coverage has stopped growing.\n\n";
  if (!covered.empty()) {
    out << "Covered branches, grouped by function:\n";
    grouped(out, covered);
    out << '\n';
  }
  if (!uncovered.empty()) {
    out << "Uncovered branches, grouped by function:\n";
    grouped(out, uncovered);
    out << '\n';
  }
  if (!h.recent.empty()) {
    out << "Recent test inputs:\n";
    const auto n = std::min(h.recent.size(), kPromptRecentInputs);
    for (auto it = h.recent.end() - static_cast<std::ptrdiff_t>(n); it != h.recent.end(); ++it)
      out << "```text\n" << llm::escape_bytes(*it) << "\n```\n";
    out << '\n';
  }
  out << "Think step by step.\n";
  if (uncovered.empty()) {
    out << "Step 1: look at which kinds of input the recent test inputs already cover.\n"
        << "Step 2: think of structures they never use.\n"
        << "Step 3: write inputs that differ as much as possible from the recent ones.\n\n";
  } else {
    out << "Step 1: compare the covered and uncovered branches and note which functions and "
           "cases were never reached.\n"
        << "Step 2: infer which input bytes or structures drive execution into them.\n"
        << "Step 3: write new inputs, either by mutating a recent input or from scratch, each "
           "valid "
        << format << ".\n\n";
  }
  out << reply_format(count);
  return out.str();
}

Bytes random_seed(std::size_t length, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> printable(0x20, 0x7e);
  Bytes out(length);
  for (auto& b : out) b = static_cast<std::uint8_t>(printable(rng));
  return out;
}

AcquiredSeeds acquire_seeds(SeedTiming timing, const HistoryRecord& h, std::string_view format,
                            llm::Transport& transport, const std::string& model,
                            std::mt19937_64& rng, std::size_t count) {
  AcquiredSeeds out;
  out.prompt = timing == SeedTiming::Initial ? build_initial_seed_prompt(format, count)
                                             : build_fresh_seed_prompt(h, format, count);
  try {
    out.response = transport.complete({model, 0.0, "", out.prompt}).raw;
    out.inputs = llm::parse_blocks(out.response);
    if (out.inputs.size() > count) out.inputs.resize(count);
    if (out.inputs.empty()) out.error = "reply held no fenced blocks";
  } catch (const llm::TransportError& e) {
    out.error = e.what();
  }
  if (!out.inputs.empty()) {
    out.provenance = timing == SeedTiming::Initial ? "seed:llm:initial" : "seed:llm:fresh";
    return out;
  }
  out.provenance = "seed:random";
  std::uniform_int_distribution<std::size_t> length(1, 32);
  for (std::size_t i = 0; i < count; ++i) out.inputs.push_back(random_seed(length(rng), rng));
  return out;
}

}  // namespace ectfuzz
