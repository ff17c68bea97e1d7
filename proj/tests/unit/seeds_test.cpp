#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "ectfuzz/seeds.hpp"
#include "ectfuzz/targets.hpp"
#include "support.hpp"

namespace ectfuzz {
namespace {

using namespace std::chrono_literals;
using Secs = std::chrono::duration<double>;

const BranchSite kLexSwitch = test::site("jslex.c", "jsY_lexx", 9, 3, BranchType::Switch);

Trace lex_trace(std::uint8_t taken) {
  Trace t;
  t.input = Bytes{taken};
  t.switches[kLexSwitch.head_loc()] = SwitchInfo{{40, 41, 44}, false};
  t.visits.push_back({kLexSwitch.with_branch(taken), 10, ""});
  return t;
}

std::set<std::string> all_keys(const EctTree& tree) {
  std::set<std::string> keys;
  for (std::size_t i = 1; i < tree.size(); ++i) keys.insert(tree.node(i).key);
  return keys;
}

TEST(History, FirstTraceCovered) {
  EctTree tree;
  HistoryRecord h;
  const auto t = run_concolic(targets::find("json_subset"), to_bytes("{\"a\":1}"));
  tree.record_trace(t);
  record_history(h, 1, t, tree, 0);
  ASSERT_EQ(h.entries.size(), 1u);
  EXPECT_FALSE(h.entries[0].covered.empty());
  for (const auto& k : h.entries[0].covered) EXPECT_TRUE(h.covered.count(k)) << k;
  EXPECT_EQ(h.entries[0].outcome, Outcome::Kind::Accept);
  EXPECT_EQ(h.recent.size(), 1u);
}

TEST(History, PartitionAndMonotonicity) {
  std::mt19937_64 rng(4);
  for (const auto& p : targets::registry()) {
    EctTree tree;
    HistoryRecord h;
    std::set<std::string> covered_before;
    for (int i = 0; i < 200; ++i) {
      const auto t = run_concolic(p, to_bytes(test::grammar_biased(p.name, rng)));
      tree.record_trace(t);
      record_history(h, i, t, tree, i);
      std::set<std::string> both;
      std::set_union(h.covered.begin(), h.covered.end(), h.uncovered.begin(), h.uncovered.end(),
                     std::inserter(both, both.end()));
      ASSERT_EQ(both, all_keys(tree)) << p.name;
      ASSERT_EQ(both.size(), h.covered.size() + h.uncovered.size()) << p.name;
      // Nothing covered earlier becomes uncovered again.
      for (const auto& k : covered_before) ASSERT_TRUE(h.covered.count(k)) << k;
      covered_before = h.covered;
    }
    EXPECT_EQ(h.recent.size(), HistoryRecord::kRecentCapacity);
    EXPECT_EQ(h.entries.size(), 200u);
  }
}

TEST(Saturation, Examples) {
  SaturationState s;
  rearm(s, 3, Secs(0), 0);
  EXPECT_FALSE(is_saturated(s, 4, Secs(500), 10));  // generation just bumped
  EXPECT_FALSE(is_saturated(s, 3, Secs(179), 10));
  EXPECT_TRUE(is_saturated(s, 3, Secs(181), 10));
  note_progress(s, 4, Secs(181), 10);
  EXPECT_FALSE(is_saturated(s, 4, Secs(200), 11));
  EXPECT_TRUE(is_saturated(s, 4, Secs(361), 11));
}

TEST(Saturation, IterationWindow) {
  SaturationState s;
  s.iteration_window = 5;
  rearm(s, 1, Secs(0), 10);
  for (std::uint64_t it = 11; it < 15; ++it) {
    note_progress(s, 1, Secs(1e6), it);
    EXPECT_FALSE(is_saturated(s, 1, Secs(1e6), it));
  }
  note_progress(s, 1, Secs(1e6), 15);
  EXPECT_TRUE(is_saturated(s, 1, Secs(1e6), 15));
  note_progress(s, 2, Secs(1e6), 16);
  EXPECT_FALSE(is_saturated(s, 2, Secs(1e6), 16));
}

TEST(Saturation, PureInGenerationAndClock) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 1000; ++i) {
    SaturationState s;
    rearm(s, rng() % 3, Secs(rng() % 400), rng() % 50);
    const auto g = rng() % 3;
    const Secs now(rng() % 800);
    const auto it = 50 + rng() % 50;
    EXPECT_EQ(is_saturated(s, g, now, it), is_saturated(s, g, now, it));
    EXPECT_EQ(is_saturated(s, g, now, it),
              g == s.last_generation && now - s.last_change >= s.window);
  }
}

TEST(InitialPrompt, NamesFormatAndIsStable) {
  const auto a = build_initial_seed_prompt("JSON");
  EXPECT_EQ(a, build_initial_seed_prompt("JSON"));
  EXPECT_NE(a.find("JSON parsers"), std::string::npos);
  EXPECT_NE(a.find("valid JSON"), std::string::npos);
  EXPECT_NE(a.find("exactly 4 test inputs"), std::string::npos);
  EXPECT_EQ(a.find("```"), std::string::npos);
}

TEST(FreshPrompt, ListsUncoveredCaseVerbatim) {
  EctTree tree;
  HistoryRecord h;
  const auto t = lex_trace(40);
  tree.record_trace(t);
  record_history(h, 1, t, tree, 0);
  const auto prompt = build_fresh_seed_prompt(h, "EXPR");
  EXPECT_NE(prompt.find("jslex.c_jsY_lexx:\n"), std::string::npos);
  const auto unc = prompt.find("Uncovered branches");
  ASSERT_NE(unc, std::string::npos);
  EXPECT_NE(prompt.find("  jslex.c_jsY_lexx_9_3_switch_44\n", unc), std::string::npos);
  EXPECT_NE(prompt.find("  jslex.c_jsY_lexx_9_3_switch_40\n"), std::string::npos);
  EXPECT_LT(prompt.find("Step 1"), prompt.find("Step 2"));
  EXPECT_LT(prompt.find("Step 2"), prompt.find("Step 3"));
  EXPECT_NE(prompt.find("mutating a recent input or from scratch"), std::string::npos);
  EXPECT_EQ(prompt, build_fresh_seed_prompt(h, "EXPR"));
}

TEST(FreshPrompt, EmptyUncoveredAsksForDiversity) {
  EctTree tree;
  HistoryRecord h;
  Trace t = lex_trace(40);
  t.visits.push_back({kLexSwitch.with_branch(41), 10, ""});
  t.visits.push_back({kLexSwitch.with_branch(44), 10, ""});
  tree.record_trace(t);
  record_history(h, 1, t, tree, 0);
  ASSERT_TRUE(h.uncovered.empty());
  const auto prompt = build_fresh_seed_prompt(h, "EXPR");
  EXPECT_EQ(prompt.find("Uncovered branches"), std::string::npos);
  EXPECT_NE(prompt.find("differ as much as possible"), std::string::npos);
}

int count_loc_lines(std::string_view section) {
  int n = 0;
  for (std::size_t at = 0; (at = section.find("\n  ", at)) != std::string_view::npos; ++at) ++n;
  return n;
}

TEST(FreshPrompt, BudgetsAndUncoveredPresence) {
  std::mt19937_64 rng(6);
  for (const auto& p : targets::registry()) {
    EctTree tree;
    HistoryRecord h;
    for (int i = 0; i < 80; ++i) {
      const auto t = run_concolic(p, to_bytes(test::grammar_biased(p.name, rng)));
      tree.record_trace(t);
      record_history(h, i, t, tree, i);
      const auto prompt = build_fresh_seed_prompt(h, p.format_label());
      const auto cov = prompt.find("Covered branches");
      const auto unc = prompt.find("Uncovered branches");
      const auto rec = prompt.find("Recent test inputs");
      ASSERT_NE(rec, std::string::npos);
      if (cov != std::string::npos) {
        const auto end = unc == std::string::npos ? rec : unc;
        ASSERT_LE(count_loc_lines(std::string_view(prompt).substr(cov, end - cov)), 20);
      }
      bool open_arm = false;
      for (std::size_t n = 1; n < tree.size(); ++n)
        open_arm |= tree.node(n).tk == 0;
      ASSERT_EQ(unc != std::string::npos, open_arm) << p.name;
      if (unc != std::string::npos) {
        const auto lines = count_loc_lines(std::string_view(prompt).substr(unc, rec - unc));
        ASSERT_GE(lines, 1);
        ASSERT_LE(lines, 20);
      }
      const auto blocks = llm::parse_blocks(prompt);
      ASSERT_EQ(blocks.size(), std::min<std::size_t>(h.recent.size(), 3));
      ASSERT_EQ(blocks.back(), h.recent.back());
    }
  }
}

TEST(RandomSeed, Reproducible) {
  std::mt19937_64 a(42), b(42);
  EXPECT_TRUE(random_seed(0, a).empty());
  const auto x = random_seed(64, a);
  EXPECT_EQ(x, (random_seed(0, b), random_seed(64, b)));
  for (auto c : x) EXPECT_TRUE(c >= 0x20 && c <= 0x7e);
}

TEST(RandomSeed, JsonPassRateRecorded) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> len(1, 32);
  int pass = 0;
  for (int i = 0; i < 1000; ++i)
    pass += targets::json_reference(to_string(random_seed(len(rng), rng))) == Outcome::Kind::Accept;
  RecordProperty("json_random_pass_rate", std::to_string(pass / 1000.0));
  std::printf("random seeds accepted by json_subset: %d/1000\n", pass);
}

TEST(Acquire, InitialMockSeedsAccepted) {
  llm::MockTransport mock(llm::MockMode::SyntaxAware);
  std::mt19937_64 rng(2);
  for (const auto& p : targets::registry()) {
    const auto got = acquire_seeds(SeedTiming::Initial, {}, p.format_label(), mock, "m", rng);
    EXPECT_EQ(got.provenance, "seed:llm:initial");
    ASSERT_EQ(got.inputs.size(), kSeedsPerAcquisition);
    int accepted = 0;
    for (const auto& s : got.inputs)
      accepted += run_concolic(p, s).outcome.kind == Outcome::Kind::Accept;
    EXPECT_GE(accepted, 1) << p.name;
  }
}

TEST(Acquire, FreshMutatesRecentInput) {
  EctTree tree;
  HistoryRecord h;
  const auto t = run_concolic(targets::find("json_subset"), to_bytes("{\"a\":1}"));
  tree.record_trace(t);
  record_history(h, 1, t, tree, 0);
  llm::MockTransport mock(llm::MockMode::SyntaxAware);
  std::mt19937_64 rng(2);
  const auto got = acquire_seeds(SeedTiming::Fresh, h, "JSON", mock, "m", rng);
  EXPECT_EQ(got.provenance, "seed:llm:fresh");
  EXPECT_NE(got.prompt.find("{\"a\":1}"), std::string::npos);
  EXPECT_NE(std::find(got.inputs.begin(), got.inputs.end(), to_bytes("[{\"a\":1},true]")),
            got.inputs.end());
  for (const auto& s : got.inputs)
    EXPECT_EQ(targets::json_reference(to_string(s)), Outcome::Kind::Accept) << to_string(s);
}

TEST(Acquire, TransportDownFallsBackToRandom) {
  llm::DownTransport down;
  std::mt19937_64 rng(2);
  const auto got = acquire_seeds(SeedTiming::Initial, {}, "JSON", down, "m", rng);
  EXPECT_EQ(got.provenance, "seed:random");
  EXPECT_EQ(got.inputs.size(), kSeedsPerAcquisition);
  EXPECT_FALSE(got.error.empty());
}

}  // namespace
}  // namespace ectfuzz
