#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include "ectfuzz/targets.hpp"
#include "support.hpp"

namespace ectfuzz {
namespace {

using K = Outcome::Kind;

K run(const std::string& target, std::string_view in) {
  return run_concolic(targets::find(target), to_bytes(in)).outcome.kind;
}

TEST(JsonSubset, Examples) {
  EXPECT_EQ(run("json_subset", "{}"), K::Accept);
  EXPECT_EQ(run("json_subset", R"({"a":1})"), K::Accept);
  EXPECT_EQ(run("json_subset", "{,}"), K::Reject);
  EXPECT_EQ(run("json_subset", R"( [true, false, null, -0, 12, "x\né", {"k": []}] )"),
            K::Accept);
  EXPECT_EQ(run("json_subset", "[1,]"), K::Reject);
  EXPECT_EQ(run("json_subset", "01"), K::Reject);
  EXPECT_EQ(run("json_subset", R"("\u0000")"), K::Crash);
}

TEST(ExprLang, Examples) {
  EXPECT_EQ(run("expr_lang", "(1+2)*3"), K::Accept);
  EXPECT_EQ(run("expr_lang", "1+"), K::Reject);
  EXPECT_EQ(run("expr_lang", "return f(a, -b);x;"), K::Accept);
  EXPECT_EQ(run("expr_lang", "r9turn"), K::Accept);
  EXPECT_EQ(run("expr_lang", "r9turn 1"), K::Reject);
  EXPECT_EQ(run("expr_lang", ""), K::Reject);
  EXPECT_EQ(run("expr_lang", "1234567890"), K::Crash);
}

TEST(ExprLang, DeepNestingRaisesCallStack) {
  const auto t = run_concolic(targets::find("expr_lang"), to_bytes("((((1))))"));
  int deepest = 0;
  for (const auto& pc : t.constraints) deepest = std::max(deepest, pc.call_stack_size);
  EXPECT_GE(deepest, 20);
  EXPECT_EQ(t.outcome.kind, K::Accept);
}

TEST(IniLang, Examples) {
  EXPECT_EQ(run("ini_lang", "[s]\nk=v"), K::Accept);
  EXPECT_EQ(run("ini_lang", ""), K::Accept);
  EXPECT_EQ(run("ini_lang", "=v"), K::Reject);
  EXPECT_EQ(run("ini_lang", "; c\n# d\n\n[a.b] \nx = 1\t2\n"), K::Accept);
  EXPECT_EQ(run("ini_lang", "[abcdefghijklmnopq]"), K::Crash);
}

TEST(Digits, Examples) {
  EXPECT_EQ(run("digits", "0123456789"), K::Accept);
  EXPECT_EQ(run("digits", "12a"), K::Reject);
  EXPECT_EQ(run("digits", ""), K::Reject);
  const auto t = run_concolic(targets::find("digits"), Bytes(96, '5'));
  EXPECT_EQ(t.constraints.size(), 192u);
}

TEST(Registry, LookupAndUnknown) {
  EXPECT_EQ(targets::registry().size(), 4u);
  EXPECT_EQ(targets::find("ini_lang").format, InputFormat::Ini);
  EXPECT_EQ(targets::find("digits").format_label(), "DIGITS");
  EXPECT_THROW(targets::find("nope"), std::invalid_argument);
}

class GrammarOracle : public ::testing::TestWithParam<std::string> {};

TEST_P(GrammarOracle, AgreesOnRandomInputs) {
  const auto& name = GetParam();
  std::mt19937_64 rng(1234);
  std::map<K, int> seen;
  for (int i = 0; i < 10000; ++i) {
    const auto in = test::grammar_biased(name, rng);
    const auto got = run(name, in);
    ASSERT_EQ(got, targets::reference_outcome(name, in)) << '"' << in << '"';
    ++seen[got];
  }
  EXPECT_GT(seen[K::Accept], 0);
  EXPECT_GT(seen[K::Reject], 0);
}

INSTANTIATE_TEST_SUITE_P(Targets, GrammarOracle,
                         ::testing::Values("json_subset", "expr_lang", "ini_lang", "digits"));

// Targets may only see bytes through the DSL accessors.
TEST(TargetLint, NoConcreteByteAccess) {
  const std::regex banned(
      R"(\bconcrete|\bByteView\b|\bBytes\b|\beval(_bool)?\s*\(|string_view|\bstd::string\b|\[[^\]]*pos\])");
  const std::filesystem::path dir = std::filesystem::path(ECTFUZZ_SOURCE_DIR) / "src" / "targets";
  int scanned = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().filename() == "reference.cpp") continue;
    std::ifstream f(entry.path());
    std::string line;
    int n = 0;
    while (std::getline(f, line)) {
      ++n;
      const auto comment = line.find("//");
      const auto code = comment == std::string::npos ? line : line.substr(0, comment);
      EXPECT_FALSE(std::regex_search(code, banned)) << entry.path().filename() << ':' << n << ": " << line;
    }
    ++scanned;
  }
  EXPECT_GE(scanned, 5);
}

}  // namespace
}  // namespace ectfuzz
