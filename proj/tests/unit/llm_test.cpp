#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <json.hpp>
#include <random>
#include <thread>

#include "ectfuzz/llm.hpp"
#include "ectfuzz/smt_text.hpp"
#include "ectfuzz/solver.hpp"
#include "ectfuzz/targets.hpp"
#include "support.hpp"

namespace ectfuzz::llm {
namespace {

PathConstraint goal(const std::string& text, bool taken = true) {
  PathConstraint pc;
  pc.expr = parse_expr(text);
  pc.positions = positions(pc.expr);
  pc.taken = taken;
  return pc;
}

Bytes restore(const MaskedSeed& m, ByteView seed) {
  Bytes out;
  std::string text = m.text;
  text.resize(text.size() - std::string_view("[xxx]").size());
  for (const auto& [token, pos] : m.constrained_positions) {
    const auto at = text.find(token);
    EXPECT_NE(at, std::string::npos);
    text.replace(at, token.size(), escape_bytes(seed.subspan(pos, 1)));
  }
  return unescape_bytes(text);
}

TEST(Escape, RoundTripsRandomBytes) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    Bytes b(rng() % 40);
    for (auto& x : b) x = rng() % 256;
    const auto text = escape_bytes(b);
    ASSERT_EQ(unescape_bytes(text), b);
    ASSERT_EQ(text.find('`'), std::string::npos);
    for (unsigned char c : text) ASSERT_TRUE(c == '\n' || (c >= 0x20 && c < 0x7f));
  }
}

TEST(Escape, MaskLookalikesAreHidden) {
  EXPECT_EQ(escape_bytes(to_bytes("a[k!1]b[xxx]")), "a\\x5bk!1]b\\x5bxxx]");
  EXPECT_EQ(escape_bytes(to_bytes("[s]\n\\")), "[s]\n\\\\");
  EXPECT_EQ(escape_bytes(Bytes{0x00, 0xff, '\t'}), "\\x00\\xff\\x09");
}

TEST(MaskSeed, RunningExample) {
  std::string seed = "function f(x) { var y = x * 2; if (y > 10) { y = y - 1; } else { y = 0; } ";
  seed.resize(94, ' ');
  seed += "r?turn y; }";
  const auto g = goal("(bvsgt (concat #x000000 k!95) #x00000039)");
  const auto m = mask_seed(g, to_bytes(seed));
  EXPECT_TRUE(m.text.ends_with("r[k!95][xxx]"));
  EXPECT_EQ(m.flexible_origin, 96u);
  ASSERT_EQ(m.constrained_positions.size(), 1u);
  EXPECT_EQ(m.constrained_positions.at("[k!95]"), 95u);
  EXPECT_EQ(restore(m, to_bytes(seed)), to_bytes(seed.substr(0, 96)));
}

TEST(MaskSeed, ByteZero) {
  const auto m = mask_seed(goal("(= k!0 #x7b)"), to_bytes("[1,2]"));
  EXPECT_EQ(m.text, "[k!0][xxx]");
  EXPECT_EQ(m.flexible_origin, 1u);
}

TEST(MaskSeed, SeveralPositionsAscending) {
  const auto m = mask_seed(goal("(= (concat k!3 k!1) #x4142)"), to_bytes("abcdef"));
  EXPECT_EQ(m.text, "a[k!1]c[k!3][xxx]");
  EXPECT_EQ(m.flexible_origin, 4u);
}

TEST(MaskSeed, RestoresPrefixOnRandomInputs) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 500; ++i) {
    Bytes seed(1 + rng() % 24);
    for (auto& x : seed) x = rng() % 256;
    const auto g = test::random_goal(rng, seed.size());
    const auto m = mask_seed(g, seed);
    const auto last = *g.positions.rbegin();
    ASSERT_EQ(m.flexible_origin, last + 1);
    ASSERT_EQ(m.constrained_positions.size(), g.positions.size());
    ASSERT_EQ(restore(m, seed), Bytes(seed.begin(), seed.begin() + last + 1));
  }
}

TEST(SolvePrompt, ContentsAndDeterminism) {
  const auto g = goal("(bvsge (concat #x000000 k!5) #x00000030)");
  const auto seed = to_bytes("{\"a\":x}");
  const auto a = build_solve_complete_prompt(g, seed, "JSON");
  const auto b = build_solve_complete_prompt(g, seed, "JSON");
  EXPECT_EQ(a.text, b.text);
  EXPECT_NE(a.text.find("structured JSON inputs"), std::string::npos);
  EXPECT_NE(a.text.find(print(g.assertion())), std::string::npos);
  EXPECT_NE(a.text.find("{\"a\":[k!5][xxx]"), std::string::npos);
  EXPECT_NE(a.text.find("Step 1"), std::string::npos);
  EXPECT_NE(a.text.find("Step 2"), std::string::npos);
  EXPECT_LT(a.text.find("Step 1"), a.text.find("Step 2"));
  EXPECT_NE(build_solve_complete_prompt(g.negated(), seed, "JSON").text, a.text);
}

TEST(SolvePrompt, NeedsPositions) {
  EXPECT_THROW(build_solve_complete_prompt(goal("(= #x01 #x01)"), to_bytes("a"), "JSON"),
               std::invalid_argument);
}

TEST(ParseResponse, Shapes) {
  EXPECT_EQ(to_string(parse_response("```\n{\"a\":1}\n```")), "{\"a\":1}");
  EXPECT_EQ(to_string(parse_response("Step 1: k!5 is '1'.\nStep 2: close it.\n```json\n[1]\n```\n"
                                     "That input is valid.")),
            "[1]");
  EXPECT_EQ(to_string(parse_response("```\nfirst\n```\nbetter:\n```\nsecond\n```")), "second");
  EXPECT_EQ(to_string(parse_response("The answer is \"r9turn 1\".")), "r9turn 1");
  EXPECT_EQ(parse_response("```\na\\x00\\\\b\n```"), (Bytes{'a', 0, '\\', 'b'}));
  EXPECT_EQ(to_string(parse_response("```\n\n```")), "");
  EXPECT_THROW(parse_response(""), Unparseable);
  EXPECT_THROW(parse_response("no idea"), Unparseable);
  EXPECT_EQ(parse_blocks("```\na\n```\n```\nb\n```").size(), 2u);
}

TEST(Validator, CompliantCandidateUnchanged) {
  EctTree tree;
  const auto g = goal("(bvsgt (concat #x000000 k!1) #x00000039)");
  const auto r = validate_and_refine(g, "k", to_bytes("return 1"), to_bytes("r?turn 1"), tree);
  EXPECT_FALSE(r.refined);
  EXPECT_EQ(to_string(r.test), "return 1");
  EXPECT_EQ(tree.expected("k"), 1u);
}

TEST(Validator, RefinesToSolverBytes) {
  EctTree tree;
  const auto g = goal("(bvsge (concat #x000000 k!1) #x00000039)");
  const auto r = validate_and_refine(g, "k", to_bytes("r0turn 1"), to_bytes("r?turn 1"), tree);
  EXPECT_TRUE(r.refined);
  EXPECT_EQ(to_string(r.test), "r9turn 1");
  EXPECT_TRUE(evaluate_constraint(g, r.test));
  EXPECT_EQ(tree.expected("k"), 1u);
}

TEST(Validator, PadsShortCandidateWithSeedTail) {
  EctTree tree;
  const auto g = goal("(= k!4 #x7d)");
  const auto r = validate_and_refine(g, "k", to_bytes("[1"), to_bytes("{\"a\"x1"), tree);
  EXPECT_EQ(to_string(r.test), "[1a\"}1");
}

TEST(Validator, FlexibleSizeAccepted) {
  EctTree tree;
  const auto g = goal("(= k!0 #x5b)");
  const auto r = validate_and_refine(g, "k", to_bytes("[1,2,3,4,5,6]"), to_bytes("{}"), tree);
  EXPECT_FALSE(r.refined);
  EXPECT_EQ(r.test.size(), 13u);
}

TEST(Validator, UnsatDropped) {
  EctTree tree;
  EXPECT_THROW(validate_and_refine(goal("(bvult k!2 #x00)"), "k", to_bytes("abc"), to_bytes("abc"),
                                   tree),
               UnsatDrop);
  EXPECT_EQ(tree.expected("k"), 0u);
}

TEST(Validator, SoundUnderArbitraryCandidates) {
  std::mt19937_64 rng(13);
  int emitted = 0;
  for (int i = 0; i < 5000; ++i) {
    EctTree tree;
    Bytes seed(1 + rng() % 12);
    for (auto& x : seed) x = rng() % 256;
    const auto g = test::random_goal(rng, seed.size());
    Bytes candidate(rng() % 16);
    for (auto& x : candidate) x = rng() % 256;
    try {
      const auto r = validate_and_refine(g, "k", candidate, seed, tree);
      ASSERT_TRUE(evaluate_constraint(g, r.test));
      ++emitted;
    } catch (const UnsatDrop&) {
      ASSERT_THROW(get_solution(g), Unsat);
    }
  }
  EXPECT_GT(emitted, 4000);
}

Response ask(Transport& t, const std::string& prompt) {
  return t.complete({"mock", 0.0, "", prompt});
}

TEST(Mock, SyntaxAwareJsonDigit) {
  MockTransport mock(MockMode::SyntaxAware);
  const auto g = goal("(bvsge (concat #x000000 k!5) #x00000030)");
  const auto seed = to_bytes("{\"a\":x}");
  const auto p = build_solve_complete_prompt(g, seed, "JSON");
  const auto out = parse_response(ask(mock, p.text).raw);
  EXPECT_EQ(to_string(out), "{\"a\":0}");
  EXPECT_TRUE(evaluate_constraint(g, out));
  EXPECT_EQ(targets::json_reference(to_string(out)), Outcome::Kind::Accept);
  EXPECT_EQ(mock.calls(), 1u);
}

TEST(Mock, SyntaxAwareCompletesExpr) {
  MockTransport mock(MockMode::SyntaxAware);
  const auto g = goal("(= k!1 #x65)");
  const auto p = build_solve_complete_prompt(g, to_bytes("r?turn 1"), "EXPR");
  EXPECT_EQ(to_string(parse_response(ask(mock, p.text).raw)), "re");
}

TEST(Mock, AdversarialViolates) {
  MockTransport mock(MockMode::Adversarial);
  const auto g = goal("(bvsgt (concat #x000000 k!1) #x00000039)");
  const auto p = build_solve_complete_prompt(g, to_bytes("r?turn 1"), "EXPR");
  const auto out = parse_response(ask(mock, p.text).raw);
  EXPECT_FALSE(evaluate_constraint(g, out));
}

TEST(Mock, EchoReturnsMaskedSeed) {
  MockTransport mock(MockMode::Echo);
  const auto g = goal("(= k!2 #x41)");
  const auto p = build_solve_complete_prompt(g, to_bytes("abcdef"), "JSON");
  EXPECT_EQ(ask(mock, p.text).raw, "```\n" + p.masked.text + "\n```\n");
}

TEST(Mock, SyntaxAwareRepliesReplayAccept) {
  std::mt19937_64 rng(17);
  MockTransport mock(MockMode::SyntaxAware);
  for (const auto& p : targets::registry()) {
    if (p.name == "digits") continue;  // every negated digit check rejects
    int accepted = 0, total = 0;
    for (int i = 0; i < 60; ++i) {
      const auto seed = to_bytes(test::grammar_biased(p.name, rng));
      const auto t = run_concolic(p, seed);
      if (t.constraints.empty()) continue;
      const auto& pc = t.constraints[rng() % t.constraints.size()];
      const auto target = pc.negated();
      const auto prompt = build_solve_complete_prompt(target, seed, p.format_label());
      const auto out = parse_response(ask(mock, prompt.text).raw);
      ++total;
      if (targets::reference_outcome(p.name, to_string(out)) == Outcome::Kind::Accept)
        ++accepted;
    }
    std::printf("%s: %d/%d accepted\n", p.name.c_str(), accepted, total);
    EXPECT_GT(accepted * 2, total) << p.name;
  }
}

TEST(Mock, RefinementMatchesBaselineSolver) {
  std::mt19937_64 rng(29);
  MockTransport mock(MockMode::Adversarial);
  int refined = 0;
  for (int i = 0; i < 400; ++i) {
    EctTree tree;
    Bytes seed(1 + rng() % 10);
    for (auto& x : seed) x = 'a' + rng() % 26;
    const auto g = test::random_goal(rng, seed.size());
    Assignment expected;
    try {
      expected = get_solution(g);
    } catch (const Unsat&) {
      continue;
    }
    const auto prompt = build_solve_complete_prompt(g, seed, "TEXT");
    const auto r = validate_and_refine(g, "k", parse_response(ask(mock, prompt.text).raw), seed, tree);
    ASSERT_TRUE(evaluate_constraint(g, r.test));
    if (!r.refined) continue;
    ++refined;
    for (const auto& [pos, v] : expected) ASSERT_EQ(r.test[pos], v);
  }
  EXPECT_GT(refined, 300);
}

TEST(Mock, InitialSeedsAccepted) {
  MockTransport mock(MockMode::SyntaxAware);
  for (const auto& p : targets::registry()) {
    const auto prompt = "You are a test input generator for " + p.format_label() +
                        " parsers.\nReply with exactly 4 test inputs, each in its own fenced block.\n";
    const auto seeds = parse_blocks(ask(mock, prompt).raw);
    ASSERT_EQ(seeds.size(), 4u) << p.name;
    for (const auto& s : seeds)
      EXPECT_EQ(targets::reference_outcome(p.name, to_string(s)), Outcome::Kind::Accept)
          << p.name << ": " << to_string(s);
  }
}

// Property: a viable prefix plus its completion never gets rejected, and every
// prefix of an accepted input is viable.
class CompleterOracle : public ::testing::TestWithParam<std::string> {};

TEST_P(CompleterOracle, AgreesWithReference) {
  using K = Outcome::Kind;
  const auto& p = targets::find(GetParam());
  const auto c = completer_for(p.format_label());
  ASSERT_NE(c, nullptr);
  std::mt19937_64 rng(31);
  int viable = 0, accepted = 0;
  for (int i = 0; i < 4000; ++i) {
    const auto s = test::grammar_biased(p.name, rng);
    if (c->viable(s)) {
      ++viable;
      const auto full = s + c->complete(s);
      ASSERT_NE(targets::reference_outcome(p.name, full), K::Reject) << '"' << s << "\" -> \"" << full << '"';
    }
    if (targets::reference_outcome(p.name, s) == K::Accept) {
      ++accepted;
      for (std::size_t n = 0; n <= s.size(); ++n)
        ASSERT_TRUE(c->viable(s.substr(0, n))) << '"' << s << "\" at " << n;
    }
  }
  EXPECT_GT(viable, 100);
  EXPECT_GT(accepted, 20);
}

INSTANTIATE_TEST_SUITE_P(Targets, CompleterOracle,
                         ::testing::Values("json_subset", "expr_lang", "ini_lang", "digits"));

TEST(Completer, Examples) {
  const auto json = completer_for("JSON");
  EXPECT_EQ(json->complete(""), "{}");
  EXPECT_EQ(json->complete("{\"a\":[1,"), "0]}");
  EXPECT_EQ(json->complete("{\"a"), "\":0}");
  EXPECT_EQ(json->complete("[\"\\u0"), "111\"]");
  EXPECT_FALSE(json->viable("{,"));
  const auto expr = completer_for("EXPR");
  EXPECT_EQ(expr->complete("f(1,(2"), "))");
  EXPECT_EQ(expr->complete("return"), " 1");
  EXPECT_FALSE(expr->viable("1+)"));
  const auto ini = completer_for("INI");
  EXPECT_EQ(ini->complete("[s]\nkey"), "=");
  EXPECT_EQ(ini->complete("["), "s]");
  EXPECT_FALSE(ini->viable("=v"));
  EXPECT_EQ(completer_for("XML"), nullptr);
}

class LocalServer {
 public:
  LocalServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Server& server() { return server_; }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

nlohmann::json completion(const std::string& content) {
  return {{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
}

TEST(Http, EchoRoundTrip) {
  std::string seen_auth, seen_body;
  LocalServer local;
  local.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_body = req.body;
    const auto body = nlohmann::json::parse(req.body);
    const auto user = body["messages"].back()["content"].get<std::string>();
    res.set_content(completion("```\n" + user + "\n```").dump(), "application/json");
  });
  HttpTransport http({local.endpoint(), "secret", std::chrono::milliseconds(5000), 3,
                      std::chrono::milliseconds(1)});
  const auto r = http.complete({"gpt-test", 0.0, "sys", "[1]"});
  EXPECT_EQ(to_string(parse_response(r.raw)), "[1]");
  EXPECT_EQ(seen_auth, "Bearer secret");
  const auto body = nlohmann::json::parse(seen_body);
  EXPECT_EQ(body["model"], "gpt-test");
  EXPECT_EQ(body["temperature"], 0.0);
  EXPECT_EQ(body["messages"][0]["role"], "system");
}

TEST(Http, ServerErrorRetriedThenFails) {
  std::atomic<int> hits = 0;
  LocalServer local;
  local.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 500;
  });
  HttpTransport http({local.endpoint(), "", std::chrono::milliseconds(5000), 3,
                      std::chrono::milliseconds(1)});
  try {
    http.complete({"m", 0.0, "", "x"});
    FAIL() << "expected TransportError";
  } catch (const TimeoutError&) {
    FAIL() << "not a timeout";
  } catch (const TransportError& e) {
    EXPECT_EQ(e.code(), 500);
  }
  EXPECT_EQ(hits, 3);
}

TEST(Http, ClientErrorNotRetried) {
  std::atomic<int> hits = 0;
  LocalServer local;
  local.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 401;
  });
  HttpTransport http({local.endpoint(), "", std::chrono::milliseconds(5000), 3,
                      std::chrono::milliseconds(1)});
  EXPECT_THROW(http.complete({"m", 0.0, "", "x"}), TransportError);
  EXPECT_EQ(hits, 1);
}

TEST(Http, SlowServerTimesOut) {
  LocalServer local;
  local.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(800));
    res.set_content(completion("late").dump(), "application/json");
  });
  HttpTransport http({local.endpoint(), "", std::chrono::milliseconds(150), 1,
                      std::chrono::milliseconds(1)});
  EXPECT_THROW(http.complete({"m", 0.0, "", "x"}), TimeoutError);
}

TEST(Http, RejectsBadEndpoint) {
  HttpOptions options;
  options.endpoint = "ftp://example.org";
  EXPECT_THROW(HttpTransport{options}, std::invalid_argument);
}

TEST(Down, AlwaysFails) {
  DownTransport down;
  EXPECT_THROW(down.complete({}), TransportError);
}

}  // namespace
}  // namespace ectfuzz::llm
