#include <algorithm>
#include <regex>
#include <sstream>

#include "ectfuzz/llm.hpp"
#include "ectfuzz/smt_text.hpp"
#include "ectfuzz/solver.hpp"

namespace ectfuzz::llm {

namespace {

constexpr std::string_view kSolveHead = "You are a constraint solver for structured ";
constexpr std::string_view kSeedHead = "You are a test input generator for ";

// Order in which the mock "thinks of" bytes: alphanumerics, punctuation,
// whitespace, then everything else.
const std::vector<std::uint8_t>& preference() {
  static const std::vector<std::uint8_t> order = [] {
    std::vector<std::uint8_t> v;
    auto add = [&](int lo, int hi) {
      for (int b = lo; b <= hi; ++b)
        if (std::find(v.begin(), v.end(), b) == v.end()) v.push_back(static_cast<std::uint8_t>(b));
    };
    add('0', '9');
    add('a', 'z');
    add('A', 'Z');
    add(0x21, 0x7e);
    add(' ', ' ');
    add('\n', '\n');
    add('\t', '\t');
    add('\r', '\r');
    add(0, 255);
    return v;
  }();
  return order;
}

std::string line_after(std::string_view text, std::string_view marker) {
  const auto at = text.find(marker);
  if (at == std::string_view::npos) return {};
  const auto start = text.find('\n', at);
  if (start == std::string_view::npos) return {};
  const auto end = text.find('\n', start + 1);
  return std::string(text.substr(start + 1, end == std::string_view::npos ? end : end - start - 1));
}

std::string between(std::string_view text, std::string_view open, std::string_view close) {
  const auto a = text.find(open);
  if (a == std::string_view::npos) return {};
  const auto b = text.find(close, a + open.size());
  if (b == std::string_view::npos) return {};
  return std::string(text.substr(a + open.size(), b - a - open.size()));
}

std::string fenced(ByteView bytes) { return "```\n" + escape_bytes(bytes) + "\n```\n"; }

struct MaskedTemplate {
  Bytes bytes;                     // seed prefix; constrained slots hold 0
  std::vector<std::size_t> slots;  // constrained offsets, ascending
};

MaskedTemplate read_masked(std::string_view text) {
  MaskedTemplate t;
  static const std::regex token(R"(\[k!(\d+)\]|\[xxx\])");
  std::string s(text);
  std::size_t at = 0;
  for (std::sregex_iterator it(s.begin(), s.end(), token), end; it != end; ++it) {
    const auto lit = unescape_bytes(std::string_view(s).substr(at, it->position() - at));
    t.bytes.insert(t.bytes.end(), lit.begin(), lit.end());
    at = it->position() + it->length();
    if ((*it)[1].matched) {
      const auto pos = std::stoul((*it)[1].str());
      if (t.bytes.size() <= pos) t.bytes.resize(pos + 1, ' ');
      t.slots.push_back(pos);
    } else {
      break;
    }
  }
  return t;
}

struct SolveTask {
  std::string format;
  PathConstraint goal;
  MaskedTemplate masked;
  std::string masked_text;
};

std::optional<SolveTask> read_solve_prompt(std::string_view prompt) {
  SolveTask task;
  task.format = between(prompt, kSolveHead, " inputs.");
  try {
    task.goal.expr = parse_expr(line_after(prompt, "Path constraint"));
  } catch (const ParseError&) {
    return std::nullopt;
  }
  task.goal.positions = positions(task.goal.expr);
  task.goal.taken = true;
  auto body = between(prompt, "```text\n", "\n```");
  task.masked = read_masked(body);
  task.masked_text = std::move(body);
  return task;
}

// Calls `visit` with `bytes` holding each assignment of `slots` in preference
// order until it returns true.
template <class Visit>
void enumerate(Bytes& bytes, const std::vector<std::size_t>& slots, Visit visit) {
  const auto& pref = preference();
  std::vector<std::size_t> idx(slots.size(), 0);
  for (;;) {
    for (std::size_t i = 0; i < slots.size(); ++i) bytes[slots[i]] = pref[idx[i]];
    if (visit()) return;
    std::size_t k = slots.size();
    while (k > 0 && idx[k - 1] == pref.size() - 1) idx[--k] = 0;
    if (k == 0) return;
    ++idx[k - 1];
  }
}

Assignment assignment_of(const Bytes& bytes, const std::vector<std::size_t>& slots) {
  Assignment a;
  for (auto s : slots) a[s] = bytes[s];
  return a;
}

Bytes substitute(Bytes bytes, const Assignment& a) {
  for (const auto& [pos, v] : a) bytes[pos] = v;
  return bytes;
}

std::string narrate(const Assignment& a) {
  std::ostringstream out;
  out << "Step 1: ";
  for (const auto& [pos, v] : a) out << "k!" << pos << " = 0x" << std::hex << int(v) << std::dec << ' ';
  out << "\nStep 2: completed the tail so the input stays well formed.\n";
  return out.str();
}

std::string answer_solve(MockMode mode, const SolveTask& task) {
  if (mode == MockMode::Echo) return "```\n" + task.masked_text + "\n```\n";
  const auto completer = completer_for(task.format);
  const bool want = mode == MockMode::SyntaxAware;
  std::optional<Assignment> first, chosen;
  std::size_t tries = 0;
  if (task.masked.slots.empty() || task.masked.slots.size() > 3) return fenced(task.masked.bytes);
  Bytes bytes = task.masked.bytes;
  enumerate(bytes, task.masked.slots, [&] {
    if (eval_bool(task.goal.expr, bytes) != want) return ++tries > 70000;
    if (!first) first = assignment_of(bytes, task.masked.slots);
    if (!completer || completer->viable(to_string(bytes))) {
      chosen = assignment_of(bytes, task.masked.slots);
      return true;
    }
    return ++tries > 70000;
  });
  if (!chosen) chosen = first;
  if (!chosen) {
    // Nothing matches the requested polarity; answer with the preferred bytes.
    Assignment a;
    for (auto s : task.masked.slots) a[s] = preference().front();
    chosen = a;
  }
  auto out = substitute(task.masked.bytes, *chosen);
  if (completer) {
    const auto tail = completer->complete(to_string(out));
    out.insert(out.end(), tail.begin(), tail.end());
  }
  return narrate(*chosen) + fenced(out);
}

struct SeedTask {
  std::string format;
  std::size_t count = 4;
  bool fresh = false;
  std::vector<Bytes> recent;
  std::string uncovered;
};

SeedTask read_seed_prompt(std::string_view prompt) {
  SeedTask t;
  t.format = between(prompt, kSeedHead, " parsers.");
  static const std::regex count(R"(exactly (\d+) test inputs)");
  std::match_results<std::string_view::const_iterator> m;
  if (std::regex_search(prompt.begin(), prompt.end(), m, count)) t.count = std::stoul(m[1].str());
  t.fresh = prompt.find("Coverage has stopped growing") != std::string_view::npos;
  if (t.fresh) {
    t.uncovered = between(prompt, "Uncovered branches", "\n\n");
    t.recent = parse_blocks(prompt);
  }
  return t;
}

struct Recipe {
  std::string_view func;
  std::string_view input;
};

// From-scratch inputs keyed by the function they are meant to reach.
const std::vector<Recipe>& recipes(const std::string& format) {
  static const std::map<std::string, std::vector<Recipe>> table{
      {"JSON",
       {{"json_array", R"([1,[2,"x"],[],{"k":[true]}])"},
        {"json_unicode_escape", R"(["é中"])"},
        {"json_string", R"({"s":"a\"b\\c\/d\b\f\n\r\t"})"},
        {"json_literal", "[true,false,null]"},
        {"json_number", "[-1,0,-0,12,345]"},
        {"json_object", R"({"a":{"b":{}},"c":1})"}}},
      {"EXPR",
       {{"expr_call_args", "f(1,g(2,3),h())"},
        {"expr_unary", "--1*-x"},
        {"expr_term", "2*3/4*(5/6)"},
        {"expr_keyword", "return 1;return x"},
        {"expr_is_ident_part", "$a_1+_b2$"},
        {"expr_lex_number", "123456789+0"},
        {"expr_additive", "1+2-3+(4-5)"}}},
      {"INI",
       {{"ini_section", "[sec.1_a]\n[b]\t\n"},
        {"ini_comment", "; one\n# two\n"},
        {"ini_key_value", "k_1.x = v\tw\nempty=\n"},
        {"ini_line", "\n\n[s]\nk=v\n"}}},
      {"DIGITS", {{"scan_digits", "0123456789"}}},
  };
  static const std::vector<Recipe> none;
  auto it = table.find(format);
  return it == table.end() ? none : it->second;
}

const std::vector<std::string>& canned(const std::string& format) {
  static const std::map<std::string, std::vector<std::string>> table{
      {"JSON",
       {R"({"id":1,"tags":["a","b"],"ok":true})", R"([null,-2,"x\ty"])", R"({"u":"A"})",
        "0"}},
      {"EXPR", {"return f(1, -2) * (3 + x)", "a;b;", "-(-1)/2", "g()"}},
      {"INI", {"[core]\nname = demo\n; note\n", "# c\n[a.b]\nk=1\tv\n", "x=", "\n[s]\n"}},
      {"DIGITS", {"0", "12345", "9", "007"}},
  };
  static const std::vector<std::string> fallback{"a", "0", "{}", "[s]"};
  auto it = table.find(format);
  return it == table.end() ? fallback : it->second;
}

// Longer inputs are left alone so repeated rounds do not keep growing them.
constexpr std::size_t kMutateLimit = 64;

Bytes mutate(const std::string& format, const Bytes& in, std::size_t variant) {
  const auto s = to_string(in);
  std::string out;
  if (format == "JSON")
    out = variant % 2 == 0 ? "[" + s + ",true]" : "{\"k\":" + s + "}";
  else if (format == "EXPR")
    out = variant % 2 == 0 ? "f(" + s + ")" : s + ";return 1";
  else if (format == "INI")
    out = s + (s.empty() || s.back() == '\n' ? "" : "\n") + "[extra]\nk=v\n";
  else
    out = s + s;
  return to_bytes(out);
}

std::string answer_seeds(const SeedTask& t) {
  std::vector<Bytes> seeds;
  auto add = [&](Bytes b) {
    if (seeds.size() < t.count && std::find(seeds.begin(), seeds.end(), b) == seeds.end())
      seeds.push_back(std::move(b));
  };
  if (!t.fresh) {
    for (const auto& s : canned(t.format)) add(to_bytes(s));
  } else {
    for (const auto& r : recipes(t.format))
      if (t.uncovered.find(r.func) != std::string::npos) add(to_bytes(r.input));
    for (std::size_t i = 0; i < t.recent.size(); ++i)
      if (t.recent[i].size() <= kMutateLimit) add(mutate(t.format, t.recent[i], i));
    for (const auto& r : recipes(t.format)) add(to_bytes(r.input));
  }
  std::string out = "Here are the inputs.\n";
  for (const auto& s : seeds) out += fenced(s);
  return out;
}

}  // namespace

const char* mock_mode_name(MockMode mode) {
  switch (mode) {
    case MockMode::SyntaxAware: return "syntax";
    case MockMode::Adversarial: return "adversarial";
    case MockMode::Echo: return "echo";
  }
  return "?";
}

Response MockTransport::complete(const Request& request) {
  ++calls_;
  const std::string_view prompt = request.user;
  if (prompt.starts_with(kSolveHead)) {
    if (auto task = read_solve_prompt(prompt)) return {answer_solve(mode_, *task)};
    return {"I could not read the constraint."};
  }
  if (prompt.starts_with(kSeedHead)) return {answer_seeds(read_seed_prompt(prompt))};
  return {"```\n" + std::string(prompt) + "\n```\n"};
}

}  // namespace ectfuzz::llm
