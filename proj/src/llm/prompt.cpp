#include <cstdio>
#include <sstream>

#include "ectfuzz/llm.hpp"
#include "ectfuzz/smt_text.hpp"
#include "ectfuzz/solver.hpp"

namespace ectfuzz::llm {

namespace {

constexpr std::string_view kFence = "```";

bool looks_like_mask(ByteView bytes, std::size_t i) {
  auto rest = std::string_view(reinterpret_cast<const char*>(bytes.data()) + i, bytes.size() - i);
  return rest.starts_with("[k!") || rest.starts_with("[xxx]");
}

void hex_byte(std::string& out, std::uint8_t b) {
  char buf[5];
  std::snprintf(buf, sizeof buf, "\\x%02x", b);
  out += buf;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string escape_bytes(ByteView bytes) {
  std::string out;
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const auto b = bytes[i];
    if (b == '\\')
      out += "\\\\";
    else if (b == '`' || (b == '[' && looks_like_mask(bytes, i)))
      hex_byte(out, b);
    else if (b == '\n' || (b >= 0x20 && b < 0x7f))
      out += static_cast<char>(b);
    else
      hex_byte(out, b);
  }
  return out;
}

Bytes unescape_bytes(std::string_view text) {
  Bytes out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\\' && i + 1 < text.size()) {
      if (text[i + 1] == '\\') {
        out.push_back('\\');
        ++i;
        continue;
      }
      if (text[i + 1] == 'x' && i + 3 < text.size() && hex_value(text[i + 2]) >= 0 &&
          hex_value(text[i + 3]) >= 0) {
        out.push_back(static_cast<std::uint8_t>(hex_value(text[i + 2]) * 16 + hex_value(text[i + 3])));
        i += 3;
        continue;
      }
    }
    out.push_back(static_cast<std::uint8_t>(c));
  }
  return out;
}

MaskedSeed mask_seed(const PathConstraint& goal, ByteView seed) {
  MaskedSeed m;
  if (goal.positions.empty()) return m;
  const auto last = *goal.positions.rbegin();
  std::size_t run_start = 0;
  for (auto p : goal.positions) {
    const auto end = std::min(p, seed.size());
    if (end > run_start) m.text += escape_bytes(seed.subspan(run_start, end - run_start));
    const auto token = "[k!" + std::to_string(p) + "]";
    m.text += token;
    m.constrained_positions.emplace(token, p);
    run_start = p + 1;
  }
  m.text += "[xxx]";
  m.flexible_origin = last + 1;
  return m;
}

SolvePrompt build_solve_complete_prompt(const PathConstraint& goal, ByteView seed,
                                        std::string_view format) {
  if (goal.positions.empty())
    throw std::invalid_argument("constraint has no symbolic bytes to mask");
  SolvePrompt p{mask_seed(goal, seed), {}};
  std::ostringstream out;
  out << "You are a constraint solver for structured " << format << " inputs.\n\n"
      << "Path constraint (SMT-LIB; k!n is the byte at input offset n):\n"
      << print(goal.assertion()) << "\n\n"
      << "Masked test input:\n"
      << kFence << "text\n"
      << p.masked.text << "\n"
      << kFence << "\n\n"
      << "[k!n] stands for the single byte at offset n. [xxx] stands for a tail of any length.\n"
      << "Byte notation: \\\\ is a backslash and \\xHH is the byte with hex value HH.\n\n"
      << "Think step by step.\n"
      << "Step 1 (solve): replace every [k!n] with a byte that makes the constraint true, "
         "choosing bytes that keep the input a plausible " << format << " prefix.\n"
      << "Step 2 (complete): replace [xxx] with a string of any length so that the whole input "
         "is valid " << format << ".\n\n"
      << "Reply with the final test input, in the same byte notation, inside one " << kFence
      << " fenced block.\n";
  p.text = out.str();
  return p;
}

std::vector<Bytes> parse_blocks(std::string_view reply) {
  std::vector<Bytes> out;
  std::size_t at = 0;
  for (;;) {
    const auto open = reply.find(kFence, at);
    if (open == std::string_view::npos) break;
    const auto eol = reply.find('\n', open);
    if (eol == std::string_view::npos) break;
    const auto close = reply.find(kFence, eol + 1);
    if (close == std::string_view::npos) break;
    auto body = reply.substr(eol + 1, close - eol - 1);
    if (body.ends_with('\n')) body.remove_suffix(1);
    out.push_back(unescape_bytes(body));
    at = close + kFence.size();
  }
  return out;
}

Bytes parse_response(std::string_view reply) {
  if (auto blocks = parse_blocks(reply); !blocks.empty()) return blocks.back();
  const auto close = reply.rfind('"');
  if (close != std::string_view::npos && close > 0) {
    const auto open = reply.rfind('"', close - 1);
    if (open != std::string_view::npos)
      return unescape_bytes(reply.substr(open + 1, close - open - 1));
  }
  throw Unparseable("reply holds no fenced block or quoted test input");
}

ValidationResult validate_and_refine(const PathConstraint& goal, const std::string& target_key,
                                     ByteView candidate, ByteView seed, EctTree& tree) {
  if (evaluate_constraint(goal, candidate)) {
    tree.mark_expected(target_key);
    return {Bytes(candidate.begin(), candidate.end()), false};
  }
  Assignment solution;
  try {
    solution = get_solution(goal);
  } catch (const SolverError& e) {
    throw UnsatDrop(e.what());
  }
  Bytes refined(candidate.begin(), candidate.end());
  const auto need = goal.positions.empty() ? 0 : *goal.positions.rbegin() + 1;
  if (refined.size() < need) {
    if (seed.size() > refined.size())
      refined.insert(refined.end(), seed.begin() + refined.size(), seed.end());
    refined.resize(std::max(refined.size(), need), 0);
  }
  for (const auto& [pos, value] : solution) refined[pos] = value;
  tree.mark_expected(target_key);
  return {std::move(refined), true};
}

}  // namespace ectfuzz::llm
