// Plain recognizers used as grammar oracles for the symbolic targets.

#include <cctype>
#include <stdexcept>

#include "ectfuzz/targets.hpp"

namespace ectfuzz::targets {

namespace {

using K = Outcome::Kind;

struct Crash {};

bool digit(char c) { return c >= '0' && c <= '9'; }
bool alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool hex(char c) { return digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F'); }

class Json {
 public:
  explicit Json(std::string_view s) : s_(s) {}

  K run() {
    try {
      ws();
      if (!value()) return K::Reject;
      ws();
      return i_ == s_.size() ? K::Accept : K::Reject;
    } catch (const Crash&) {
      return K::Crash;
    }
  }

 private:
  bool more() const { return i_ < s_.size(); }
  char c() const { return s_[i_]; }
  void ws() {
    while (more() && (c() == ' ' || c() == '\t' || c() == '\n' || c() == '\r')) ++i_;
  }
  bool word(std::string_view w) {
    if (s_.substr(i_, w.size()) != w) return false;
    i_ += w.size();
    return true;
  }

  bool value() {
    if (!more()) return false;
    switch (c()) {
      case '{': return object();
      case '[': return array();
      case '"': return string();
      case 't': return word("true");
      case 'f': return word("false");
      case 'n': return word("null");
      default:
        if (c() == '-' || digit(c())) return number();
        return false;
    }
  }

  bool number() {
    if (c() == '-') ++i_;
    if (!more()) return false;
    if (c() == '0') {
      ++i_;
      return true;
    }
    if (!digit(c())) return false;
    while (more() && digit(c())) ++i_;
    return true;
  }

  bool string() {
    ++i_;
    while (more()) {
      const char ch = c();
      ++i_;
      if (ch == '"') return true;
      if (ch == '\\') {
        if (!more()) return false;
        const char e = c();
        ++i_;
        if (e == 'u') {
          if (s_.size() - i_ < 4) {
            for (; more(); ++i_)
              if (!hex(c())) return false;
            return false;
          }
          const auto quad = s_.substr(i_, 4);
          for (char h : quad)
            if (!hex(h)) return false;
          if (quad == "0000") throw Crash{};
          i_ += 4;
        } else if (std::string_view("\"\\/bfnrt").find(e) == std::string_view::npos) {
          return false;
        }
        continue;
      }
      if (static_cast<unsigned char>(ch) < 0x20) return false;
    }
    return false;
  }

  bool object() {
    ++i_;
    ws();
    if (more() && c() == '}') {
      ++i_;
      return true;
    }
    for (;;) {
      if (!more() || c() != '"' || !string()) return false;
      ws();
      if (!more() || c() != ':') return false;
      ++i_;
      ws();
      if (!value()) return false;
      ws();
      if (!more()) return false;
      if (c() == '}') {
        ++i_;
        return true;
      }
      if (c() != ',') return false;
      ++i_;
      ws();
    }
  }

  bool array() {
    ++i_;
    ws();
    if (more() && c() == ']') {
      ++i_;
      return true;
    }
    for (;;) {
      if (!value()) return false;
      ws();
      if (!more()) return false;
      if (c() == ']') {
        ++i_;
        return true;
      }
      if (c() != ',') return false;
      ++i_;
      ws();
    }
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

class ExprRef {
 public:
  explicit ExprRef(std::string_view s) : s_(s) {}

  K run() {
    try {
      next();
      if (tok_ == End) return K::Reject;
      for (;;) {
        if (tok_ == Return) next();
        if (!expr()) return K::Reject;
        if (tok_ == End) return K::Accept;
        if (tok_ != ';') return K::Reject;
        next();
        if (tok_ == End) return K::Accept;
      }
    } catch (const Crash&) {
      return K::Crash;
    }
  }

 private:
  static constexpr int End = 0, Num = 1, Ident = 2, Return = 3, Bad = 4;

  void next() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\n')) ++i_;
    if (i_ == s_.size()) {
      tok_ = End;
      return;
    }
    const char ch = s_[i_];
    if (std::string_view("(),+-*/;").find(ch) != std::string_view::npos) {
      tok_ = static_cast<unsigned char>(ch);
      ++i_;
      return;
    }
    const auto start = i_;
    if (digit(ch)) {
      while (i_ < s_.size() && digit(s_[i_])) ++i_;
      if (i_ - start > 9) throw Crash{};
      tok_ = Num;
      return;
    }
    if (alpha(ch) || ch == '_' || ch == '$') {
      while (i_ < s_.size() && (digit(s_[i_]) || alpha(s_[i_]) || s_[i_] == '_' || s_[i_] == '$'))
        ++i_;
      tok_ = s_.substr(start, i_ - start) == "return" ? Return : Ident;
      return;
    }
    tok_ = Bad;
  }

  bool expr() {
    if (!term()) return false;
    while (tok_ == '+' || tok_ == '-') {
      next();
      if (!term()) return false;
    }
    return true;
  }
  bool term() {
    if (!unary()) return false;
    while (tok_ == '*' || tok_ == '/') {
      next();
      if (!unary()) return false;
    }
    return true;
  }
  bool unary() {
    while (tok_ == '-') next();
    return primary();
  }
  bool primary() {
    if (tok_ == Num) {
      next();
      return true;
    }
    if (tok_ == Ident) {
      next();
      if (tok_ != '(') return true;
      next();
      if (tok_ == ')') {
        next();
        return true;
      }
      for (;;) {
        if (!expr()) return false;
        if (tok_ == ')') {
          next();
          return true;
        }
        if (tok_ != ',') return false;
        next();
      }
    }
    if (tok_ == '(') {
      next();
      if (!expr() || tok_ != ')') return false;
      next();
      return true;
    }
    return false;
  }

  std::string_view s_;
  std::size_t i_ = 0;
  int tok_ = End;
};

K ini_ref(std::string_view s) {
  auto name = [](char c) { return alpha(c) || digit(c) || c == '_' || c == '.'; };
  std::size_t i = 0;
  auto blanks = [&] {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  };
  while (i < s.size()) {
    const char c = s[i];
    if (c == '\n') {
      ++i;
    } else if (c == ';' || c == '#') {
      while (i < s.size() && s[i] != '\n') ++i;
      if (i < s.size()) ++i;
    } else if (c == '[') {
      const auto start = ++i;
      while (i < s.size() && name(s[i])) ++i;
      if (i == start) return K::Reject;
      if (i - start > 16) return K::Crash;
      if (i == s.size() || s[i] != ']') return K::Reject;
      ++i;
      blanks();
      if (i < s.size() && s[i] != '\n') return K::Reject;
      if (i < s.size()) ++i;
    } else {
      const auto start = i;
      while (i < s.size() && name(s[i])) ++i;
      if (i == start) return K::Reject;
      blanks();
      if (i == s.size() || s[i] != '=') return K::Reject;
      ++i;
      while (i < s.size() && s[i] != '\n') {
        if (static_cast<unsigned char>(s[i]) < 0x20 && s[i] != '\t') return K::Reject;
        ++i;
      }
      if (i < s.size()) ++i;
    }
  }
  return K::Accept;
}

}  // namespace

Outcome::Kind json_reference(std::string_view in) { return Json(in).run(); }
Outcome::Kind expr_reference(std::string_view in) { return ExprRef(in).run(); }
Outcome::Kind ini_reference(std::string_view in) { return ini_ref(in); }

Outcome::Kind digits_reference(std::string_view in) {
  if (in.empty()) return K::Reject;
  for (char c : in)
    if (!digit(c)) return K::Reject;
  return K::Accept;
}

const std::vector<ProgramUnderTest>& registry() {
  static const std::vector<ProgramUnderTest> programs{
      {"json_subset", InputFormat::Json, "", json_subset},
      {"expr_lang", InputFormat::Expr, "", expr_lang},
      {"ini_lang", InputFormat::Ini, "", ini_lang},
      {"digits", InputFormat::Custom, "DIGITS", digits},
  };
  return programs;
}

const ProgramUnderTest& find(std::string_view name) {
  for (const auto& p : registry())
    if (p.name == name) return p;
  throw std::invalid_argument("unknown target '" + std::string(name) + "'");
}

Outcome::Kind reference_outcome(std::string_view name, std::string_view in) {
  if (name == "json_subset") return json_reference(in);
  if (name == "expr_lang") return expr_reference(in);
  if (name == "ini_lang") return ini_reference(in);
  if (name == "digits") return digits_reference(in);
  throw std::invalid_argument("unknown target '" + std::string(name) + "'");
}

}  // namespace ectfuzz::targets
