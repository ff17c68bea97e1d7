// Prefix scanners for the bundled formats. Each mirrors the corresponding
// target grammar closely enough to say whether a prefix can still be
// accepted and which short tail closes it.

#include <optional>
#include <vector>

#include "ectfuzz/llm.hpp"

namespace ectfuzz::llm {

namespace {

bool digit(char c) { return c >= '0' && c <= '9'; }
bool alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool hex(char c) { return digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F'); }

class JsonScan {
 public:
  bool feed(char c) {
    switch (state_) {
      case St::String: return string_char(c);
      case St::Escape:
        if (c == 'u') {
          state_ = St::Unicode;
          hex_left_ = 4;
          return true;
        }
        if (std::string_view("\"\\/bfnrt").find(c) == std::string_view::npos) return false;
        state_ = St::String;
        return true;
      case St::Unicode:
        if (!hex(c)) return false;
        if (--hex_left_ == 0) state_ = St::String;
        return true;
      case St::NumMinus:
        if (c == '0') {
          state_ = St::NumZero;
          return true;
        }
        if (!digit(c)) return false;
        state_ = St::NumDigits;
        return true;
      case St::NumDigits:
        if (digit(c)) return true;
        state_ = St::AfterValue;
        return feed(c);
      case St::NumZero:
        state_ = St::AfterValue;
        return feed(c);
      case St::Literal:
        if (literal_.empty() || literal_.front() != c) return false;
        literal_.remove_prefix(1);
        if (literal_.empty()) state_ = St::AfterValue;
        return true;
      default: break;
    }
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') return true;
    switch (state_) {
      case St::Value:
      case St::ValueOrClose: return value_start(c);
      case St::KeyOrClose:
        if (c == '}') return close('o');
        [[fallthrough]];
      case St::Key:
        if (c != '"') return false;
        state_ = St::String;
        in_key_ = true;
        return true;
      case St::Colon:
        if (c != ':') return false;
        state_ = St::Value;
        return true;
      case St::AfterValue:
        if (stack_.empty()) return false;
        if (c == ',') {
          state_ = stack_.back() == 'o' ? St::Key : St::Value;
          return true;
        }
        if (c == '}') return close('o');
        if (c == ']') return close('a');
        return false;
      default: return false;
    }
  }

  std::string tail() const {
    std::string out;
    auto state = state_;
    bool key = in_key_;
    switch (state) {
      case St::Escape: out += "n\""; break;
      case St::Unicode: out += std::string(hex_left_, '1') + "\""; break;
      case St::String: out += "\""; break;
      case St::NumMinus: out += "1"; break;
      case St::Literal: out += std::string(literal_); break;
      case St::Value: out += "0"; break;
      case St::ValueOrClose: break;
      case St::KeyOrClose: break;
      case St::Key: out += "\"k\":0"; break;
      case St::Colon: out += ":0"; break;
      default: break;
    }
    if ((state == St::Escape || state == St::Unicode || state == St::String) && key) out += ":0";
    if (state == St::Value && stack_.empty() && !started_) out = "{}";
    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) out += *it == 'o' ? '}' : ']';
    return out;
  }

 private:
  enum class St {
    Value, ValueOrClose, KeyOrClose, Key, Colon, AfterValue,
    String, Escape, Unicode, NumMinus, NumZero, NumDigits, Literal
  };

  bool value_start(char c) {
    if (state_ == St::ValueOrClose && c == ']') return close('a');
    if (stack_.empty() && started_) return false;
    started_ = true;
    switch (c) {
      case '{': stack_.push_back('o'); state_ = St::KeyOrClose; return true;
      case '[': stack_.push_back('a'); state_ = St::ValueOrClose; return true;
      case '"': state_ = St::String; in_key_ = false; return true;
      case 't': literal_ = "rue"; state_ = St::Literal; return true;
      case 'f': literal_ = "alse"; state_ = St::Literal; return true;
      case 'n': literal_ = "ull"; state_ = St::Literal; return true;
      case '-': state_ = St::NumMinus; return true;
      case '0': state_ = St::NumZero; return true;
      default:
        if (!digit(c)) return false;
        state_ = St::NumDigits;
        return true;
    }
  }

  bool close(char kind) {
    if (stack_.empty() || stack_.back() != kind) return false;
    stack_.pop_back();
    state_ = St::AfterValue;
    return true;
  }

  bool string_char(char c) {
    if (c == '"') {
      state_ = in_key_ ? St::Colon : St::AfterValue;
      return true;
    }
    if (c == '\\') {
      state_ = St::Escape;
      return true;
    }
    return static_cast<unsigned char>(c) >= 0x20;
  }

  St state_ = St::Value;
  std::vector<char> stack_;
  std::string_view literal_;
  int hex_left_ = 0;
  bool in_key_ = false;
  bool started_ = false;
};

class JsonCompleter : public Completer {
 public:
  bool viable(std::string_view prefix) const override { return scan(prefix).has_value(); }
  std::string complete(std::string_view prefix) const override {
    const auto s = scan(prefix);
    return s ? s->tail() : "";
  }

 private:
  static std::optional<JsonScan> scan(std::string_view prefix) {
    JsonScan s;
    for (char c : prefix)
      if (!s.feed(c)) return std::nullopt;
    return s;
  }
};

struct ExprState {
  std::vector<char> stack;  // 'p' parenthesis, 'c' call arguments
  bool expect_operand = true;
  bool stmt_start = true;
  bool after_semi = false;
  bool empty_call = false;
  bool last_ident = false;
  bool last_return = false;
  bool any_token = false;
};

std::optional<ExprState> scan_expr(std::string_view s) {
  ExprState st;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (c == ' ' || c == '\t' || c == '\n') {
      ++i;
      continue;
    }
    const bool empty_call = st.empty_call;
    const bool last_ident = st.last_ident;
    st.empty_call = st.last_ident = st.last_return = false;
    st.any_token = true;
    if (digit(c) || alpha(c) || c == '_' || c == '$') {
      const auto start = i;
      if (digit(c)) {
        while (i < s.size() && digit(s[i])) ++i;
      } else {
        while (i < s.size() && (digit(s[i]) || alpha(s[i]) || s[i] == '_' || s[i] == '$')) ++i;
      }
      // A trailing "return" outside statement position may still grow into an identifier.
      const bool keyword = s.substr(start, i - start) == "return" && (st.stmt_start || i < s.size());
      if (!st.expect_operand) return std::nullopt;
      if (keyword) {
        if (!st.stmt_start) return std::nullopt;
        st.stmt_start = st.after_semi = false;
        st.last_return = true;
        continue;
      }
      st.expect_operand = st.stmt_start = st.after_semi = false;
      st.last_ident = !digit(c);
      continue;
    }
    ++i;
    switch (c) {
      case '(':
        if (st.expect_operand) {
          st.stack.push_back('p');
        } else if (last_ident) {
          st.stack.push_back('c');
          st.empty_call = true;
          st.expect_operand = true;
        } else {
          return std::nullopt;
        }
        break;
      case ')':
        if (st.stack.empty()) return std::nullopt;
        if (st.expect_operand && !(empty_call && st.stack.back() == 'c')) return std::nullopt;
        st.stack.pop_back();
        st.expect_operand = false;
        break;
      case ',':
        if (st.expect_operand || st.stack.empty() || st.stack.back() != 'c') return std::nullopt;
        st.expect_operand = true;
        break;
      case '+':
      case '*':
      case '/':
        if (st.expect_operand) return std::nullopt;
        st.expect_operand = true;
        break;
      case '-':
        st.expect_operand = true;
        break;
      case ';':
        if (st.expect_operand || !st.stack.empty()) return std::nullopt;
        st.expect_operand = st.stmt_start = st.after_semi = true;
        continue;
      default: return std::nullopt;
    }
    st.stmt_start = st.after_semi = false;
  }
  return st;
}

class ExprCompleter : public Completer {
 public:
  bool viable(std::string_view prefix) const override { return scan_expr(prefix).has_value(); }
  std::string complete(std::string_view prefix) const override {
    const auto st = scan_expr(prefix);
    if (!st) return "";
    std::string out;
    if (!st->any_token)
      out = "1";
    else if (st->expect_operand && !st->after_semi)
      out = st->last_return ? " 1" : "1";
    for (auto it = st->stack.rbegin(); it != st->stack.rend(); ++it) out += ')';
    return out;
  }
};

class IniCompleter : public Completer {
 public:
  bool viable(std::string_view prefix) const override { return tail_for(prefix).has_value(); }
  std::string complete(std::string_view prefix) const override {
    return tail_for(prefix).value_or("");
  }

 private:
  static bool name(char c) { return alpha(c) || digit(c) || c == '_' || c == '.'; }

  // Tail closing the last (possibly partial) line, or nullopt on a bad prefix.
  static std::optional<std::string> tail_for(std::string_view s) {
    std::size_t start = 0;
    for (;;) {
      const auto nl = s.find('\n', start);
      const auto line = s.substr(start, nl == std::string_view::npos ? s.size() - start : nl - start);
      const auto tail = line_tail(line);
      if (!tail) return std::nullopt;
      if (nl == std::string_view::npos) return tail;
      if (!tail->empty()) return std::nullopt;
      start = nl + 1;
    }
  }

  static std::optional<std::string> line_tail(std::string_view l) {
    if (l.empty()) return "";
    if (l[0] == ';' || l[0] == '#') return "";
    std::size_t i = 0;
    if (l[0] == '[') {
      i = 1;
      while (i < l.size() && name(l[i])) ++i;
      const auto len = i - 1;
      if (i == l.size()) return len == 0 ? "s]" : "]";
      if (len == 0 || l[i] != ']') return std::nullopt;
      for (++i; i < l.size(); ++i)
        if (l[i] != ' ' && l[i] != '\t') return std::nullopt;
      return "";
    }
    while (i < l.size() && name(l[i])) ++i;
    if (i == 0) return std::nullopt;
    while (i < l.size() && (l[i] == ' ' || l[i] == '\t')) ++i;
    if (i == l.size()) return "=";
    if (l[i] != '=') return std::nullopt;
    for (++i; i < l.size(); ++i)
      if (static_cast<unsigned char>(l[i]) < 0x20 && l[i] != '\t') return std::nullopt;
    return "";
  }
};

class DigitsCompleter : public Completer {
 public:
  bool viable(std::string_view prefix) const override {
    for (char c : prefix)
      if (!digit(c)) return false;
    return true;
  }
  std::string complete(std::string_view prefix) const override {
    return prefix.empty() ? "0" : "";
  }
};

}  // namespace

std::unique_ptr<Completer> completer_for(std::string_view format) {
  if (format == "JSON") return std::make_unique<JsonCompleter>();
  if (format == "EXPR") return std::make_unique<ExprCompleter>();
  if (format == "INI") return std::make_unique<IniCompleter>();
  if (format == "DIGITS") return std::make_unique<DigitsCompleter>();
  return nullptr;
}

}  // namespace ectfuzz::llm
