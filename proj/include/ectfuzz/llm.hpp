#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ectfuzz/ect.hpp"
#include "ectfuzz/trace.hpp"

namespace ectfuzz::llm {

class Unparseable : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class UnsatDrop : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class TransportError : public std::runtime_error {
 public:
  TransportError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  /// HTTP status, or 0 when no response arrived.
  int code() const noexcept { return code_; }

 private:
  int code_;
};
class TimeoutError : public TransportError {
 public:
  explicit TimeoutError(const std::string& what) : TransportError(0, what) {}
};

/// Prompt notation for raw bytes: `\\` is a backslash, `\xHH` any byte that
/// is not printable ASCII (newline stays literal), and backticks plus any
/// `[` that would read as a mask are always hex-escaped.
std::string escape_bytes(ByteView bytes);
/// Inverse of escape_bytes. Unknown backslash sequences are kept verbatim.
Bytes unescape_bytes(std::string_view text);

struct MaskedSeed {
  std::string text;  // escaped seed prefix with `[k!n]` tokens and a trailing `[xxx]`
  std::map<std::string, std::size_t> constrained_positions;
  std::size_t flexible_origin = 0;
};

/// Masks every position of `goal` and replaces the rest of the seed after
/// the last one with the flexible mask.
MaskedSeed mask_seed(const PathConstraint& goal, ByteView seed);

struct SolvePrompt {
  MaskedSeed masked;
  std::string text;
};

/// Throws std::invalid_argument when goal.positions is empty.
SolvePrompt build_solve_complete_prompt(const PathConstraint& goal, ByteView seed,
                                        std::string_view format);

/// Test input from the last fenced block of a reply, or from its last
/// double-quoted string when there is no block. Throws Unparseable.
Bytes parse_response(std::string_view reply);
/// Every fenced block in order; empty when there are none.
std::vector<Bytes> parse_blocks(std::string_view reply);

struct ValidationResult {
  Bytes test;
  bool refined = false;
};

/// The candidate when it already satisfies `goal`; otherwise the candidate
/// (padded with the seed's tail when too short) with the solver's bytes
/// written at goal.positions. Both paths mark `target_key` in the tree's
/// expected-branch bookkeeping. Throws UnsatDrop.
ValidationResult validate_and_refine(const PathConstraint& goal, const std::string& target_key,
                                     ByteView candidate, ByteView seed, EctTree& tree);

struct Request {
  std::string model;
  double temperature = 0.0;
  std::string system;
  std::string user;
};

struct Response {
  std::string raw;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual Response complete(const Request& request) = 0;
};

struct HttpOptions {
  std::string endpoint = "https://api.openai.com/v1";
  std::string api_key;
  std::chrono::milliseconds timeout{60000};
  int attempts = 3;
  std::chrono::milliseconds backoff{500};
};

/// OpenAI-compatible `POST {endpoint}/chat/completions`. Retries 429, 5xx and
/// connection failures with exponential backoff; throws TimeoutError when the
/// last attempt timed out and TransportError otherwise.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(HttpOptions options);
  Response complete(const Request& request) override;

 private:
  HttpOptions options_;
  std::string origin_;
  std::string base_path_;
};

enum class MockMode { SyntaxAware, Adversarial, Echo };

/// Deterministic offline stand-in for a model. Solve prompts are answered
/// per mode; seed prompts get canned or history-derived inputs.
class MockTransport : public Transport {
 public:
  explicit MockTransport(MockMode mode) : mode_(mode) {}
  Response complete(const Request& request) override;
  std::size_t calls() const { return calls_; }

 private:
  MockMode mode_;
  std::size_t calls_ = 0;
};

/// Always fails; exercises fallbacks.
class DownTransport : public Transport {
 public:
  Response complete(const Request&) override {
    throw TransportError(503, "transport unavailable");
  }
};

const char* mock_mode_name(MockMode mode);

/// Prefix checks and minimal completions for the bundled formats.
class Completer {
 public:
  virtual ~Completer() = default;
  /// False once `prefix` cannot be extended into an accepted input.
  virtual bool viable(std::string_view prefix) const = 0;
  /// Shortest-effort tail that makes a viable prefix an accepted input.
  virtual std::string complete(std::string_view prefix) const = 0;
};

/// Completer for a format label (JSON, EXPR, INI, DIGITS); null if unknown.
std::unique_ptr<Completer> completer_for(std::string_view format);

}  // namespace ectfuzz::llm
