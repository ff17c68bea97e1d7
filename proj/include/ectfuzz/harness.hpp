#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ectfuzz/llm.hpp"
#include "ectfuzz/selector.hpp"
#include "ectfuzz/trace.hpp"

namespace ectfuzz {

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SolveMode { Baseline, Llm, LlmValidated };
enum class SelectMode { Ect, All };

const char* solve_mode_name(SolveMode m);
const char* select_mode_name(SelectMode m);
SolveMode parse_solve_mode(std::string_view s);    // throws ConfigError
SelectMode parse_select_mode(std::string_view s);  // throws ConfigError
/// "syntax", "adversarial", "echo", or "off" (nullopt: real HTTP transport).
std::optional<llm::MockMode> parse_mock_mode(std::string_view s);

struct CampaignConfig {
  std::string target;
  std::string format;  // defaults to the target's label
  double timeout_seconds = 43200;
  std::optional<std::uint64_t> max_iterations;
  double cov_timeout = 60;
  double saturation_window = 180;
  std::optional<std::uint64_t> saturation_iterations;
  std::filesystem::path input_dir;
  std::filesystem::path output_dir;
  std::filesystem::path failed_dir;
  SelectorParams selector;
  SolveMode solve_mode = SolveMode::Baseline;
  SelectMode select_mode = SelectMode::Ect;
  std::string llm_model = "gpt-4o-mini";
  std::string api_key;
  std::string llm_endpoint = "https://api.openai.com/v1";
  double llm_timeout_seconds = 60;
  std::optional<llm::MockMode> mock = llm::MockMode::SyntaxAware;
  bool initial_seeds = false;  // ask the model for seeds before the first run
  bool fresh_seeds = true;     // ask again whenever coverage saturates
  std::uint64_t prng_seed = 0;
  std::size_t max_input_len = 4096;
  ContextOptions context;

  /// Throws ConfigError.
  void validate() const;
};

/// Reads the INI-style campaign file. Relative directories resolve against
/// `mainDir`, or the file's own directory when that key is absent. An empty
/// `api_key` is taken from ECTFUZZ_API_KEY, then OPENAI_API_KEY.
CampaignConfig load_config(const std::filesystem::path& file);

struct MetricsSample {
  std::uint64_t iteration = 0;
  std::size_t taken_nodes = 0;
  std::size_t total_nodes = 0;
  std::uint64_t executed = 0;
  std::uint64_t accepted = 0;
  std::uint64_t dispatched = 0;
};

struct SaturationEvent {
  std::uint64_t iteration = 0;
  std::size_t taken_nodes = 0;
  std::size_t seeds_added = 0;
};

struct Metrics {
  std::uint64_t iterations = 0;
  /// Every test case run, seeds included.
  std::uint64_t executed = 0;
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t crashes = 0;
  /// Test cases produced by a solver or model, and how many of those passed.
  std::uint64_t generated = 0;
  std::uint64_t generated_accepted = 0;
  std::uint64_t seeds = 0;
  std::uint64_t seeds_accepted = 0;

  std::uint64_t constraints_collected = 0;
  std::uint64_t constraints_deduped = 0;  // phase-1 survivors
  std::uint64_t constraints_selected = 0;
  std::uint64_t constraints_dispatched = 0;  // negations handed to a solver
  std::uint64_t solved = 0;
  std::uint64_t unsat = 0;
  std::uint64_t refined = 0;
  std::uint64_t duplicates = 0;

  std::uint64_t llm_requests = 0;
  std::uint64_t llm_direct = 0;  // replies satisfying the constraint as given
  std::uint64_t llm_unparseable = 0;
  std::uint64_t llm_transport_failures = 0;

  std::uint64_t acquisitions = 0;
  std::vector<SaturationEvent> saturations;

  std::size_t taken_nodes = 0;
  std::size_t total_nodes = 0;
  std::vector<MetricsSample> series;

  /// Accepted over executed.
  double pass_rate() const;
  double generated_pass_rate() const;
  double llm_success_rate() const;
};

nlohmann::ordered_json to_json(const Metrics& m);

struct TestCase {
  std::uint64_t id = 0;
  Bytes bytes;
  std::string provenance;
  std::optional<std::uint64_t> parent;
  std::uint64_t iteration = 0;
  std::optional<Outcome::Kind> outcome;
  /// For solved:* cases: the negated constraint and the arm it aims at.
  std::optional<PathConstraint> goal;
  std::string target_key;
  /// True when the bytes went through a solver or the validator.
  bool checked = false;
};

struct CampaignResult {
  Metrics metrics;
  EctTree tree;
  std::vector<TestCase> corpus;
};

/// Runs one campaign. With a non-empty output_dir it writes ect.json,
/// selection.log, llm.log, metrics.jsonl, corpus/, corpus.jsonl and
/// summary.json there, and copies crashing inputs to failed_dir. Throws
/// ConfigError before starting; runtime problems are logged.
CampaignResult run_campaign(const CampaignConfig& cfg);
/// Same, with the model transport supplied by the caller.
CampaignResult run_campaign(const CampaignConfig& cfg, llm::Transport& transport);

struct ReplayReport {
  Trace trace;
  std::optional<bool> goal_holds;
};

/// Runs `input_file` through `target`; when `goal` is given, also evaluates it.
ReplayReport replay(const std::string& target, const std::filesystem::path& input_file,
                    const std::optional<PathConstraint>& goal = std::nullopt);

struct AuditResult {
  std::size_t checked = 0;
  std::vector<std::string> violations;  // corpus file names
};

/// Re-evaluates the recorded constraint of every checked solved:* case in a
/// campaign directory against its bytes on disk.
AuditResult audit(const std::filesystem::path& output_dir);

/// Summary of a campaign directory. Throws ConfigError when it is missing.
nlohmann::ordered_json report(const std::filesystem::path& output_dir);
std::string render_report(const nlohmann::ordered_json& summary);

}  // namespace ectfuzz
