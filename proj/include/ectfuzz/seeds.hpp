#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ectfuzz/ect.hpp"
#include "ectfuzz/llm.hpp"
#include "ectfuzz/trace.hpp"

namespace ectfuzz {

struct HistoryEntry {
  std::uint64_t id = 0;
  Bytes input;
  std::set<std::string> covered;  // arm keys the run took
  Outcome::Kind outcome = Outcome::Kind::Reject;
  std::uint64_t iteration = 0;
};

/// Which inputs covered which branches, plus the tree-wide partition of
/// materialized node keys into covered and uncovered.
struct HistoryRecord {
  static constexpr std::size_t kRecentCapacity = 32;

  std::vector<HistoryEntry> entries;
  std::set<std::string> covered;
  std::set<std::string> uncovered;
  std::deque<Bytes> recent;  // newest last
};

void record_history(HistoryRecord& h, std::uint64_t id, const Trace& trace, const EctTree& tree,
                    std::uint64_t iteration);

struct SaturationState {
  std::uint64_t last_generation = 0;
  std::chrono::duration<double> last_change{0};
  std::uint64_t last_change_iteration = 0;
  std::chrono::duration<double> window{180};
  /// Counts iterations instead of clock time when set.
  std::optional<std::uint64_t> iteration_window;
};

/// Moves the reference point forward when the tree generation changed.
void note_progress(SaturationState& s, std::uint64_t generation,
                   std::chrono::duration<double> now, std::uint64_t iteration);
/// Restarts the window, e.g. right after fresh seeds were acquired.
void rearm(SaturationState& s, std::uint64_t generation, std::chrono::duration<double> now,
           std::uint64_t iteration);
/// True iff the generation equals the last one seen and the window elapsed.
bool is_saturated(const SaturationState& s, std::uint64_t generation,
                  std::chrono::duration<double> now, std::uint64_t iteration);

inline constexpr std::size_t kSeedsPerAcquisition = 4;
inline constexpr std::size_t kPromptLocBudget = 20;
inline constexpr std::size_t kPromptRecentInputs = 3;

std::string build_initial_seed_prompt(std::string_view format,
                                      std::size_t count = kSeedsPerAcquisition);
std::string build_fresh_seed_prompt(const HistoryRecord& h, std::string_view format,
                                    std::size_t count = kSeedsPerAcquisition);

/// `length` bytes drawn uniformly from printable ASCII.
Bytes random_seed(std::size_t length, std::mt19937_64& rng);

enum class SeedTiming { Initial, Fresh };

struct AcquiredSeeds {
  std::vector<Bytes> inputs;
  std::string provenance;  // seed:llm:initial, seed:llm:fresh or seed:random
  std::string prompt;
  std::string response;
  std::string error;  // transport failure that forced the random fallback
};

/// Never throws on transport failure or an empty reply: falls back to
/// `count` random seeds.
AcquiredSeeds acquire_seeds(SeedTiming timing, const HistoryRecord& h, std::string_view format,
                            llm::Transport& transport, const std::string& model,
                            std::mt19937_64& rng, std::size_t count = kSeedsPerAcquisition);

}  // namespace ectfuzz
