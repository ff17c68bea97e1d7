#include <algorithm>
#include <chrono>
#include <cstdio>
#include <deque>
#include <fstream>
#include <random>
#include <unordered_set>

#include "ectfuzz/harness.hpp"
#include "ectfuzz/seeds.hpp"
#include "ectfuzz/smt_text.hpp"
#include "ectfuzz/solver.hpp"
#include "ectfuzz/targets.hpp"

namespace ectfuzz {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

double Metrics::pass_rate() const {
  return executed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(executed);
}

double Metrics::generated_pass_rate() const {
  return generated == 0 ? 0.0
                        : static_cast<double>(generated_accepted) / static_cast<double>(generated);
}

double Metrics::llm_success_rate() const {
  return llm_requests == 0 ? 0.0
                           : static_cast<double>(llm_direct) / static_cast<double>(llm_requests);
}

json to_json(const Metrics& m) {
  json saturations = json::array();
  for (const auto& s : m.saturations)
    saturations.push_back(
        {{"iteration", s.iteration}, {"taken_nodes", s.taken_nodes}, {"seeds_added", s.seeds_added}});
  return {{"iterations", m.iterations},
          {"executed", m.executed},
          {"accepted", m.accepted},
          {"rejected", m.rejected},
          {"crashes", m.crashes},
          {"generated", m.generated},
          {"generated_accepted", m.generated_accepted},
          {"seeds", m.seeds},
          {"seeds_accepted", m.seeds_accepted},
          {"pass_rate", m.pass_rate()},
          {"generated_pass_rate", m.generated_pass_rate()},
          {"constraints",
           {{"collected", m.constraints_collected},
            {"deduped", m.constraints_deduped},
            {"selected", m.constraints_selected},
            {"dispatched", m.constraints_dispatched},
            {"solved", m.solved},
            {"unsat", m.unsat},
            {"refined", m.refined},
            {"duplicates", m.duplicates}}},
          {"llm",
           {{"requests", m.llm_requests},
            {"direct", m.llm_direct},
            {"unparseable", m.llm_unparseable},
            {"transport_failures", m.llm_transport_failures},
            {"success_rate", m.llm_success_rate()}}},
          {"acquisitions", m.acquisitions},
          {"saturations", saturations},
          {"taken_nodes", m.taken_nodes},
          {"total_nodes", m.total_nodes}};
}

namespace {

std::string file_name(const TestCase& tc) {
  char id[32];
  std::snprintf(id, sizeof id, "%06llu", static_cast<unsigned long long>(tc.id));
  std::string prov = tc.provenance;
  std::replace(prov.begin(), prov.end(), ':', '-');
  return std::string(id) + "_" + prov + ".bin";
}

void write_bytes(const fs::path& path, ByteView bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Bytes read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::unique_ptr<llm::Transport> make_transport(const CampaignConfig& cfg) {
  if (cfg.mock) return std::make_unique<llm::MockTransport>(*cfg.mock);
  llm::HttpOptions options;
  options.endpoint = cfg.llm_endpoint;
  options.api_key = cfg.api_key;
  options.timeout = std::chrono::milliseconds(static_cast<long long>(cfg.llm_timeout_seconds * 1000));
  return std::make_unique<llm::HttpTransport>(options);
}

class Campaign {
 public:
  Campaign(const CampaignConfig& cfg, llm::Transport& transport)
      : cfg_(cfg),
        program_(targets::find(cfg.target)),
        transport_(transport),
        rng_(cfg.prng_seed),
        start_(std::chrono::steady_clock::now()) {
    saturation_.window = std::chrono::duration<double>(cfg.saturation_window);
    saturation_.iteration_window = cfg.saturation_iterations;
  }

  CampaignResult run() {
    open_outputs();
    load_user_seeds();
    if (cfg_.initial_seeds) acquire(SeedTiming::Initial);
    if (queued() == 0 && cfg_.fresh_seeds) acquire(SeedTiming::Fresh);
    if (queued() == 0) throw ConfigError("no seeds: inputDir is empty and acquisition is disabled");

    double last_poll = 0;
    while (!budget_spent()) {
      bool saturated = queued() == 0;
      if (!saturated) {
        const auto now = elapsed();
        const bool poll = cfg_.saturation_iterations || now - last_poll >= cfg_.cov_timeout;
        if (poll) {
          last_poll = now;
          saturated = is_saturated(saturation_, tree_.generation(), elapsed_d(), iteration_);
        }
      }
      if (saturated) {
        SaturationEvent event{iteration_, tree_.stats().taken_nodes, 0};
        if (cfg_.fresh_seeds) event.seeds_added = acquire(SeedTiming::Fresh);
        metrics_.saturations.push_back(event);
        rearm(saturation_, tree_.generation(), elapsed_d(), iteration_);
        if (queued() == 0) break;
      }
      auto tc = pop();
      execute(tc);
      ++iteration_;
      note_progress(saturation_, tree_.generation(), elapsed_d(), iteration_);
      sample();
    }
    return finish();
  }

 private:
  std::size_t queued() const { return high_.size() + low_.size(); }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  std::chrono::duration<double> elapsed_d() const { return std::chrono::duration<double>(elapsed()); }

  bool budget_spent() const {
    if (cfg_.max_iterations && iteration_ >= *cfg_.max_iterations) return true;
    return elapsed() >= cfg_.timeout_seconds;
  }

  TestCase pop() {
    auto& q = high_.empty() ? low_ : high_;
    TestCase tc = std::move(q.front());
    q.pop_front();
    return tc;
  }

  enum class Slot { Front, High, Low };

  bool enqueue(TestCase tc, Slot slot) {
    if (tc.bytes.size() > cfg_.max_input_len) tc.bytes.resize(cfg_.max_input_len);
    if (!seen_.insert(to_string(tc.bytes)).second) {
      ++metrics_.duplicates;
      return false;
    }
    tc.id = next_id_++;
    tc.iteration = iteration_;
    if (slot == Slot::Front)
      high_.insert(high_.begin() + front_run_++, std::move(tc));
    else
      (slot == Slot::High ? high_ : low_).push_back(std::move(tc));
    return true;
  }

  void open_outputs() {
    if (cfg_.output_dir.empty()) return;
    fs::create_directories(cfg_.output_dir);
    fs::remove_all(cfg_.output_dir / "corpus");
    fs::create_directories(cfg_.output_dir / "corpus");
    if (!cfg_.failed_dir.empty()) fs::create_directories(cfg_.failed_dir);
    selection_log_.open(cfg_.output_dir / "selection.log", std::ios::trunc);
    llm_log_.open(cfg_.output_dir / "llm.log", std::ios::trunc);
    metrics_log_.open(cfg_.output_dir / "metrics.jsonl", std::ios::trunc);
    corpus_log_.open(cfg_.output_dir / "corpus.jsonl", std::ios::trunc);
  }

  void load_user_seeds() {
    if (cfg_.input_dir.empty()) return;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(cfg_.input_dir))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      TestCase tc;
      tc.bytes = read_bytes(f);
      tc.provenance = "seed:user";
      metrics_.seeds += enqueue(std::move(tc), Slot::High);
    }
  }

  std::size_t acquire(SeedTiming timing) {
    ++metrics_.acquisitions;
    const auto got =
        acquire_seeds(timing, history_, cfg_.format, transport_, cfg_.llm_model, rng_);
    log_llm({{"iteration", iteration_},
             {"kind", timing == SeedTiming::Initial ? "seed:initial" : "seed:fresh"},
             {"prompt", got.prompt},
             {"response", got.response},
             {"error", got.error},
             {"provenance", got.provenance}});
    // Seeds fetched on saturation run next, ahead of the stalled queue.
    const auto slot = timing == SeedTiming::Fresh ? Slot::Front : Slot::High;
    front_run_ = 0;
    std::size_t added = 0;
    for (const auto& in : got.inputs) {
      TestCase tc;
      tc.bytes = in;
      tc.provenance = got.provenance;
      added += enqueue(std::move(tc), slot);
    }
    metrics_.seeds += added;
    return added;
  }

  void execute(TestCase& tc) {
    const auto trace = run_concolic(program_, tc.bytes, cfg_.context);
    const auto summary = tree_.record_trace(trace);
    record_history(history_, tc.id, trace, tree_, iteration_);
    tc.outcome = trace.outcome.kind;

    ++metrics_.executed;
    const bool seed = tc.provenance.starts_with("seed:");
    const bool accepted = trace.outcome.kind == Outcome::Kind::Accept;
    metrics_.accepted += accepted;
    metrics_.rejected += trace.outcome.kind == Outcome::Kind::Reject;
    if (seed) {
      metrics_.seeds_accepted += accepted;
    } else {
      ++metrics_.generated;
      metrics_.generated_accepted += accepted;
    }
    if (trace.outcome.kind == Outcome::Kind::Crash) {
      ++metrics_.crashes;
      if (!cfg_.failed_dir.empty()) write_bytes(cfg_.failed_dir / file_name(tc), tc.bytes);
    }
    persist(tc);

    const bool grew = summary.new_taken > 0;
    if (grew || seed) expand(tc, trace, grew);
    corpus_.push_back(std::move(tc));
  }

  void persist(const TestCase& tc) {
    if (cfg_.output_dir.empty()) return;
    const auto name = file_name(tc);
    write_bytes(cfg_.output_dir / "corpus" / name, tc.bytes);
    json line{{"id", tc.id},
              {"file", name},
              {"provenance", tc.provenance},
              {"parent", tc.parent ? json(*tc.parent) : json(nullptr)},
              {"iteration", tc.iteration},
              {"outcome", outcome_name(*tc.outcome)},
              {"goal", tc.goal ? json(print(tc.goal->assertion())) : json(nullptr)},
              {"target_key", tc.target_key},
              {"checked", tc.checked}};
    corpus_log_ << line.dump() << '\n';
  }

  void expand(const TestCase& parent, const Trace& trace, bool grew) {
    metrics_.constraints_collected += trace.constraints.size();
    std::vector<PathConstraint> chosen;
    if (cfg_.select_mode == SelectMode::Ect) {
      const auto survivors = phase1_dedup(trace);
      metrics_.constraints_deduped += survivors.size();
      const auto sel = phase2_select(tree_, survivors, cfg_.selector, memory_);
      for (const auto& rec : sel.log) log_selection(parent, rec.pc, rec.weight, rec.decision);
      for (const auto& c : sel.selected) {
        memory_.record(c.key, iteration_);
        chosen.push_back(c.pc);
      }
    } else {
      metrics_.constraints_deduped += trace.constraints.size();
      chosen = trace.constraints;
      for (const auto& pc : chosen) log_selection(parent, pc, 0.0, "selected");
    }
    metrics_.constraints_selected += chosen.size();

    const EctTree* tree = cfg_.select_mode == SelectMode::Ect ? &tree_ : nullptr;
    for (const auto& pc : chosen) {
      for (const auto& target : negation_targets(pc, trace, tree)) {
        ++metrics_.constraints_dispatched;
        if (auto child = solve(target, parent)) enqueue(std::move(*child), grew ? Slot::High : Slot::Low);
      }
    }
  }

  std::optional<TestCase> solved(Bytes bytes, const char* provenance, const TestCase& parent,
                                 const DispatchTarget& target, bool checked) {
    ++metrics_.solved;
    TestCase tc;
    tc.bytes = std::move(bytes);
    tc.provenance = provenance;
    tc.parent = parent.id;
    tc.goal = target.goal;
    tc.target_key = target.target_key;
    tc.checked = checked;
    return tc;
  }

  std::optional<TestCase> baseline(const DispatchTarget& target, const TestCase& parent) {
    try {
      return solved(solve_fixed(target.goal, parent.bytes), "solved:baseline", parent, target, true);
    } catch (const SolverError&) {
      ++metrics_.unsat;
      return std::nullopt;
    }
  }

  std::optional<TestCase> solve(const DispatchTarget& target, const TestCase& parent) {
    if (cfg_.solve_mode == SolveMode::Baseline || target.goal.positions.empty())
      return baseline(target, parent);

    const auto prompt = llm::build_solve_complete_prompt(target.goal, parent.bytes, cfg_.format);
    ++metrics_.llm_requests;
    json entry{{"iteration", iteration_},
               {"kind", "solve"},
               {"parent", parent.id},
               {"target_key", target.target_key},
               {"prompt", prompt.text}};
    std::optional<Bytes> candidate;
    try {
      const auto response = transport_.complete({cfg_.llm_model, 0.0, "", prompt.text});
      entry["response"] = response.raw;
      candidate = llm::parse_response(response.raw);
      if (candidate->size() > cfg_.max_input_len) candidate->resize(cfg_.max_input_len);
    } catch (const llm::TransportError& e) {
      ++metrics_.llm_transport_failures;
      entry["error"] = e.what();
      log_llm(entry);
      return baseline(target, parent);
    } catch (const llm::Unparseable& e) {
      ++metrics_.llm_unparseable;
      entry["error"] = e.what();
    }
    const bool direct = candidate && evaluate_constraint(target.goal, *candidate);
    metrics_.llm_direct += direct;
    entry["direct"] = direct;
    log_llm(entry);

    if (cfg_.solve_mode == SolveMode::Llm) {
      if (!candidate) return baseline(target, parent);
      return solved(std::move(*candidate), "solved:llm", parent, target, false);
    }
    try {
      auto r = llm::validate_and_refine(target.goal, target.target_key, candidate.value_or(Bytes{}),
                                        parent.bytes, tree_);
      metrics_.refined += r.refined;
      return solved(std::move(r.test), r.refined ? "solved:refined" : "solved:llm", parent, target,
                    true);
    } catch (const llm::UnsatDrop&) {
      ++metrics_.unsat;
      return std::nullopt;
    }
  }

  void log_selection(const TestCase& parent, const PathConstraint& pc, double weight,
                     const std::string& decision) {
    if (!selection_log_.is_open()) return;
    char w[32];
    std::snprintf(w, sizeof w, "%.4f", weight);
    selection_log_ << iteration_ << ' ' << parent.id << ' ' << decision << ' ' << w << ' '
                   << pc.node_key() << ' ' << (pc.taken ? 1 : 0) << ' ' << print(pc.expr) << '\n';
  }

  void log_llm(const json& entry) {
    if (llm_log_.is_open()) llm_log_ << entry.dump() << '\n';
  }

  void sample() {
    const auto stats = tree_.stats();
    MetricsSample s{iteration_, stats.taken_nodes, stats.total_nodes, metrics_.executed,
                    metrics_.accepted, metrics_.constraints_dispatched};
    metrics_.series.push_back(s);
    if (metrics_log_.is_open())
      metrics_log_ << json{{"iteration", s.iteration},
                           {"taken_nodes", s.taken_nodes},
                           {"total_nodes", s.total_nodes},
                           {"executed", s.executed},
                           {"accepted", s.accepted},
                           {"generated", metrics_.generated},
                           {"generated_accepted", metrics_.generated_accepted},
                           {"dispatched", s.dispatched},
                           {"crashes", metrics_.crashes}}
                          .dump()
                   << '\n';
  }

  CampaignResult finish() {
    metrics_.iterations = iteration_;
    const auto stats = tree_.stats();
    metrics_.taken_nodes = stats.taken_nodes;
    metrics_.total_nodes = stats.total_nodes;
    if (!cfg_.output_dir.empty()) {
      std::ofstream(cfg_.output_dir / "ect.json", std::ios::trunc) << ectfuzz::to_json(tree_);
      json per_type = json::object();
      for (const auto& [tp, n] : stats.taken_per_type) per_type[std::to_string(tp)] = n;
      json summary{{"target", cfg_.target},
                   {"format", cfg_.format},
                   {"solver", solve_mode_name(cfg_.solve_mode)},
                   {"select", select_mode_name(cfg_.select_mode)},
                   {"mock", cfg_.mock ? llm::mock_mode_name(*cfg_.mock) : "off"},
                   {"prng_seed", cfg_.prng_seed},
                   {"elapsed_seconds", elapsed()},
                   {"metrics", to_json(metrics_)},
                   {"ect", {{"taken_nodes", stats.taken_nodes},
                            {"total_nodes", stats.total_nodes},
                            {"taken_per_type", per_type}}}};
      std::ofstream(cfg_.output_dir / "summary.json", std::ios::trunc) << summary.dump(2) << '\n';
    }
    return {std::move(metrics_), std::move(tree_), std::move(corpus_)};
  }

  const CampaignConfig& cfg_;
  const ProgramUnderTest& program_;
  llm::Transport& transport_;
  std::mt19937_64 rng_;
  std::chrono::steady_clock::time_point start_;

  EctTree tree_;
  HistoryRecord history_;
  SaturationState saturation_;
  DispatchMemory memory_;
  Metrics metrics_;
  std::deque<TestCase> high_, low_;
  std::size_t front_run_ = 0;
  std::unordered_set<std::string> seen_;
  std::vector<TestCase> corpus_;
  std::uint64_t next_id_ = 0;
  std::uint64_t iteration_ = 0;

  std::ofstream selection_log_, llm_log_, metrics_log_, corpus_log_;
};

}  // namespace

CampaignResult run_campaign(const CampaignConfig& cfg, llm::Transport& transport) {
  cfg.validate();
  return Campaign(cfg, transport).run();
}

CampaignResult run_campaign(const CampaignConfig& cfg) {
  cfg.validate();
  auto transport = make_transport(cfg);
  return Campaign(cfg, *transport).run();
}

ReplayReport replay(const std::string& target, const fs::path& input_file,
                    const std::optional<PathConstraint>& goal) {
  const auto& p = targets::find(target);
  ReplayReport r;
  const auto bytes = read_bytes(input_file);
  r.trace = run_concolic(p, bytes);
  if (goal) r.goal_holds = evaluate_constraint(*goal, bytes);
  return r;
}

}  // namespace ectfuzz
