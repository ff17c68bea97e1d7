// Command-line front end: run a campaign, replay one input, summarize a run.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "ectfuzz/harness.hpp"
#include "ectfuzz/smt_text.hpp"
#include "ectfuzz/targets.hpp"

using namespace ectfuzz;

namespace {

int run(const std::string& config_file, const std::string& solver, const std::string& select,
        const std::string& mock, std::optional<std::uint64_t> iterations,
        std::optional<std::uint64_t> seed, const std::string& output) {
  auto cfg = load_config(config_file);
  if (!solver.empty()) cfg.solve_mode = parse_solve_mode(solver);
  if (!select.empty()) cfg.select_mode = parse_select_mode(select);
  if (!mock.empty()) cfg.mock = parse_mock_mode(mock);
  if (iterations) cfg.max_iterations = iterations;
  if (seed) cfg.prng_seed = *seed;
  if (!output.empty()) {
    const bool default_failed = cfg.failed_dir == cfg.output_dir / "failed";
    cfg.output_dir = output;
    if (default_failed || cfg.failed_dir.empty()) cfg.failed_dir = cfg.output_dir / "failed";
  }
  const auto result = run_campaign(cfg);
  const auto& m = result.metrics;
  std::cout << "iterations " << m.iterations << ", taken nodes " << m.taken_nodes << "/"
            << m.total_nodes << ", pass rate " << m.pass_rate() << ", crashes " << m.crashes
            << '\n';
  if (m.llm_requests > 0)
    std::cout << "llm direct-solve rate " << m.llm_success_rate() << " over " << m.llm_requests
              << " requests\n";
  if (!cfg.output_dir.empty()) std::cout << "artifacts in " << cfg.output_dir.string() << '\n';
  return 0;
}

int replay_cmd(const std::string& target, const std::string& input, const std::string& constraint) {
  std::optional<PathConstraint> goal;
  if (!constraint.empty()) {
    PathConstraint pc;
    pc.expr = parse_expr(constraint);
    pc.positions = positions(pc.expr);
    goal = pc;
  }
  const auto r = replay(target, input, goal);
  std::cout << "outcome " << outcome_name(r.trace.outcome.kind);
  if (!r.trace.outcome.reason.empty()) std::cout << " (" << r.trace.outcome.reason << ")";
  std::cout << "\nconstraints " << r.trace.constraints.size() << "\nvisits " << r.trace.visits.size()
            << '\n';
  if (r.goal_holds) std::cout << "constraint " << (*r.goal_holds ? "holds" : "violated") << '\n';
  return r.goal_holds && !*r.goal_holds ? 1 : 0;
}

int report_cmd(const std::string& dir, bool as_json) {
  const auto summary = report(dir);
  if (as_json)
    std::cout << summary.dump(2) << '\n';
  else
    std::cout << render_report(summary);
  std::ofstream(std::filesystem::path(dir) / "report.json") << summary.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concolic testing of structured-input parsers with model-assisted solving"};
  app.require_subcommand(1);

  std::string config, solver, select, mock, output;
  std::optional<std::uint64_t> iterations, seed;
  auto* run_app = app.add_subcommand("run", "Run a campaign from a config file");
  run_app->add_option("--config", config, "INI campaign file")->required()->check(CLI::ExistingFile);
  run_app->add_option("--solver", solver, "baseline | llm | llm-validated")
      ->check(CLI::IsMember({"baseline", "llm", "llm-validated"}));
  run_app->add_option("--select", select, "ect | all")->check(CLI::IsMember({"ect", "all"}));
  run_app->add_option("--mock", mock, "syntax | adversarial | echo | off")
      ->check(CLI::IsMember({"syntax", "adversarial", "echo", "off"}));
  run_app->add_option("--iterations", iterations, "Stop after this many test cases");
  run_app->add_option("--seed", seed, "PRNG seed");
  run_app->add_option("--output", output, "Override outputDir");

  std::string target, input, constraint;
  auto* replay_app = app.add_subcommand("replay", "Run one input through a target");
  std::vector<std::string> names;
  for (const auto& p : targets::registry()) names.push_back(p.name);
  replay_app->add_option("--target", target)->required()->check(CLI::IsMember(names));
  replay_app->add_option("--input", input)->required()->check(CLI::ExistingFile);
  replay_app->add_option("--constraint", constraint, "SMT-LIB assertion to check on the input");

  std::string dir;
  bool as_json = false;
  auto* report_app = app.add_subcommand("report", "Summarize a campaign directory");
  report_app->add_option("--dir", dir)->required();
  report_app->add_flag("--json", as_json, "Print the JSON summary");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_app) return run(config, solver, select, mock, iterations, seed, output);
    if (*replay_app) return replay_cmd(target, input, constraint);
    if (*report_app) return report_cmd(dir, as_json);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
