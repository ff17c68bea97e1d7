#include <fstream>
#include <iomanip>
#include <sstream>

#include "ectfuzz/harness.hpp"
#include "ectfuzz/smt_text.hpp"

namespace ectfuzz {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::vector<json> read_lines(const fs::path& file) {
  std::vector<json> out;
  std::ifstream in(file);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void require_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("not a campaign directory: " + dir.string());
  if (!fs::exists(dir / "summary.json"))
    throw ConfigError("no summary.json in " + dir.string());
}

}  // namespace

AuditResult audit(const fs::path& output_dir) {
  require_dir(output_dir);
  AuditResult r;
  for (const auto& entry : read_lines(output_dir / "corpus.jsonl")) {
    if (!entry.value("checked", false) || entry["goal"].is_null()) continue;
    PathConstraint goal;
    goal.expr = parse_expr(entry["goal"].get<std::string>());
    goal.positions = positions(goal.expr);
    const auto file = entry["file"].get<std::string>();
    ++r.checked;
    if (!evaluate_constraint(goal, read_file(output_dir / "corpus" / file)))
      r.violations.push_back(file);
  }
  return r;
}

json report(const fs::path& output_dir) {
  require_dir(output_dir);
  json summary;
  std::ifstream(output_dir / "summary.json") >> summary;
  const auto& m = summary["metrics"];

  json series = json::array();
  for (const auto& line : read_lines(output_dir / "metrics.jsonl"))
    series.push_back({{"iteration", line["iteration"]}, {"taken_nodes", line["taken_nodes"]}});

  std::map<std::string, std::size_t> provenance;
  for (const auto& entry : read_lines(output_dir / "corpus.jsonl"))
    ++provenance[entry["provenance"].get<std::string>()];
  json prov = json::object();
  for (const auto& [k, v] : provenance) prov[k] = v;

  const auto audited = audit(output_dir);
  return {{"target", summary["target"]},
          {"solver", summary["solver"]},
          {"select", summary["select"]},
          {"iterations", m["iterations"]},
          {"pass_rate", m["pass_rate"]},
          {"generated_pass_rate", m["generated_pass_rate"]},
          {"crashes", m["crashes"]},
          {"llm_success_rate", m["llm"]["success_rate"]},
          {"constraints", m["constraints"]},
          {"ect", summary["ect"]},
          {"corpus", prov},
          {"audit", {{"checked", audited.checked}, {"violations", audited.violations.size()}}},
          {"coverage_series", series}};
}

std::string render_report(const json& s) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "target      " << s["target"].get<std::string>() << " (solver "
      << s["solver"].get<std::string>() << ", select " << s["select"].get<std::string>() << ")\n"
      << "iterations  " << s["iterations"] << '\n'
      << "pass rate   " << s["pass_rate"].get<double>() << " overall, "
      << s["generated_pass_rate"].get<double>() << " generated\n"
      << "crashes     " << s["crashes"] << '\n'
      << "llm direct  " << s["llm_success_rate"].get<double>() << '\n'
      << "ect         " << s["ect"]["taken_nodes"] << " taken / " << s["ect"]["total_nodes"]
      << " nodes\n"
      << "constraints ";
  for (const auto& [k, v] : s["constraints"].items()) out << k << '=' << v << ' ';
  out << "\ncorpus      ";
  for (const auto& [k, v] : s["corpus"].items()) out << k << '=' << v << ' ';
  out << "\naudit       " << s["audit"]["checked"] << " checked, " << s["audit"]["violations"]
      << " violations\n";
  const auto& series = s["coverage_series"];
  if (!series.empty()) {
    out << "coverage    ";
    const std::size_t step = std::max<std::size_t>(1, series.size() / 10);
    for (std::size_t i = 0; i < series.size(); i += step)
      out << series[i]["iteration"] << ':' << series[i]["taken_nodes"] << ' ';
    out << series.back()["iteration"] << ':' << series.back()["taken_nodes"] << '\n';
  }
  return out.str();
}

}  // namespace ectfuzz
