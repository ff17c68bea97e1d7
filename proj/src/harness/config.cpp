#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ectfuzz/harness.hpp"
#include "ectfuzz/targets.hpp"

namespace ectfuzz {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

const char* solve_mode_name(SolveMode m) {
  switch (m) {
    case SolveMode::Baseline: return "baseline";
    case SolveMode::Llm: return "llm";
    case SolveMode::LlmValidated: return "llm-validated";
  }
  return "?";
}

const char* select_mode_name(SelectMode m) { return m == SelectMode::Ect ? "ect" : "all"; }

SolveMode parse_solve_mode(std::string_view s) {
  if (s == "baseline") return SolveMode::Baseline;
  if (s == "llm") return SolveMode::Llm;
  if (s == "llm-validated" || s == "llm+validator") return SolveMode::LlmValidated;
  throw ConfigError("unknown solver mode '" + std::string(s) + "'");
}

SelectMode parse_select_mode(std::string_view s) {
  if (s == "ect") return SelectMode::Ect;
  if (s == "all") return SelectMode::All;
  throw ConfigError("unknown select mode '" + std::string(s) + "'");
}

std::optional<llm::MockMode> parse_mock_mode(std::string_view s) {
  if (s == "syntax" || s == "syntax_aware") return llm::MockMode::SyntaxAware;
  if (s == "adversarial") return llm::MockMode::Adversarial;
  if (s == "echo") return llm::MockMode::Echo;
  if (s == "off") return std::nullopt;
  throw ConfigError("unknown mock mode '" + std::string(s) + "'");
}

void CampaignConfig::validate() const {
  try {
    targets::find(target);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(timeout_seconds > 0)) throw ConfigError("timeout must be positive");
  if (max_iterations && *max_iterations == 0) throw ConfigError("max_iterations must be positive");
  if (!(cov_timeout > 0) || !(saturation_window > 0))
    throw ConfigError("cov_timeout and saturation_window must be positive");
  if (saturation_iterations && *saturation_iterations == 0)
    throw ConfigError("saturation_iterations must be positive");
  if (max_input_len == 0) throw ConfigError("max_input_len must be positive");
  try {
    selector.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const std::vector<std::pair<const char*, const fs::path*>> dirs{
      {"inputDir", &input_dir}, {"outputDir", &output_dir}, {"failedDir", &failed_dir}};
  for (std::size_t i = 0; i < dirs.size(); ++i)
    for (std::size_t j = i + 1; j < dirs.size(); ++j)
      if (!dirs[i].second->empty() && !dirs[j].second->empty() &&
          fs::weakly_canonical(*dirs[i].second) == fs::weakly_canonical(*dirs[j].second))
        throw ConfigError(std::string(dirs[i].first) + " and " + dirs[j].first + " must differ");
  if (!input_dir.empty() && !fs::is_directory(input_dir))
    throw ConfigError("inputDir does not exist: " + input_dir.string());
  if (!mock && (solve_mode != SolveMode::Baseline || initial_seeds || fresh_seeds) &&
      api_key.empty())
    throw ConfigError("a live model needs api_key (or ECTFUZZ_API_KEY / OPENAI_API_KEY)");
}

namespace {

// Drops a trailing "// comment" and surrounding blanks.
std::string clean(std::string v) {
  for (auto at = v.find("//"); at != std::string::npos; at = v.find("//", at + 2)) {
    if (at > 0 && v[at - 1] == ':') continue;  // URL scheme
    v.erase(at);
    break;
  }
  const auto first = v.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = v.find_last_not_of(" \t\r");
  return v.substr(first, last - first + 1);
}

class Ini {
 public:
  explicit Ini(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file " + file.string());
    try {
      pt::read_ini(in, tree_);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError(e.what());
    }
  }

  std::optional<std::string> get(const std::string& section, const std::string& key) const {
    const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(section + "|" + key, '|'));
    if (!v) return std::nullopt;
    return clean(*v);
  }

  template <class T>
  std::optional<T> number(const std::string& section, const std::string& key) const {
    const auto v = get(section, key);
    if (!v || v->empty()) return std::nullopt;
    std::istringstream in(*v);
    T out{};
    if (!(in >> out) || !in.eof())
      throw ConfigError("[" + section + "] " + key + ": not a number: " + *v);
    return out;
  }

  std::optional<bool> flag(const std::string& section, const std::string& key) const {
    const auto v = get(section, key);
    if (!v || v->empty()) return std::nullopt;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
    throw ConfigError("[" + section + "] " + key + ": not a boolean: " + *v);
  }

 private:
  pt::ptree tree_;
};

}  // namespace

CampaignConfig load_config(const fs::path& file) {
  const Ini ini(file);
  CampaignConfig c;

  c.target = ini.get("running-targets", "target").value_or("");
  if (c.target.empty()) throw ConfigError("[running-targets] target is required");
  try {
    c.format = targets::find(c.target).format_label();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (auto f = ini.get("common-settings", "format"); f && !f->empty()) c.format = *f;
  if (auto v = ini.get("common-settings", "llm_model"); v && !v->empty()) c.llm_model = *v;
  c.api_key = ini.get("common-settings", "api_key").value_or("");
  if (auto v = ini.get("common-settings", "llm_endpoint"); v && !v->empty()) c.llm_endpoint = *v;
  if (auto v = ini.get("common-settings", "mock"); v && !v->empty()) c.mock = parse_mock_mode(*v);
  if (auto v = ini.number<double>("common-settings", "llm_timeout")) c.llm_timeout_seconds = *v;
  if (c.api_key.empty() || c.api_key == "xxx") {
    c.api_key.clear();
    for (const char* name : {"ECTFUZZ_API_KEY", "OPENAI_API_KEY"})
      if (const char* env = std::getenv(name); env && *env) {
        c.api_key = env;
        break;
      }
  }

  fs::path base = fs::absolute(file).parent_path();
  if (auto v = ini.get("running-locations", "mainDir"); v && !v->empty()) base = base / *v;
  auto dir = [&](const char* key) -> fs::path {
    const auto v = ini.get("running-locations", key);
    if (!v || v->empty()) return {};
    return (base / *v).lexically_normal();
  };
  c.input_dir = dir("inputDir");
  c.output_dir = dir("outputDir");
  c.failed_dir = dir("failedDir");
  if (c.failed_dir.empty() && !c.output_dir.empty()) c.failed_dir = c.output_dir / "failed";

  if (auto v = ini.number<double>("running-params", "timeout")) c.timeout_seconds = *v;
  if (auto v = ini.number<double>("running-params", "cov_timeout")) c.cov_timeout = *v;
  if (auto v = ini.number<double>("running-params", "saturation_window")) c.saturation_window = *v;
  c.saturation_iterations = ini.number<std::uint64_t>("running-params", "saturation_iterations");
  c.max_iterations = ini.number<std::uint64_t>("running-params", "max_iterations");
  if (auto v = ini.number<std::uint64_t>("running-params", "seed")) c.prng_seed = *v;
  if (auto v = ini.number<std::size_t>("running-params", "max_input_len")) c.max_input_len = *v;
  if (auto v = ini.get("running-params", "solver"); v && !v->empty())
    c.solve_mode = parse_solve_mode(*v);
  if (auto v = ini.get("running-params", "select"); v && !v->empty())
    c.select_mode = parse_select_mode(*v);
  if (auto v = ini.flag("running-params", "initial_seeds")) c.initial_seeds = *v;
  if (auto v = ini.flag("running-params", "fresh_seeds")) c.fresh_seeds = *v;

  if (auto v = ini.number<double>("selector", "alpha")) c.selector.alpha = *v;
  if (auto v = ini.number<double>("selector", "beta")) c.selector.beta = *v;
  if (auto v = ini.number<double>("selector", "gamma")) c.selector.gamma = *v;
  if (auto v = ini.number<std::size_t>("selector", "top_k")) c.selector.top_k = *v;
  if (auto v = ini.get("selector", "visit_term"); v && !v->empty()) {
    if (*v == "literal") c.selector.visit_term = VisitTerm::Literal;
    else if (*v == "inverse") c.selector.visit_term = VisitTerm::Inverse;
    else throw ConfigError("[selector] visit_term: literal or inverse");
  }
  if (auto v = ini.get("selector", "depth_source"); v && !v->empty()) {
    if (*v == "tree") c.selector.depth_source = DepthSource::TreeDepth;
    else if (*v == "call_stack") c.selector.depth_source = DepthSource::CallStack;
    else throw ConfigError("[selector] depth_source: tree or call_stack");
  }
  return c;
}

}  // namespace ectfuzz
