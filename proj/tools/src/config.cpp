#include "capillary/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace capillary::cli {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry>;

const std::vector<std::string> kSections{"scenario", "run", "output", "tolerances"};

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  std::size_t a = s.find_first_not_of(ws);
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(ws);
  return s.substr(a, b - a + 1);
}

bool is_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

ConfigError at(int line, const std::string& what) { return ConfigError("line " + std::to_string(line) + ": " + what); }

double number(const Entry& e, const std::string& key) {
  try {
    return parse_number(e.value);
  } catch (const ConfigError& err) {
    throw at(e.line, key + ": " + err.what());
  }
}

double positive(const Entry& e, const std::string& key) {
  double v = number(e, key);
  if (!(v > 0.0)) throw at(e.line, key + " must be positive, got " + e.value);
  return v;
}

int level(const Entry& e, const std::string& key) {
  double v = number(e, key);
  if (v != std::floor(v) || v < 1.0 || v > 12.0) throw at(e.line, key + " must be an integer in [1, 12], got " + e.value);
  return static_cast<int>(v);
}

int count(const Entry& e, const std::string& key) {
  double v = number(e, key);
  if (v != std::floor(v) || v < 1.0 || v > 1e6) throw at(e.line, key + " must be a positive integer, got " + e.value);
  return static_cast<int>(v);
}

std::vector<double> positive_list(const Entry& e, const std::string& key, bool decreasing) {
  std::vector<double> v;
  try {
    v = parse_list(e.value);
  } catch (const ConfigError& err) {
    throw at(e.line, key + ": " + err.what());
  }
  if (v.empty()) throw at(e.line, key + " is empty");
  for (double x : v) {
    if (!(x > 0.0)) throw at(e.line, key + " values must be positive, got " + e.value);
  }
  if (decreasing) {
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (!(v[i] < v[i - 1])) throw at(e.line, key + " values must be strictly decreasing");
    }
  }
  return v;
}

CheckKind check_kind(const std::string& name, int line) {
  for (int k = 0; k <= static_cast<int>(CheckKind::negative_control); ++k) {
    if (to_string(static_cast<CheckKind>(k)) == name) return static_cast<CheckKind>(k);
  }
  throw at(line, "unknown check '" + name + "'");
}

void reject_unknown(const Section& sec, const std::string& name, const std::set<std::string>& allowed) {
  for (const auto& [k, e] : sec) {
    if (!allowed.count(k)) throw at(e.line, "unknown key '" + k + "' in [" + name + "]");
  }
}

std::map<std::string, Section> tokenize(const std::string& text) {
  std::map<std::string, Section> out;
  std::istringstream in(text.rfind("\xEF\xBB\xBF", 0) == 0 ? text.substr(3) : text);
  std::string raw, current;
  std::set<std::string> seen;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw.substr(0, raw.find('#')));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw at(line, "unterminated section header");
      current = trim(s.substr(1, s.size() - 2));
      if (std::find(kSections.begin(), kSections.end(), current) == kSections.end()) {
        throw at(line, "unknown section [" + current + "]");
      }
      if (!seen.insert(current).second) throw at(line, "section [" + current + "] appears twice");
      out[current];
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) throw at(line, "expected 'key = value'");
    std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
    if (!is_key(key)) throw at(line, "malformed key '" + key + "'");
    if (value.empty()) throw at(line, "no value for '" + key + "'");
    if (current.empty()) throw at(line, "'" + key + "' appears before any section");
    if (!out[current].emplace(key, Entry{value, line}).second) {
      throw at(line, "duplicate key '" + key + "' in [" + current + "]");
    }
  }
  return out;
}

}  // namespace

double parse_number(const std::string& text) {
  std::string s = trim(text);
  std::size_t slash = s.find('/');
  if (slash != std::string::npos) {
    double num = parse_number(s.substr(0, slash)), den = parse_number(s.substr(slash + 1));
    if (den == 0.0) throw ConfigError("division by zero in '" + s + "'");
    return num / den;
  }
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) throw ConfigError("not a number: '" + s + "'");
  return v;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_number(item));
  return out;
}

RunConfig parse_config(const std::string& text) {
  std::map<std::string, Section> sections = tokenize(text);
  RunConfig cfg;
  RunOptions& opt = cfg.options;
  nlohmann::json& echo = cfg.echo;

  Section& sc = sections["scenario"];
  if (!sc.count("name")) throw ConfigError("[scenario] needs a name");
  cfg.scenario = sc.at("name").value;
  const ScenarioInfo* info = nullptr;
  std::vector<ScenarioInfo> known = list_scenarios();
  for (const ScenarioInfo& i : known) {
    if (i.name == cfg.scenario) info = &i;
  }
  if (!info) throw at(sc.at("name").line, "unknown scenario '" + cfg.scenario + "'");
  std::set<std::string> allowed{"name", "lambda"};
  for (const auto& [k, v] : info->defaults) allowed.insert(k);
  if (cfg.scenario == "touching_caps") allowed.insert("alpha");
  reject_unknown(sc, "scenario", allowed);
  for (const auto& [k, e] : sc) {
    if (k == "name") continue;
    if (k == "lambda") {
      opt.lambda_override = number(e, k);
    } else {
      cfg.params[k] = positive(e, k);
    }
  }
  Scenario s;
  try {
    s = build_scenario(cfg);
  } catch (const Error& e) {
    throw ConfigError(std::string("[scenario]: ") + e.what());
  }
  echo["scenario"]["name"] = cfg.scenario;
  for (const auto& [k, v] : s.params) echo["scenario"][k] = v;
  if (cfg.params.count("alpha")) echo["scenario"]["alpha"] = cfg.params.at("alpha");
  if (opt.lambda_override) {
    echo["scenario"]["lambda"] = *opt.lambda_override;
  } else {
    for (const auto& [c, l] : s.lambda) echo["scenario"]["lambda"][std::to_string(c)] = l;
  }

  Section& run = sections["run"];
  reject_unknown(run, "run",
                 {"geometry_resolution", "resolution", "path_resolution", "seed", "r0", "t_stencil", "boundary_times",
                  "stationarity_fields", "stability_samples", "checks"});
  if (run.count("geometry_resolution")) opt.geometry_resolution = level(run.at("geometry_resolution"), "geometry_resolution");
  if (run.count("resolution")) opt.resolution = level(run.at("resolution"), "resolution");
  if (run.count("path_resolution")) opt.path_resolution = level(run.at("path_resolution"), "path_resolution");
  if (run.count("seed")) {
    const Entry& e = run.at("seed");
    const char* end = e.value.data() + e.value.size();
    auto [ptr, ec] = std::from_chars(e.value.data(), end, opt.seed);
    if (ec != std::errc() || ptr != end) throw at(e.line, "seed must be a non-negative integer, got " + e.value);
  }
  if (run.count("r0")) opt.r0_fractions = positive_list(run.at("r0"), "r0", true);
  if (run.count("t_stencil")) {
    opt.t_stencil = positive_list(run.at("t_stencil"), "t_stencil", true);
    if (opt.t_stencil.size() < 2) throw at(run.at("t_stencil").line, "t_stencil needs at least two steps");
  }
  if (run.count("boundary_times")) opt.boundary_times = positive_list(run.at("boundary_times"), "boundary_times", false);
  if (run.count("stationarity_fields")) opt.stationarity_fields = count(run.at("stationarity_fields"), "stationarity_fields");
  if (run.count("stability_samples")) opt.stability_samples = count(run.at("stability_samples"), "stability_samples");
  if (run.count("checks") && run.at("checks").value != "all") {
    const Entry& e = run.at("checks");
    std::istringstream in(e.value);
    std::string item;
    while (std::getline(in, item, ',')) {
      CheckKind k = check_kind(trim(item), e.line);
      if (std::find(s.checks.begin(), s.checks.end(), k) == s.checks.end()) {
        throw at(e.line, "scenario '" + cfg.scenario + "' does not declare the check '" + trim(item) + "'");
      }
      if (std::find(cfg.checks.begin(), cfg.checks.end(), k) == cfg.checks.end()) cfg.checks.push_back(k);
    }
  }
  nlohmann::json& r = echo["run"];
  r["geometry_resolution"] = opt.geometry_resolution;
  r["resolution"] = opt.resolution;
  r["path_resolution"] = opt.path_resolution;
  r["seed"] = opt.seed;
  r["r0"] = opt.r0_fractions;
  r["t_stencil"] = opt.t_stencil;
  r["boundary_times"] = opt.boundary_times;
  r["stationarity_fields"] = opt.stationarity_fields;
  r["stability_samples"] = opt.stability_samples;
  r["checks"] = nlohmann::json::array();
  for (CheckKind k : cfg.checks.empty() ? s.checks : cfg.checks) r["checks"].push_back(to_string(k));

  Section& out = sections["output"];
  reject_unknown(out, "output", {"json", "csv"});
  if (out.count("json")) cfg.json_path = out.at("json").value;
  if (out.count("csv")) cfg.csv_path = out.at("csv").value;
  echo["output"]["json"] = cfg.json_path;
  echo["output"]["csv"] = cfg.csv_path;

  Tolerances& tol = opt.tol;
  const std::vector<std::pair<std::string, double*>> tolerances{
      {"geometry", &tol.geometry},         {"lambda", &tol.lambda},
      {"stationarity", &tol.stationarity}, {"stability", &tol.stability},
      {"fd_relative", &tol.fd_relative},   {"fd_order", &tol.fd_order},
      {"breakup_fd", &tol.breakup_fd},     {"volume_drift", &tol.volume_drift},
      {"boundary", &tol.boundary},         {"first_variation", &tol.first_variation},
      {"mean_curvature", &tol.mean_curvature}};
  Section& ts = sections["tolerances"];
  std::set<std::string> tol_keys;
  for (const auto& [k, p] : tolerances) tol_keys.insert(k);
  reject_unknown(ts, "tolerances", tol_keys);
  for (const auto& [k, p] : tolerances) {
    if (ts.count(k)) *p = positive(ts.at(k), k);
    echo["tolerances"][k] = *p;
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

Scenario build_scenario(const RunConfig& cfg) { return make_scenario(cfg.scenario, cfg.params); }

}  // namespace capillary::cli
