#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "capillary/error.hpp"
#include "capillary/scenarios.hpp"
#include "json.hpp"

namespace capillary::cli {

/// Malformed or invalid configuration text.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Unreadable input or unwritable output.
class IoError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  std::string scenario;
  std::map<std::string, double> params;  // as given; defaults live in the scenario
  std::vector<CheckKind> checks;         // empty runs every check the scenario declares
  RunOptions options;
  std::string json_path = "report.json";
  std::string csv_path = "report.csv";
  /// Every setting after defaults were filled in, by section.
  nlohmann::json echo;
};

/// Grammar: "[section]" headers, "key = value" lines, "#" comments. Sections are
/// [scenario] (name, lambda, scenario parameters), [run], [output] and [tolerances].
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// A decimal number or a quotient "a/b" of two.
double parse_number(const std::string& text);
std::vector<double> parse_list(const std::string& text);

Scenario build_scenario(const RunConfig& cfg);

}  // namespace capillary::cli
