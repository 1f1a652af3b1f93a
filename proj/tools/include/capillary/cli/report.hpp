#pragma once

#include <string>
#include <vector>

#include "capillary/scenarios.hpp"
#include "json.hpp"

namespace capillary::cli {

inline constexpr const char* kReportSchema = "capillary-report/1";

std::string report_json(const nlohmann::json& echo, const std::vector<CheckRecord>& records);
/// Columns schema,check_id,param,value,measured,expected,tolerance,pass; one row per record.
std::string report_csv(const std::vector<CheckRecord>& records);

/// Reads a JSON report back; throws ConfigError if a pass flag disagrees with its bound.
std::vector<CheckRecord> load_report(const std::string& json_text);

}  // namespace capillary::cli
