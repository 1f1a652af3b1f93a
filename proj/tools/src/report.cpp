#include "capillary/cli/report.hpp"

#include <cmath>
#include <cstdio>

#include "capillary/cli/config.hpp"

namespace capillary::cli {

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double number_or_nan(const nlohmann::json& j) { return j.is_null() ? NAN : j.get<double>(); }

Relation relation_from(const std::string& name) {
  for (Relation r : {Relation::approx, Relation::at_most, Relation::at_least, Relation::below, Relation::info}) {
    if (to_string(r) == name) return r;
  }
  throw ConfigError("unknown relation '" + name + "'");
}

}  // namespace

std::string report_json(const nlohmann::json& echo, const std::vector<CheckRecord>& records) {
  nlohmann::json doc;
  doc["schema_version"] = kReportSchema;
  doc["run_config_echo"] = echo;
  nlohmann::json& rows = doc["records"] = nlohmann::json::array();
  for (const CheckRecord& r : records) {
    nlohmann::json j;
    j["check_id"] = r.check_id;
    j["param"] = r.param;
    j["value"] = r.value;
    j["measured"] = r.measured;
    j["expected"] = r.expected;
    j["tolerance"] = r.tolerance;
    j["relation"] = to_string(r.relation);
    j["pass"] = r.pass;
    j["metadata"] = r.metadata;
    rows.push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

std::string report_csv(const std::vector<CheckRecord>& records) {
  std::string out = "schema,check_id,param,value,measured,expected,tolerance,pass\n";
  for (const CheckRecord& r : records) {
    out += std::string(kReportSchema) + "," + csv_field(r.check_id) + "," + csv_field(r.param) + "," +
           (r.param.empty() ? "" : fmt(r.value)) + "," + fmt(r.measured) + "," + fmt(r.expected) + "," +
           fmt(r.tolerance) + "," + (r.pass ? "true" : "false") + "\n";
  }
  return out;
}

std::vector<CheckRecord> load_report(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
  if (doc.value("schema_version", "") != kReportSchema) throw ConfigError("unsupported report schema");
  std::vector<CheckRecord> out;
  for (const nlohmann::json& j : doc.at("records")) {
    CheckRecord r;
    r.check_id = j.at("check_id").get<std::string>();
    r.param = j.at("param").get<std::string>();
    r.value = number_or_nan(j.at("value"));
    r.measured = number_or_nan(j.at("measured"));
    r.expected = number_or_nan(j.at("expected"));
    r.tolerance = number_or_nan(j.at("tolerance"));
    r.relation = relation_from(j.at("relation").get<std::string>());
    r.pass = j.at("pass").get<bool>();
    r.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
    if (!r.consistent()) throw ConfigError("record '" + r.check_id + "' has a pass flag that contradicts its bound");
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace capillary::cli
