#include "capillary/cli/driver.hpp"

#include <fstream>
#include <iomanip>

#include "capillary/cli/report.hpp"

namespace capillary::cli {

namespace {

/// Both outputs are probed before any work so a bad path fails fast, and only truncated when written.
class ReportFiles {
 public:
  explicit ReportFiles(const RunConfig& cfg) : json_(cfg.json_path), csv_(cfg.csv_path) {
    for (const std::string& path : {json_, csv_}) {
      std::ofstream probe(path, std::ios::binary | std::ios::app);
      if (!probe) throw IoError("cannot write '" + path + "'");
    }
  }

  void write(const nlohmann::json& echo, const std::vector<CheckRecord>& records) const {
    put(json_, report_json(echo, records));
    put(csv_, report_csv(records));
  }

 private:
  static void put(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << text;
    f.flush();
    if (!f) throw IoError("failed to write '" + path + "'");
  }

  std::string json_;
  std::string csv_;
};

int finish(const std::vector<CheckRecord>& records, std::ostream& log) {
  int failed = 0;
  for (const CheckRecord& r : records) {
    if (r.pass) continue;
    ++failed;
    log << "FAIL " << r.check_id;
    if (!r.param.empty()) log << " [" << r.param << " = " << r.value << "]";
    log << ": measured " << std::setprecision(10) << r.measured << ", " << to_string(r.relation) << " "
        << r.expected << " (tolerance " << r.tolerance << ")\n";
  }
  log << records.size() << " records, " << failed << " failed\n";
  return failed ? kCheckFailed : kAllPassed;
}

template <class F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExecutionError;
  }
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& log) {
  return guarded(log, [&] {
    ReportFiles files(cfg);
    Scenario s = build_scenario(cfg);
    std::vector<CheckRecord> records;
    for (CheckKind k : cfg.checks.empty() ? s.checks : cfg.checks) {
      log << "running " << to_string(k) << " on " << s.name << "\n";
      for (CheckRecord& r : run_check(s, k, cfg.options)) {
        r.metadata["scenario"] = s.name;
        r.metadata["check"] = to_string(k);
        r.metadata["seed"] = std::to_string(cfg.options.seed);
        r.metadata["resolution"] = std::to_string(cfg.options.resolution);
        r.metadata["path_resolution"] = std::to_string(cfg.options.path_resolution);
        records.push_back(std::move(r));
      }
    }
    files.write(cfg.echo, records);
    return finish(records, log);
  });
}

int sweep(const RunConfig& cfg, const std::string& parameter, const std::vector<std::string>& values,
          std::ostream& log) {
  return guarded(log, [&] {
    SweepParameter p = parse_sweep_parameter(parameter);
    std::vector<double> v;
    for (const std::string& text : values) {
      for (double x : parse_list(text)) v.push_back(x);
    }
    ReportFiles files(cfg);
    Scenario s = build_scenario(cfg);
    log << "sweeping " << to_string(p) << " on " << s.name << "\n";
    std::vector<CheckRecord> records = run_sweep(s, p, v, cfg.options);
    for (CheckRecord& r : records) {
      r.metadata["seed"] = std::to_string(cfg.options.seed);
    }
    nlohmann::json echo = cfg.echo;
    echo["sweep"]["param"] = to_string(p);
    echo["sweep"]["values"] = v;
    files.write(echo, records);
    return finish(records, log);
  });
}

void print_scenarios(std::ostream& out) {
  for (const ScenarioInfo& info : list_scenarios()) {
    out << info.name << "\n  " << info.summary << "\n  defaults:";
    for (const auto& [k, v] : info.defaults) out << " " << k << " = " << v;
    out << "\n";
  }
}

}  // namespace capillary::cli
