#include <cmath>

#include "capillary/cli/config.hpp"
#include "capillary/cli/report.hpp"
#include "doctest.h"

using namespace capillary;
using namespace capillary::cli;

TEST_CASE("numbers and lists") {
  CHECK(parse_number(" 2.5 ") == 2.5);
  CHECK(parse_number("1/6") == 1.0 / 6.0);
  CHECK_THROWS_AS(parse_number("1/0"), ConfigError);
  CHECK_THROWS_AS(parse_number("nan"), ConfigError);
  CHECK_THROWS_AS(parse_number("2x"), ConfigError);
  CHECK(parse_list("1, 1/2,0.25") == std::vector<double>{1.0, 0.5, 0.25});
}

TEST_CASE("a minimal touching caps config takes the documented defaults") {
  RunConfig cfg = parse_config("# minimal\n[scenario]\nname = touching_caps\n");
  CHECK(cfg.scenario == "touching_caps");
  CHECK(cfg.echo["scenario"]["R"] == 1.0);
  CHECK(cfg.echo["scenario"]["cap_radius"] == 6.0);
  std::vector<double> r0 = cfg.echo["run"]["r0"];
  CHECK(r0 == std::vector<double>{1.0 / 6.0, 1.0 / 12.0, 1.0 / 24.0, 1.0 / 48.0});
  CHECK(cfg.echo["run"]["seed"] == 1);
  CHECK(cfg.echo["tolerances"]["geometry"] == 1e-8);
  CHECK(cfg.echo["output"]["json"] == "report.json");
  CHECK(cfg.echo["run"]["checks"].size() == 4);
}

TEST_CASE("settings override the defaults") {
  RunConfig cfg = parse_config(
      "[scenario]\nname = sphere  # unit\nr = 2\nlambda = 1\n"
      "[run]\nresolution = 3\nseed = 7\nt_stencil = 0.02, 0.01\nchecks = stationarity\n"
      "[output]\njson = out/x.json\n[tolerances]\nlambda = 1e-3\n");
  CHECK(cfg.params.at("r") == 2.0);
  CHECK(*cfg.options.lambda_override == 1.0);
  CHECK(cfg.options.resolution == 3);
  CHECK(cfg.options.seed == 7);
  CHECK(cfg.options.t_stencil.size() == 2);
  CHECK(cfg.checks == std::vector<CheckKind>{CheckKind::stationarity});
  CHECK(cfg.json_path == "out/x.json");
  CHECK(cfg.csv_path == "report.csv");
  CHECK(cfg.options.tol.lambda == 1e-3);
  CHECK(build_scenario(cfg).lambda.at(1) == doctest::Approx(1.0));
}

TEST_CASE("configuration errors name the line and the key") {
  auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("accepted");
  };
  CHECK(message("[scenario]\nname = sphere\nfoo = 1\n") == "line 3: unknown key 'foo' in [scenario]");
  CHECK(message("[scenario]\nname = sphere\n[run]\nfoo = 1\n") == "line 4: unknown key 'foo' in [run]");
  CHECK(message("[scenario]\nname = nowhere\n") == "line 2: unknown scenario 'nowhere'");
  CHECK(message("[scenario]\nname = sphere\nthis line is wrong\n") == "line 3: expected 'key = value'");
  CHECK(message("name = sphere\n") == "line 1: 'name' appears before any section");
  CHECK(message("[scenario]\nname = sphere\n[extra]\n") == "line 3: unknown section [extra]");
  CHECK(message("[scenario]\nname = sphere\nname = cylinder\n") == "line 3: duplicate key 'name' in [scenario]");
  CHECK(message("[run]\nseed = 1\n") == "[scenario] needs a name");
  CHECK(message("[scenario]\nname = touching_caps\n[run]\nr0 = 1/6, -1/12\n").find("line 4: r0 values must be positive") == 0);
  CHECK(message("[scenario]\nname = sphere\nr = -1\n").find("line 3: r must be positive") == 0);
  CHECK(message("[scenario]\nname = sphere\n[run]\nresolution = 0\n").find("line 4: resolution") == 0);
  CHECK(message("[scenario]\nname = sphere\n[run]\nseed = -3\n").find("line 4: seed") == 0);
  CHECK(message("[scenario]\nname = sphere\n[run]\nchecks = breakup_first_variation\n").find("line 4: scenario") == 0);
  CHECK(message("[scenario]\nname = touching_caps\nalpha = 1\n").find("[scenario]") == 0);
}

TEST_CASE("reports round trip and expose inconsistent pass flags") {
  std::vector<CheckRecord> records{make_record("a", 1.0, 1.0, 0.1, Relation::approx),
                                   make_record("b", 2.0, 1.0, 0.5, Relation::at_most),
                                   make_record("c", NAN, 0.0, 0.0, Relation::info)};
  records[1].param = "R0";
  records[1].value = 1.0 / 6.0;
  records[1].metadata["seed"] = "1";
  nlohmann::json echo = {{"scenario", {{"name", "sphere"}}}};
  std::string json = report_json(echo, records);
  std::vector<CheckRecord> back = load_report(json);
  REQUIRE(back.size() == 3);
  CHECK(back[1].value == records[1].value);
  CHECK_FALSE(back[1].pass);
  CHECK(back[1].metadata == records[1].metadata);
  CHECK(std::isnan(back[2].measured));
  CHECK(nlohmann::json::parse(json)["schema_version"] == kReportSchema);

  std::string csv = report_csv(records);
  CHECK(csv.rfind("schema,check_id,param,value,measured,expected,tolerance,pass\n", 0) == 0);
  CHECK(csv.find("capillary-report/1,b,R0,0.16666666666666666,2,1,0.5,false\n") != std::string::npos);

  nlohmann::json tampered = nlohmann::json::parse(json);
  tampered["records"][1]["pass"] = true;
  CHECK_THROWS_AS(load_report(tampered.dump()), ConfigError);
}
