#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "capillary/cli/report.hpp"
#include "capillary/error.hpp"
#include "capillary/flow.hpp"
#include "capillary/scenarios.hpp"
#include "capillary/variation.hpp"

using namespace capillary;
namespace fs = std::filesystem;

namespace {

using Records = std::vector<CheckRecord>;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    detail += (detail.empty() ? "" : "; ") + what;
  }
};

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_cli(const std::string& config, const std::string& dir) {
  fs::create_directories(dir);
  std::string cmd = "cd '" + dir + "' && '" CAPILLARY_CLI "' run '" + fs::absolute(config).string() + "' 2>cli.log";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config_path(const std::string& name) { return std::string(CAPILLARY_CONFIG_DIR) + "/" + name; }

bool starts(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

const CheckRecord* find(const Records& r, const std::string& id) {
  for (const CheckRecord& x : r) {
    if (x.check_id == id) return &x;
  }
  return nullptr;
}

/// Every record whose id starts with the prefix passes, and there is at least one.
void all_pass(Outcome& o, const std::string& scenario, const Records& r, const std::string& prefix) {
  int n = 0;
  for (const CheckRecord& x : r) {
    if (!starts(x.check_id, prefix)) continue;
    ++n;
    o.require(x.pass, scenario + ": " + x.check_id + " failed (measured " + std::to_string(x.measured) + ")");
  }
  o.require(n > 0, scenario + ": no " + prefix + " records");
}

Records run_scenario(const std::string& name) {
  Records r = run_checks(make_scenario(name), RunOptions{});
  for (const CheckRecord& x : r) {
    if (!x.consistent()) throw Error("inconsistent record " + x.check_id);
  }
  return r;
}

Outcome criterion(const std::function<void(Outcome&)>& body) {
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.require(false, std::string("threw: ") + e.what());
  }
  return o;
}

NormalPerturbation harmonic(std::function<double(const Vec3&)> f, std::function<Vec3(const Vec3&)> df) {
  return ambient_scalar([f, df](const Vec3& x) { return std::make_pair(f(x), df(x)); }, "harmonic");
}

}  // namespace

int main() {
  std::map<std::string, Records> runs;
  for (const char* name :
       {"sphere", "cylinder", "delaunay_neck", "touching_half_cylinders", "triple_wedge", "two_balls"}) {
    runs[name] = run_scenario(name);
  }
  const int caps_exit = run_cli(config_path("touching_caps.cfg"), "caps");
  Records caps;
  try {
    caps = cli::load_report(read("caps/touching_caps.json"));
  } catch (const std::exception& e) {
    std::cerr << "touching caps report: " << e.what() << "\n";
  }
  runs["touching_caps"] = caps;

  std::vector<std::pair<std::string, Outcome>> results;
  auto add = [&](const std::string& title, const std::function<void(Outcome&)>& body) {
    results.emplace_back(title, criterion(body));
  };

  add("closed-form sphere and cylinder geometry to 1e-8", [&](Outcome& o) {
    for (const char* s : {"sphere", "cylinder"}) {
      all_pass(o, s, runs[s], "closed_form.");
      for (const CheckRecord& x : runs[s]) {
        if (starts(x.check_id, "closed_form.")) o.require(x.measured <= 1e-8, std::string(s) + " " + x.check_id);
      }
    }
    o.require(find(runs["sphere"], "closed_form.area") && find(runs["sphere"], "closed_form.volume") &&
                  find(runs["sphere"], "closed_form.H") && find(runs["sphere"], "closed_form.A2") &&
                  find(runs["cylinder"], "closed_form.H"),
              "missing closed-form records");
  });
  add("multipliers 2/r, 1/a, H and stationarity residuals over 20 fields", [&](Outcome& o) {
    // multipliers of the unit-scale scenarios: 2/r, 1/a, H, 1/a, 1/a
    const std::map<std::string, double> oracle{{"sphere", 2.0},
                                               {"cylinder", 1.0},
                                               {"delaunay_neck", 1.0},
                                               {"touching_half_cylinders", 1.0},
                                               {"triple_wedge", 1.0}};
    for (const auto& [s, lambda] : oracle) {
      all_pass(o, s, runs[s], "stationarity.");
      int components = 0;
      for (const CheckRecord& x : runs[s]) {
        if (!starts(x.check_id, "stationarity.lambda.c")) continue;
        ++components;
        o.require(std::abs(x.measured - lambda) <= 1e-5 * lambda, s + ": " + x.check_id + " off the oracle");
      }
      const CheckRecord* res = find(runs[s], "stationarity.residual");
      o.require(components > 0 && res && res->measured <= 1e-5, s + ": residual");
    }
  });
  add("analytic variations agree with finite differences", [&](Outcome& o) {
    int scenarios = 0;
    for (const auto& [s, r] : runs) {
      if (!find(r, "fd_oracle.first")) continue;
      ++scenarios;
      all_pass(o, s, r, "fd_oracle.");
      o.require(find(r, "fd_oracle.first_order") && find(r, "fd_oracle.second_order"), s + ": missing orders");
    }
    o.require(scenarios >= 5, "only " + std::to_string(scenarios) + " scenarios carry the oracle");
    o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(scenarios) + " scenarios";
  });
  add("sphere zero mode and degree-2 eigenvalue", [&](Outcome& o) {
    Scenario sphere = scenario_sphere(1.0);
    Potential g = Potential::zero();
    const double lambda = 2.0;
    // integrals of z^2, (xy)^2 and (3z^2 - 1)^2 over the unit sphere
    NormalPerturbation z = harmonic([](const Vec3& x) { return x.z(); }, [](const Vec3&) { return Vec3::UnitZ(); });
    double q1 = second_variation_ambient(sphere.config, g, z, lambda).value;
    o.require(std::abs(q1) <= 1e-6 * 4.0 * kPi / 3.0, "degree 1 gives " + std::to_string(q1));
    NormalPerturbation xy = harmonic([](const Vec3& x) { return x.x() * x.y(); },
                                     [](const Vec3& x) { return Vec3(x.y(), x.x(), 0.0); });
    NormalPerturbation zonal = harmonic([](const Vec3& x) { return 3.0 * x.z() * x.z() - 1.0; },
                                        [](const Vec3& x) { return Vec3(0.0, 0.0, 6.0 * x.z()); });
    for (auto [zeta, norm2] : {std::pair{xy, 4.0 * kPi / 15.0}, std::pair{zonal, 16.0 * kPi / 5.0}}) {
      double q2 = second_variation_ambient(sphere.config, g, zeta, lambda).value;
      o.require(std::abs(q2 - 4.0 * norm2) <= 1e-4 * 4.0 * norm2, "degree 2 gives " + std::to_string(q2));
    }
  });
  add("break-up paths lower the energy at first order", [&](Outcome& o) {
    for (const char* s : {"touching_half_cylinders", "triple_wedge"}) {
      all_pass(o, s, runs[s], "breakup.");
      const CheckRecord* fv = find(runs[s], "breakup.first_variation");
      o.require(fv && fv->measured < 0.0, std::string(s) + ": first variation not negative");
      o.require(find(runs[s], "breakup.boundary_term") && find(runs[s], "breakup.fd_finest"), "missing records");
    }
  });
  add("touching caps: -2 pi t boundary terms and second variation below -3 pi", [&](Outcome& o) {
    o.require(caps_exit == 0, "touching caps run exited with " + std::to_string(caps_exit));
    all_pass(o, "touching_caps", caps, "coalescence.");
    for (const char* id : {"coalescence.boundary_M@t=0.01", "coalescence.boundary_N@t=0.02",
                           "coalescence.boundary_rate_M", "coalescence.first_variation_0",
                           "coalescence.total_strictly_decreasing", "coalescence.total_above_minus_4pi",
                           "coalescence.total_below_minus_3pi", "coalescence.volume_rate_decreasing",
                           "coalescence.U2_decreasing"}) {
      o.require(find(caps, id) != nullptr, std::string("missing ") + id);
    }
    // the CSV row of the total at the smallest R0
    std::istringstream csv(read("caps/touching_caps.csv"));
    std::string line, last_total;
    while (std::getline(csv, line)) {
      if (line.find(",coalescence.total,R0,") != std::string::npos) last_total = line;
    }
    double total = NAN;
    if (!last_total.empty()) {
      std::vector<std::string> cols;
      std::istringstream row(last_total);
      for (std::string c; std::getline(row, c, ',');) cols.push_back(c);
      total = std::stod(cols.at(4));
    }
    o.require(total < -3.0 * kPi, "smallest-R0 total in the CSV is " + std::to_string(total));
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("total at R/48 = ") + std::to_string(total);
  });
  add("sampled stability and the two-drop negative control", [&](Outcome& o) {
    for (const char* s : {"touching_half_cylinders", "touching_caps", "triple_wedge", "two_balls"}) {
      all_pass(o, s, runs[s], "stability.");
      const CheckRecord* n = find(runs[s], "stability.samples");
      o.require(n && n->measured >= 50.0, std::string(s) + ": fewer than 50 samples");
    }
    all_pass(o, "two_balls", runs["two_balls"], "negative_control.");
    const CheckRecord* d = find(runs["two_balls"], "negative_control.joint_constraint_descent");
    o.require(d && d->measured < 0.0, "joint constraint finds no descent");
  });
  add("radial flow semigroup and volume drift along every path", [&](Outcome& o) {
    RadialFlow flow{CutoffChi(1.0 / 6.0)};
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      double r = 0.01 + 0.5 * u(rng), th = 2.0 * kPi * u(rng);
      Vec3 x(r * std::cos(th), r * std::sin(th), u(rng) - 0.5);
      double s = 0.1 * u(rng), t = 0.1 * u(rng);
      worst = std::max(worst, (flow.map(t, flow.map(s, x)) - flow.map(s + t, x)).norm());
    }
    o.require(worst <= 1e-9, "semigroup defect " + std::to_string(worst));
    int drifts = 0;
    for (const auto& [s, r] : runs) {
      for (const CheckRecord& x : r) {
        if (x.check_id.find("drift") == std::string::npos) continue;
        ++drifts;
        o.require(x.pass && x.measured <= 1e-9, s + ": " + x.check_id);
      }
    }
    o.require(drifts > 0, "no volume drift records");
  });
  add("identical configs give byte-identical reports", [&](Outcome& o) {
    std::vector<std::string> texts;
    for (const char* dir : {"repeat_a", "repeat_b"}) {
      int rc = run_cli(config_path("two_balls.cfg"), dir);
      o.require(rc == 0, std::string(dir) + " exited with " + std::to_string(rc));
      texts.push_back(read(fs::path(dir) / "report.json"));
      texts.push_back(read(fs::path(dir) / "report.csv"));
    }
    o.require(!texts[0].empty() && texts[0] == texts[2], "JSON reports differ");
    o.require(!texts[1].empty() && texts[1] == texts[3], "CSV reports differ");
  });

  bool ok = true;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& [title, o] = results[i];
    ok = ok && o.pass;
    std::printf("criterion %zu: %s  %s%s%s\n", i + 1, o.pass ? "PASS" : "FAIL", title.c_str(),
                o.detail.empty() ? "" : "  -- ", o.detail.c_str());
  }
  return ok ? 0 : 1;
}
