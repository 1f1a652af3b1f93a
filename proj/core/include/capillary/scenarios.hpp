#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "capillary/deformation.hpp"
#include "capillary/delaunay.hpp"

namespace capillary {

enum class CheckKind {
  closed_form,
  stationarity,
  stability,
  fd_oracle,
  volume_path,
  breakup_first_variation,
  coalescence_second_variation,
  mean_curvature_constancy,
  curvature_supremum,
  negative_control
};

std::string to_string(CheckKind k);

/// How measured is compared with expected.
enum class Relation {
  approx,    // |measured - expected| <= tolerance
  at_most,   // measured <= expected + tolerance
  at_least,  // measured >= expected - tolerance
  below,     // measured < expected
  info       // diagnostic, always passes
};

std::string to_string(Relation r);
bool satisfies(Relation r, double measured, double expected, double tolerance);

struct CheckRecord {
  std::string check_id;
  std::string param;  // swept parameter, empty when the record is not part of a sweep
  double value = 0.0;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  Relation relation = Relation::info;
  bool pass = true;
  std::map<std::string, std::string> metadata;

  bool consistent() const { return pass == satisfies(relation, measured, expected, tolerance); }
};

CheckRecord make_record(std::string check_id, double measured, double expected, double tolerance, Relation relation);

struct Scenario {
  std::string name;
  std::vector<std::pair<std::string, double>> params;
  PieceConfig config;
  Potential potential = Potential::zero();
  std::map<int, double> lambda;  // multiplier per component
  std::vector<CheckKind> checks;
  std::vector<SamplingRegion> sampling;      // where seeded test fields live
  std::map<int, AmbientField> corrections;   // volume correction per component
  std::vector<Wedge> wedges;
  std::optional<double> wedge_angle;
  std::optional<CuspPairConfig> cusp;
  std::optional<double> mean_curvature;      // constant |H| of the sheets
  std::optional<Window> curvature_window;
  std::map<std::string, double> closed_form;  // area, volume, H, A2
};

Scenario scenario_sphere(double r = 1.0);
Scenario scenario_cylinder(double a = 1.0, double L = 6.0);
/// Two cylinders of radius a along the x axis touching along it, liquid inside both.
Scenario scenario_touching_half_cylinders(double a = 1.0, double L = 4.0);
/// Two balls of radius cap_radius touching at the origin, seen in B_3R x (-R, R).
Scenario scenario_touching_caps(double cap_radius = 6.0, double R = 1.0);
/// The non-stationary pair u = -alpha r^2, v = alpha r^2, liquid outside.
Scenario scenario_touching_paraboloids(double alpha = 1.0, double R = 1.0);
/// Three lenses cut out by circles of radius a centred on an equilateral triangle, meeting along the x axis.
Scenario scenario_triple_wedge(double a = 1.0, double L = 4.0);
Scenario scenario_two_balls(double r1 = 1.0, double r2 = 2.0, double separation = 1.0);
Scenario scenario_delaunay_neck(double a = 0.5, double H = 1.0, double extent = 4.0);

struct ScenarioInfo {
  std::string name;
  std::vector<std::pair<std::string, double>> defaults;
  std::string summary;
};

std::vector<ScenarioInfo> list_scenarios();
/// Builds a scenario by name; missing parameters take their defaults, unknown ones are rejected.
Scenario make_scenario(const std::string& name, const std::map<std::string, double>& params = {});

/// Largest |A| over the sheet quadrature nodes inside W.
double curvature_supremum(const PieceConfig& cfg, const Window& W, int level = kDefaultResolution);

struct Tolerances {
  double geometry = 1e-8;
  double lambda = 1e-5;
  double stationarity = 1e-5;
  double stability = 1e-4;
  double fd_relative = 1e-4;
  double fd_order = 1.9;
  double breakup_fd = 0.05;
  double volume_drift = 1e-9;
  double boundary = 1e-8;
  double first_variation = 1e-5;
  double mean_curvature = 1e-6;
};

struct RunOptions {
  int geometry_resolution = kDefaultResolution;  // closed forms
  int resolution = 5;       // stationarity, stability and coalescence quadrature
  int path_resolution = 4;  // energies along flowed paths
  std::uint64_t seed = 1;
  std::vector<double> r0_fractions{1.0 / 6.0, 1.0 / 12.0, 1.0 / 24.0, 1.0 / 48.0};  // of R
  std::vector<double> t_stencil{1e-2, 5e-3, 2.5e-3, 1.25e-3};                       // of R
  std::vector<double> boundary_times{0.01, 0.02};                                   // of R
  int stationarity_fields = 20;
  int stability_samples = 50;
  std::optional<double> lambda_override;
  Tolerances tol;
};

/// Runs every check the scenario declares; deterministic in (options, seed).
std::vector<CheckRecord> run_checks(const Scenario& s, const RunOptions& opt);

/// One check family on its own, for sweeps and benchmarks.
std::vector<CheckRecord> run_check(const Scenario& s, CheckKind kind, const RunOptions& opt);

enum class SweepParameter { r0, resolution, t_step };

std::string to_string(SweepParameter p);
/// Accepts "R0", "resolution" and "t-step".
SweepParameter parse_sweep_parameter(const std::string& name);

/// Table of check values against the swept parameter, plus "sweep.<metric>.rate" rows holding the
/// observed order log(|d_k| / |d_{k+1}|) / log(h_k / h_{k+1}) of successive differences d.
/// R0 values are absolute, t-steps are path parameters, resolutions are levels (h = 2^-level).
std::vector<CheckRecord> run_sweep(const Scenario& s, SweepParameter p, const std::vector<double>& values,
                                   const RunOptions& opt);

/// Seeded fields cycling through the scenario's sampling regions.
std::vector<AmbientField> seeded_fields(const Scenario& s, std::uint64_t seed, int count);

}  // namespace capillary
