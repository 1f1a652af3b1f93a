#include "capillary/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "capillary/error.hpp"

namespace capillary {

namespace {

/// Overlap of a test field with the sheets, relative to their area, below which it is treated as grazing.
constexpr double kGrazing = 1e-6;
constexpr double kSubstantial = 1e-2;

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

/// (x, phi) -> (x, c_y + a cos phi, c_z + a sin phi)
class ArcCylinderChart final : public Chart {
 public:
  ArcCylinderChart(double cy, double cz, double a) : cy_(cy), cz_(cz), a_(a) {}
  ChartJet jet1(const Vec2& p) const override { return jet2(p); }
  ChartJet jet2(const Vec2& p) const override {
    double c = std::cos(p.y()), s = std::sin(p.y());
    ChartJet j;
    j.x = Vec3(p.x(), cy_ + a_ * c, cz_ + a_ * s);
    j.xu = Vec3::UnitX();
    j.xv = Vec3(0.0, -a_ * s, a_ * c);
    j.xvv = Vec3(0.0, -a_ * c, -a_ * s);
    return j;
  }

 private:
  double cy_, cz_, a_;
};

Vec3 yz(double angle) { return Vec3(0.0, std::cos(angle), std::sin(angle)); }

double deg(double d) { return d * kPi / 180.0; }

Piece sheet(std::string name, SurfacePatch patch, int component) {
  return Piece{std::move(name), std::move(patch), component, PieceRole::sheet};
}

Piece cap(std::string name, SurfacePatch patch, int component) {
  return Piece{std::move(name), std::move(patch), component, PieceRole::cap};
}

double field_magnitude(const PieceConfig& cfg, const AmbientField& X, int level) {
  std::vector<double> parts;
  for (const Piece& p : cfg.pieces) {
    parts.push_back(piece_integral(p, level, [&](const Vec3& x, const Vec3&) { return X.value(x).norm(); }));
  }
  return pairwise_sum(parts);
}

template <class F>
void for_each_node(const PieceConfig& cfg, int level, F&& f) {
  for (const Piece& p : cfg.pieces) {
    if (p.role != PieceRole::sheet) continue;
    QuadratureGrid grid = piece_grid(p, level);
    for (const Vec2& q : grid.nodes) f(p, eval_geometry(p.patch, q));
  }
}

std::map<int, double> claimed_lambda(const Scenario& s, const RunOptions& opt) {
  std::map<int, double> lambda = s.lambda;
  if (opt.lambda_override) {
    for (auto& [c, l] : lambda) l = *opt.lambda_override;
  }
  return lambda;
}

void require_level(int level) {
  if (level < 1) throw ResolutionError("resolution level must be at least 1, got " + std::to_string(level));
}

// ----- individual checks -----

std::vector<CheckRecord> check_closed_form(const Scenario& s, const RunOptions& opt) {
  std::vector<CheckRecord> out;
  const int level = opt.geometry_resolution;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  auto add = [&](const std::string& id, double measured, double exact) {
    CheckRecord r = make_record("closed_form." + id, rel(measured, exact), 0.0, opt.tol.geometry, Relation::at_most);
    r.metadata["value"] = num(measured);
    r.metadata["exact"] = num(exact);
    r.metadata["level"] = std::to_string(level);
    out.push_back(r);
  };
  if (s.closed_form.count("area")) add("area", perimeter(s.config, level), s.closed_form.at("area"));
  if (s.closed_form.count("volume")) add("volume", total(component_volumes(s.config, level)), s.closed_form.at("volume"));
  double worst_H = 0.0, worst_A = 0.0;
  bool want_H = s.closed_form.count("H"), want_A = s.closed_form.count("A2");
  for_each_node(s.config, level, [&](const Piece&, const PointGeom& g) {
    if (want_H) worst_H = std::max(worst_H, rel(std::abs(g.H), s.closed_form.at("H")));
    if (want_A) worst_A = std::max(worst_A, rel(g.A_norm2, s.closed_form.at("A2")));
  });
  if (want_H) {
    CheckRecord r = make_record("closed_form.H", worst_H, 0.0, opt.tol.geometry, Relation::at_most);
    r.metadata["exact"] = num(s.closed_form.at("H"));
    r.metadata["level"] = std::to_string(level);
    out.push_back(r);
  }
  if (want_A) {
    CheckRecord r = make_record("closed_form.A2", worst_A, 0.0, opt.tol.geometry, Relation::at_most);
    r.metadata["exact"] = num(s.closed_form.at("A2"));
    r.metadata["level"] = std::to_string(level);
    out.push_back(r);
  }
  return out;
}

std::vector<CheckRecord> check_stationarity(const Scenario& s, const RunOptions& opt) {
  std::vector<CheckRecord> out;
  const int level = opt.resolution;
  std::vector<AmbientField> fields = seeded_fields(s, opt.seed, opt.stationarity_fields);
  MultiplierEstimate est = lagrange_multiplier(s.config, s.potential, fields, level);
  std::map<int, double> lambda = claimed_lambda(s, opt);
  for (const auto& [c, l] : est.lambda) {
    std::string tag = ".c" + std::to_string(c);
    CheckRecord r = make_record("stationarity.lambda" + tag, l, lambda.at(c), opt.tol.lambda, Relation::approx);
    r.metadata["fields"] = std::to_string(est.ratios.at(c).size());
    r.metadata["skipped"] = std::to_string(est.skipped.at(c));
    r.metadata["level"] = std::to_string(level);
    out.push_back(r);
    out.push_back(make_record("stationarity.ratio_spread" + tag, est.residual.at(c), 0.0, opt.tol.lambda,
                              Relation::at_most));
  }
  bool shared = true;
  for (const auto& [c, l] : lambda) shared = shared && l == lambda.begin()->second;
  if (est.lambda.size() > 1 && shared) {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& [c, l] : est.lambda) {
      lo = std::min(lo, l);
      hi = std::max(hi, l);
    }
    out.push_back(make_record("stationarity.lambda_consistency", hi - lo, 0.0, opt.tol.lambda, Relation::at_most));
  }
  double worst = 0.0, area = 0.0;
  for (const auto& [c, a] : est.area) area += a;
  for (const FieldRates& f : est.rates) {
    double scale = 0.0, residual = 0.0;
    for (const auto& [c, m] : f.magnitude) {
      scale += m;
      residual += f.energy.at(c) - lambda.at(c) * f.volume.at(c);
    }
    if (!(scale > kGrazing * area)) continue;
    worst = std::max(worst, std::abs(residual) / scale);
  }
  CheckRecord r = make_record("stationarity.residual", worst, 0.0, opt.tol.stationarity, Relation::at_most);
  r.metadata["normalisation"] = "integral of |X| over the pieces";
  r.metadata["fields"] = std::to_string(fields.size());
  r.metadata["seed"] = std::to_string(opt.seed);
  out.push_back(r);
  return out;
}

std::vector<CheckRecord> check_stability(const Scenario& s, const RunOptions& opt) {
  const int level = opt.resolution;
  std::vector<AmbientField> fields = seeded_fields(s, opt.seed + 1000, opt.stability_samples);
  const std::size_t n = fields.size();
  std::vector<int> comps;
  for (const auto& [c, Y] : s.corrections) {
    comps.push_back(c);
    fields.push_back(Y);
  }
  MultiplierEstimate rates = lagrange_multiplier(s.config, s.potential, fields, level);
  for (std::size_t j = 0; j < comps.size(); ++j) {
    for (const auto& [k, v] : rates.rates[n + j].volume) {
      if (k != comps[j] && std::abs(v) > 1e-12) {
        throw DomainError("scenario '" + s.name + "': correction of component " + std::to_string(comps[j]) +
                          " also moves component " + std::to_string(k));
      }
    }
  }
  JacobiGram gram = jacobi_gram(s.config, s.potential, fields, level);
  // V = X - sum_c (dV_c(X) / dV_c(Y_c)) Y_c keeps every volume fixed to first order
  double worst = INFINITY, worst_q = 0.0;
  int used = 0;
  for (std::size_t k = 0; k < n; ++k) {
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fields.size()));
    coef(static_cast<Eigen::Index>(k)) = 1.0;
    for (std::size_t j = 0; j < comps.size(); ++j) {
      int c = comps[j];
      coef(static_cast<Eigen::Index>(n + j)) = -rates.rates[k].volume.at(c) / rates.rates[n + j].volume.at(c);
    }
    double q = coef.dot(gram.jacobi * coef);
    double scale = coef.dot(gram.l2 * coef);
    if (!(scale > 0.0)) continue;
    ++used;
    if (q / scale < worst) {
      worst = q / scale;
      worst_q = q;
    }
  }
  std::vector<CheckRecord> out;
  CheckRecord r = make_record("stability.min_ratio", used ? worst : 0.0, 0.0, opt.tol.stability, Relation::at_least);
  r.metadata["normalisation"] = "quadratic form over integral of zeta^2";
  r.metadata["samples"] = std::to_string(used);
  r.metadata["worst_quadratic_form"] = num(worst_q);
  r.metadata["seed"] = std::to_string(opt.seed + 1000);
  r.metadata["level"] = std::to_string(level);
  r.metadata["sampling"] = "seeded ambient fields made volume-neutral per component; a surrogate for all deformations";
  out.push_back(r);
  out.push_back(make_record("stability.samples", used, opt.stability_samples, 0.0, Relation::at_least));
  return out;
}

AmbientField first_touching_field(const Scenario& s, std::uint64_t seed, int level) {
  std::vector<AmbientField> fields = seeded_fields(s, seed, 16);
  const double area = perimeter(s.config, level);
  for (const AmbientField& X : fields) {
    if (field_magnitude(s.config, X, level) > kSubstantial * area) return X;
  }
  throw DomainError("scenario '" + s.name + "': no seeded field touches the surface");
}

std::vector<CheckRecord> check_fd_oracle(const Scenario& s, const RunOptions& opt) {
  const int level = opt.path_resolution;
  AmbientField X = first_touching_field(s, opt.seed + 2000, level);
  auto energy = [&](double t) {
    PieceConfig cfg = t == 0.0 ? s.config : flow_ambient(s.config, X, t);
    return free_energy(cfg, s.potential, level, false).total;
  };
  std::vector<Sample> samples{{0.0, energy(0.0)}};
  for (double h : opt.t_stencil) {
    samples.push_back({h, energy(h)});
    samples.push_back({-h, energy(-h)});
  }
  FdEstimate d1 = fd_derivative(samples, 1, Sided::two);
  FdEstimate d2 = fd_derivative(samples, 2, Sided::two);
  double a1 = first_variation_ambient(s.config, s.potential, X, level);
  double a2 = second_variation_general(s.config, s.potential, X, PathKind::flow, level);
  std::vector<CheckRecord> out;
  auto add = [&](const std::string& id, const FdEstimate& d, double analytic) {
    CheckRecord r = make_record("fd_oracle." + id, d.value, analytic, opt.tol.fd_relative * std::abs(analytic),
                                Relation::approx);
    r.metadata["field"] = X.label();
    r.metadata["fd_error"] = num(d.error);
    r.metadata["level"] = std::to_string(level);
    out.push_back(r);
    CheckRecord o = make_record("fd_oracle." + id + "_order", d.observed_order, opt.tol.fd_order, 0.0,
                                Relation::at_least);
    out.push_back(o);
    for (std::size_t i = 0; i < d.raw.size(); ++i) {
      CheckRecord raw = make_record("fd_oracle." + id + "_raw", d.raw[i], analytic, 0.0, Relation::info);
      raw.param = "t_step";
      raw.value = d.steps[i];
      out.push_back(raw);
    }
  };
  add("first", d1, a1);
  add("second", d2, a2);
  return out;
}

std::vector<CheckRecord> check_volume_path(const Scenario& s, const RunOptions& opt) {
  const int level = opt.path_resolution;
  AmbientField X = first_touching_field(s, opt.seed + 3000, level);
  auto path = make_volume_preserving(s.config, X, s.corrections, level, 0.1);
  double worst = 0.0;
  for (double t : {0.01, 0.02, -0.02}) {
    for (const auto& [c, d] : path->volume_drift(t)) worst = std::max(worst, d);
  }
  std::vector<CheckRecord> out;
  CheckRecord r = make_record("volume_path.drift", worst / path->volume_scale(), 0.0, opt.tol.volume_drift,
                              Relation::at_most);
  r.metadata["path"] = path->descriptor();
  r.metadata["volume_scale"] = num(path->volume_scale());
  out.push_back(r);

  // on a stationary, stable configuration the energy is flat to first order and convex to second
  const double scale = perimeter(s.config, level);
  std::vector<Sample> samples{{0.0, free_energy(s.config, s.potential, level, false).total}};
  for (double h : opt.t_stencil) samples.push_back({h, free_energy(path->config_at(h), s.potential, level, false).total});
  FdEstimate d1 = fd_derivative(samples, 1, Sided::one);
  FdEstimate d2 = fd_derivative(samples, 2, Sided::one);
  CheckRecord f1 = make_record("volume_path.first_derivative", std::abs(d1.value) / scale, 0.0,
                               opt.tol.first_variation, Relation::at_most);
  f1.metadata["normalisation"] = "area of the sheets";
  f1.metadata["fd_error"] = num(d1.error);
  out.push_back(f1);
  CheckRecord f2 = make_record("volume_path.second_derivative", d2.value / scale, 0.0, opt.tol.stability,
                               Relation::at_least);
  f2.metadata["fd_error"] = num(d2.error);
  out.push_back(f2);
  for (std::size_t i = 0; i < d1.raw.size(); ++i) {
    CheckRecord raw = make_record("volume_path.first_derivative_raw", d1.raw[i], 0.0, 0.0, Relation::info);
    raw.param = "t_step";
    raw.value = d1.steps[i];
    out.push_back(raw);
  }
  return out;
}

std::vector<CheckRecord> check_breakup(const Scenario& s, const RunOptions& opt) {
  const int level = opt.path_resolution;
  auto path = wedge_breakup_path(s.config, s.potential, s.wedges, level);
  WedgeFirstVariation fv = path->first_variation(opt.t_stencil);
  std::vector<CheckRecord> out;
  CheckRecord r = make_record("breakup.first_variation", fv.analytic, 0.0, 0.0, Relation::below);
  r.metadata["kind"] = to_string(path->kind());
  r.metadata["path"] = path->descriptor();
  out.push_back(r);
  out.push_back(make_record("breakup.boundary_term", fv.analytic, fv.boundary, 1e-6 * std::abs(fv.boundary),
                            Relation::approx));
  out.push_back(make_record("breakup.curvature_part", fv.curvature, fv.boundary, 1e-6 * std::abs(fv.boundary),
                            Relation::info));
  CheckRecord f = make_record("breakup.fd_finest", fv.fd_finest, fv.analytic, opt.tol.breakup_fd * std::abs(fv.analytic),
                              Relation::approx);
  f.param = "t_step";
  f.value = opt.t_stencil.back();
  out.push_back(f);
  CheckRecord e = make_record("breakup.fd_extrapolated", fv.fd, fv.analytic, 1e-3 * std::abs(fv.analytic),
                              Relation::approx);
  e.metadata["fd_error"] = num(fv.fd_error);
  out.push_back(e);
  for (std::size_t k = 0; k < fv.angles.size(); ++k) {
    std::string id = "breakup.wedge_angle." + s.wedges[k].name;
    if (s.wedge_angle) {
      out.push_back(make_record(id, fv.angles[k], *s.wedge_angle, 1e-9, Relation::approx));
    } else {
      out.push_back(make_record(id, fv.angles[k], kPi, 0.0, Relation::below));
    }
  }
  double drift = 0.0;
  for (double t : opt.t_stencil) {
    for (double d : path->volume_drift(t)) drift = std::max(drift, d);
  }
  out.push_back(make_record("breakup.volume_drift", drift / path->volume_scale(), 0.0, opt.tol.volume_drift,
                            Relation::at_most));
  return out;
}

std::vector<CheckRecord> check_coalescence(const Scenario& s, const RunOptions& opt) {
  if (!s.cusp) throw DomainError("scenario '" + s.name + "' has no cusp pair");
  if (opt.r0_fractions.empty()) throw DomainError("the R0 sweep is empty");
  const CuspPairConfig& cusp = *s.cusp;
  const double R = cusp.R;
  const int level = opt.resolution;
  std::vector<double> steps;
  for (double h : opt.t_stencil) steps.push_back(h * R);
  std::vector<CheckRecord> out;
  std::vector<double> rates, u2, totals;
  const double area_scale = perimeter(cusp_base_config(cusp), level);
  for (double f : opt.r0_fractions) {
    const double R0 = f * R;
    CoalescencePath path(cusp, CutoffChi(R0), s.potential, level);
    auto tagged = [&](CheckRecord r) {
      r.param = "R0";
      r.value = R0;
      out.push_back(std::move(r));
    };
    double v1 = path.volume_rate(0.0);
    rates.push_back(std::abs(v1));
    tagged(make_record("coalescence.volume_rate", std::abs(v1), 0.0, 0.0, Relation::info));

    for (double tf : opt.boundary_times) {
      double t = tf * R;
      CoalescenceFirstVariation fv = path.first_variation(t);
      for (auto [name, b] : {std::pair<const char*, double>{"M", fv.boundary_M}, {"N", fv.boundary_N}}) {
        CheckRecord r = make_record(std::string("coalescence.boundary_") + name + "@t=" + num(t), b, -2.0 * kPi * t,
                                    opt.tol.boundary * 2.0 * kPi * t, Relation::approx);
        tagged(r);
      }
      tagged(make_record("coalescence.volume_drift@t=" + num(t),
                         std::abs(path.volume(t) - path.volume(0.0)) / path.volume_scale(), 0.0, opt.tol.volume_drift,
                         Relation::at_most));
    }
    CoalescenceFirstVariation fv0 = path.first_variation(0.0);
    // the first variation only vanishes at t = 0 on a stationary pair
    CheckRecord z = make_record("coalescence.first_variation_0", std::abs(fv0.total), 0.0,
                                opt.tol.first_variation * area_scale, cusp.lambda ? Relation::at_most : Relation::info);
    z.metadata["scale"] = num(area_scale);
    z.metadata["extrapolation_error"] = num(fv0.extrapolation_error);
    tagged(z);

    CoalescenceSecondVariation sv = path.second_variation(steps);
    tagged(make_record("coalescence.boundary_rate_M", sv.boundary_rate_M, -2.0 * kPi, opt.tol.boundary * 2.0 * kPi,
                       Relation::approx));
    tagged(make_record("coalescence.boundary_rate_N", sv.boundary_rate_N, -2.0 * kPi, opt.tol.boundary * 2.0 * kPi,
                       Relation::approx));
    CheckRecord u1 = make_record("coalescence.U1", sv.inner, 0.0, 0.0, Relation::info);
    u1.metadata["fd_error"] = num(sv.inner_error);
    tagged(u1);
    tagged(make_record("coalescence.U1_error", sv.inner_error, kPi / 4.0, 0.0, Relation::below));
    CheckRecord o = make_record("coalescence.U2", sv.outer, 0.0, 0.0, Relation::info);
    o.metadata["quadratic_form"] = num(sv.quadratic_form);
    o.metadata["volume_correction"] = num(sv.volume_correction);
    o.metadata["s_second"] = num(sv.s_second);
    o.metadata["s_second_fd"] = num(sv.s_second_fd);
    o.metadata["lambda"] = num(sv.lambda);
    tagged(o);
    CheckRecord tot = make_record("coalescence.total", sv.total, -4.0 * kPi, 0.0, Relation::info);
    tot.metadata["fd_total"] = num(sv.fd_total);
    tagged(tot);
    tagged(make_record("coalescence.total_vs_fd", sv.total, sv.fd_total, 1e-5 * std::abs(sv.fd_total),
                       Relation::approx));
    for (std::size_t i = 0; i < steps.size(); ++i) {
      CheckRecord raw = make_record("coalescence.energy@h=" + num(steps[i]), 0.0, 0.0, 0.0, Relation::info);
      raw.measured = path.energy(steps[i]);
      tagged(raw);
    }
    u2.push_back(std::abs(sv.outer));
    totals.push_back(sv.total);
  }
  auto max_ratio = [](const std::vector<double>& v) {
    double m = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) m = std::max(m, v[i] / v[i - 1]);
    return m;
  };
  double rise = -INFINITY;
  for (std::size_t i = 1; i < totals.size(); ++i) rise = std::max(rise, totals[i] - totals[i - 1]);
  double lowest = *std::min_element(totals.begin(), totals.end());
  if (totals.size() > 1) {
    out.push_back(make_record("coalescence.volume_rate_decreasing", max_ratio(rates), 1.0, 0.0, Relation::below));
    out.push_back(make_record("coalescence.U2_decreasing", max_ratio(u2), 1.0, 0.0, Relation::below));
    out.push_back(make_record("coalescence.total_strictly_decreasing", rise, 0.0, 0.0, Relation::below));
  }
  out.push_back(make_record("coalescence.total_above_minus_4pi", lowest, -4.0 * kPi, 0.0, Relation::at_least));
  CheckRecord last = make_record("coalescence.total_below_minus_3pi", totals.back(), -3.0 * kPi, 0.0, Relation::below);
  last.param = "R0";
  last.value = opt.r0_fractions.back() * R;
  out.push_back(last);
  return out;
}

std::vector<CheckRecord> check_mean_curvature(const Scenario& s, const RunOptions& opt) {
  if (!s.mean_curvature) return {};
  double worst = 0.0;
  for_each_node(s.config, kDefaultResolution, [&](const Piece&, const PointGeom& g) {
    worst = std::max(worst, std::abs(std::abs(g.H) - *s.mean_curvature));
  });
  return {make_record("mean_curvature.max_deviation", worst, 0.0, opt.tol.mean_curvature, Relation::at_most)};
}

std::vector<CheckRecord> check_curvature_supremum(const Scenario& s, const RunOptions&) {
  if (!s.curvature_window) return {};
  CheckRecord r = make_record("curvature.supremum", curvature_supremum(s.config, *s.curvature_window), 0.0, 0.0,
                              Relation::info);
  r.metadata["window"] = s.curvature_window->describe();
  return {r};
}

std::vector<CheckRecord> check_negative_control(const Scenario& s, const RunOptions& opt) {
  const int level = opt.resolution;
  if (s.config.components().size() != 2 || s.corrections.size() != 2) {
    throw DomainError("scenario '" + s.name + "': the joint-constraint control needs two components");
  }
  // whole-component dilations, combined so that only the total volume is preserved
  std::vector<AmbientField> dil;
  double gap = INFINITY;
  std::vector<std::pair<Vec3, double>> balls;
  for (const Piece& p : s.config.pieces) {
    ChartJet n = p.patch.jet1(Vec2(0.0, 0.0)), sp = p.patch.jet1(Vec2(kPi, 0.0));
    Vec3 c = 0.5 * (n.x + sp.x);
    balls.push_back({c, 0.5 * (n.x - sp.x).norm()});
  }
  gap = (balls[0].first - balls[1].first).norm() - balls[0].second - balls[1].second;
  for (const auto& [c, r] : balls) dil.push_back(dilation_field(c, r + 0.3 * gap, r + 0.8 * gap));
  double v0 = total(first_variation_volume(s.config, dil[0], level));
  double v1 = total(first_variation_volume(s.config, dil[1], level));
  AmbientField transfer = linear_combination({{1.0, dil[0]}, {-v0 / v1, dil[1]}});
  double dE = first_variation_ambient(s.config, s.potential, transfer, level);
  double joint = total(first_variation_volume(s.config, transfer, level));
  double descent = -std::abs(dE);
  bool unequal = std::abs(balls[0].second - balls[1].second) > 1e-12;
  std::vector<CheckRecord> out;
  CheckRecord r = unequal ? make_record("negative_control.joint_constraint_descent", descent, 0.0, 0.0, Relation::below)
                          : make_record("negative_control.joint_constraint_descent", descent, 0.0, 1e-8, Relation::approx);
  double exact = -std::abs(8.0 * kPi * balls[0].second * (1.0 - balls[0].second / balls[1].second));
  r.metadata["exact"] = num(exact);
  r.metadata["deformation"] = "mass transfer: dilate one drop and shrink the other at equal total volume";
  out.push_back(r);
  out.push_back(make_record("negative_control.joint_volume_rate", std::abs(joint), 0.0, 1e-10 * std::abs(v0),
                            Relation::at_most));
  out.push_back(make_record("negative_control.exact_rate", descent, exact, 1e-8 * std::max(1.0, std::abs(exact)),
                            Relation::approx));
  return out;
}

std::string check_context(const Scenario& s, CheckKind k) {
  return "scenario '" + s.name + "', check " + to_string(k) + ": ";
}

}  // namespace

std::string to_string(CheckKind k) {
  switch (k) {
    case CheckKind::closed_form:
      return "closed_form";
    case CheckKind::stationarity:
      return "stationarity";
    case CheckKind::stability:
      return "stability";
    case CheckKind::fd_oracle:
      return "fd_oracle";
    case CheckKind::volume_path:
      return "volume_path";
    case CheckKind::breakup_first_variation:
      return "breakup_first_variation";
    case CheckKind::coalescence_second_variation:
      return "coalescence_second_variation";
    case CheckKind::mean_curvature_constancy:
      return "mean_curvature_constancy";
    case CheckKind::curvature_supremum:
      return "curvature_supremum";
    case CheckKind::negative_control:
      return "negative_control";
  }
  return "unknown";
}

std::string to_string(Relation r) {
  switch (r) {
    case Relation::approx:
      return "approx";
    case Relation::at_most:
      return "at_most";
    case Relation::at_least:
      return "at_least";
    case Relation::below:
      return "below";
    case Relation::info:
      return "info";
  }
  return "unknown";
}

bool satisfies(Relation r, double measured, double expected, double tolerance) {
  if (r == Relation::info) return true;
  if (!std::isfinite(measured)) return false;
  switch (r) {
    case Relation::approx:
      return std::abs(measured - expected) <= tolerance;
    case Relation::at_most:
      return measured <= expected + tolerance;
    case Relation::at_least:
      return measured >= expected - tolerance;
    case Relation::below:
      return measured < expected;
    case Relation::info:
      break;
  }
  return true;
}

CheckRecord make_record(std::string check_id, double measured, double expected, double tolerance, Relation relation) {
  CheckRecord r;
  r.check_id = std::move(check_id);
  r.measured = measured;
  r.expected = expected;
  r.tolerance = tolerance;
  r.relation = relation;
  r.pass = satisfies(relation, measured, expected, tolerance);
  return r;
}

// ----- scenarios -----

Scenario scenario_sphere(double r) {
  if (!(r > 0.0)) throw DomainError("sphere radius must be positive");
  Scenario s;
  s.name = "sphere";
  s.params = {{"r", r}};
  s.config.pieces.push_back(sheet("sphere", make_sphere(Vec3::Zero(), r, true), 1));
  s.config.window = Window::box(Vec3::Constant(-2.0 * r), Vec3::Constant(2.0 * r));
  s.lambda = {{1, 2.0 / r}};
  s.sampling.push_back(SamplingRegion{Vec3::Constant(-r), Vec3::Constant(r), 0.6 * r, 0.9 * r, 1});
  s.corrections.emplace(1, bump_field(Vec3(0.0, 0.0, -r), 0.5 * r, -Vec3::UnitZ(), Mat3::Zero()));
  s.closed_form = {{"area", 4.0 * kPi * r * r}, {"volume", 4.0 * kPi * r * r * r / 3.0}, {"H", 2.0 / r},
                   {"A2", 2.0 / (r * r)}};
  s.checks = {CheckKind::closed_form, CheckKind::stationarity, CheckKind::stability, CheckKind::fd_oracle,
              CheckKind::volume_path};
  return s;
}

Scenario scenario_cylinder(double a, double L) {
  if (!(a > 0.0) || !(L > 2.5 * a)) throw DomainError("cylinder needs a > 0 and L > 2.5 a");
  Scenario s;
  s.name = "cylinder";
  s.params = {{"a", a}, {"L", L}};
  s.config.pieces.push_back(sheet("cylinder", make_cylinder(a, -L / 2.0, L / 2.0, Frame{}, true), 1));
  s.config.pieces.push_back(cap("bottom", make_graph_disk(constant_height(-L / 2.0), 0.0, a, -1), 1));
  s.config.pieces.push_back(cap("top", make_graph_disk(constant_height(L / 2.0), 0.0, a, 1), 1));
  s.config.window = Window::cylinder(Vec3::Zero(), Vec3::UnitZ(), 2.0 * a, L / 2.0);
  s.config.volume_method = VolumeMethod::vertical;
  s.lambda = {{1, 1.0 / a}};
  double zc = L / 2.0 - 1.2 * a;
  s.sampling.push_back(SamplingRegion{Vec3(-0.7 * a, -0.7 * a, -zc), Vec3(0.7 * a, 0.7 * a, zc), 0.6 * a, 0.9 * a, 1});
  s.corrections.emplace(1, bump_field(Vec3(a, 0.0, 0.0), 0.5 * a, Vec3::UnitX(), Mat3::Zero()));
  s.closed_form = {{"area", 2.0 * kPi * a * L}, {"volume", kPi * a * a * L}, {"H", 1.0 / a}, {"A2", 1.0 / (a * a)}};
  s.checks = {CheckKind::closed_form, CheckKind::stationarity, CheckKind::fd_oracle, CheckKind::volume_path};
  return s;
}

Scenario scenario_touching_half_cylinders(double a, double L) {
  if (!(a > 0.0) || !(L > 2.0 * a)) throw DomainError("half cylinders need a > 0 and L > 2a");
  Scenario s;
  s.name = "touching_half_cylinders";
  s.params = {{"a", a}, {"L", L}};
  const double b = 0.95 * a, h = 1.2 * a, rp = 0.5 * a;
  HeightFunction u = cylinder_cap_height(a, -1), v = cylinder_cap_height(a, 1);
  std::vector<double> xb{-rp, rp};
  PieceConfig& cfg = s.config;
  cfg.pieces.push_back(sheet("lower_minus", make_graph_rect(u, -L / 2, L / 2, -b, 0.0, 1, xb), 1));
  cfg.pieces.push_back(sheet("lower_plus", make_graph_rect(u, -L / 2, L / 2, 0.0, b, 1, xb), 1));
  cfg.pieces.push_back(sheet("upper_minus", make_graph_rect(v, -L / 2, L / 2, -b, 0.0, -1, xb), 2));
  cfg.pieces.push_back(sheet("upper_plus", make_graph_rect(v, -L / 2, L / 2, 0.0, b, -1, xb), 2));
  cfg.pieces.push_back(cap("bottom", make_graph_rect(constant_height(-h), -L / 2, L / 2, -b, b, -1), 1));
  cfg.pieces.push_back(cap("top", make_graph_rect(constant_height(h), -L / 2, L / 2, -b, b, 1), 2));
  cfg.window = Window::box(Vec3(-L / 2, -b, -h), Vec3(L / 2, b, h));
  cfg.volume_method = VolumeMethod::vertical;
  cfg.side_convention = "liquid inside both cylinders; normals point out of the liquid";
  s.lambda = {{1, 1.0 / a}, {2, 1.0 / a}};
  double xc = L / 2 - 0.8 * a;
  s.sampling.push_back(
      SamplingRegion{Vec3(-xc, -0.2 * a, -0.3 * a), Vec3(xc, 0.2 * a, 0.3 * a), 0.6 * a, 0.7 * a, 1});
  double zy = u(Vec2(0.0, -0.6 * a)).value;
  for (int comp : {1, 2}) {
    // a row of bumps along the line, clear of the other cylinder
    std::vector<std::pair<double, AmbientField>> row;
    int sgn = comp == 1 ? 1 : -1;
    for (int k = -3; k <= 3; ++k) {
      Vec3 c(k * 0.25 * (L - 2.0 * a), -sgn * 0.6 * a, sgn * zy);
      row.push_back({1.0, bump_field(c, 0.3 * a, -sgn * Vec3::UnitZ(), Mat3::Zero())});
    }
    s.corrections.emplace(comp, linear_combination(row));
  }

  // vapour cusps on either side of the contact line, pushed away from it
  for (int side : {-1, 1}) {
    Wedge w;
    w.name = side < 0 ? "gap_minus" : "gap_plus";
    w.pieces = side < 0 ? std::vector<std::size_t>{0, 2} : std::vector<std::size_t>{1, 3};
    w.sign = {-1, -1};
    Vec3 into = side * Vec3::UnitY();
    for (const char* sheet_name : {"lower", "upper"}) {
      w.junction.push_back(segment_curve(Vec3(-L / 2, 0.0, 0.0), Vec3(L / 2, 0.0, 0.0), into,
                                         ConormalDirection::into_sheet, 1, std::string(sheet_name) + " edge"));
    }
    w.push = bump_field(Vec3::Zero(), rp, into, Mat3::Zero());
    w.correction = bump_field(Vec3(a, side * 0.6 * a, zy), 0.2 * a, Vec3::UnitZ(), Mat3::Zero());
    w.liquid = false;
    s.wedges.push_back(w);
  }
  s.wedge_angle = 0.0;
  s.checks = {CheckKind::stationarity, CheckKind::stability, CheckKind::breakup_first_variation, CheckKind::fd_oracle,
              CheckKind::volume_path};
  return s;
}

Scenario scenario_touching_caps(double cap_radius, double R) {
  Scenario s;
  s.name = "touching_caps";
  s.params = {{"cap_radius", cap_radius}, {"R", R}};
  CuspPairConfig cusp = CuspPairConfig::spherical_caps(cap_radius, R);
  s.config = cusp_base_config(cusp);
  for (Piece& p : s.config.pieces) {
    // the sampled fields are small compared with B_3R
    ParamDomain dom = p.patch.domain();
    dom.u.base_panels *= 2;
    dom.v.base_panels *= 2;
    p.patch = p.patch.with_domain(dom);
  }
  s.cusp = cusp;
  s.lambda = {{1, 2.0 / cap_radius}, {2, 2.0 / cap_radius}};
  s.sampling.push_back(
      SamplingRegion{Vec3(-1.5 * R, -1.5 * R, -0.3 * R), Vec3(1.5 * R, 1.5 * R, 0.3 * R), 0.5 * R, 0.6 * R, 1});
  double z = cusp.lower(Vec2(2.0 * R, 0.0)).value;
  s.corrections.emplace(1, bump_field(Vec3(2.0 * R, 0.0, z), 0.3 * R, -Vec3::UnitZ(), Mat3::Zero()));
  s.corrections.emplace(2, bump_field(Vec3(-2.0 * R, 0.0, -z), 0.3 * R, Vec3::UnitZ(), Mat3::Zero()));
  s.checks = {CheckKind::stationarity, CheckKind::stability, CheckKind::coalescence_second_variation,
              CheckKind::fd_oracle};
  return s;
}

Scenario scenario_touching_paraboloids(double alpha, double R) {
  Scenario s;
  s.name = "touching_paraboloids";
  s.params = {{"alpha", alpha}, {"R", R}};
  CuspPairConfig cusp = CuspPairConfig::paraboloids(alpha, R, SideConvention::liquid_outside);
  s.config = cusp_base_config(cusp);
  s.cusp = cusp;
  s.checks = {CheckKind::coalescence_second_variation};
  return s;
}

Scenario scenario_triple_wedge(double a, double L) {
  if (!(a > 0.0) || !(L > 2.0 * a)) throw DomainError("triple wedge needs a > 0 and L > 2a");
  Scenario s;
  s.name = "triple_wedge";
  s.params = {{"a", a}, {"L", L}};
  const double w = 0.8 * a, rp = 0.3 * a;
  PieceConfig& cfg = s.config;
  cfg.window = Window::box(Vec3(-L / 2, -w, -w), Vec3(L / 2, w, w));
  cfg.volume_method = VolumeMethod::vertical;
  cfg.side_convention = "liquid in the three lenses; normals point out of the liquid";

  auto outside = [w](const Vec3& p) { return std::max(std::abs(p.y()), std::abs(p.z())) - w; };
  // first parameter past phi0 (moving in direction dir) where the circle leaves the window
  auto exit_angle = [&](double psi, double phi0, int dir) {
    Vec3 c = a * yz(psi);
    auto f = [&](double phi) { return outside(c + a * yz(phi)); };
    double lo = phi0 + dir * 1e-6, hi = lo;
    while (f(hi) < 0.0) hi += dir * 1e-3;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };

  const double centres[3] = {deg(90.0), deg(210.0), deg(330.0)};
  const double bisectors[3] = {deg(30.0), deg(150.0), deg(270.0)};
  const char* names[3] = {"lens_30", "lens_150", "lens_270"};
  std::vector<double> xb{-rp, rp};
  for (int k = 0; k < 3; ++k) {
    const double beta = bisectors[k];
    const int comp = k + 1;
    Wedge wedge;
    wedge.name = names[k];
    wedge.liquid = true;
    std::vector<double> exit_y;
    for (double delta : {beta - deg(30.0), beta + deg(30.0)}) {
      // the arc leaving O in direction delta lies on the circle centred at delta + 90 (phi increasing)
      // or delta - 90 (phi decreasing)
      double psi = 0.0;
      int dir = 0;
      for (double c : centres) {
        if (std::abs(std::remainder(c - (delta + deg(90.0)), 2.0 * kPi)) < 1e-9) {
          psi = c;
          dir = 1;
        } else if (std::abs(std::remainder(c - (delta - deg(90.0)), 2.0 * kPi)) < 1e-9) {
          psi = c;
          dir = -1;
        }
      }
      const double phi0 = psi + kPi;
      const double phi1 = exit_angle(psi, phi0, dir);
      Vec3 centre = a * yz(psi);
      std::vector<double> vb{phi0 + dir * rp / a};
      ParamDomain dom;
      dom.u.lo = -L / 2;
      dom.u.hi = L / 2;
      dom.u.breaks = xb;
      dom.u.base_panels = 8;  // the test fields are narrow compared with the length of the line
      dom.v.lo = std::min(phi0, phi1);
      dom.v.hi = std::max(phi0, phi1);
      dom.v.breaks = vb;
      SurfacePatch patch(PatchKind::cylinder, dom, std::make_shared<ArcCylinderChart>(centre.y(), centre.z(), a), -1);
      std::string pname = std::string(names[k]) + (delta < beta ? "_right" : "_left");
      wedge.pieces.push_back(cfg.pieces.size());
      wedge.sign.push_back(1);
      cfg.pieces.push_back(sheet(pname, patch, comp));
      wedge.junction.push_back(segment_curve(Vec3(-L / 2, 0.0, 0.0), Vec3(L / 2, 0.0, 0.0), yz(delta),
                                             ConormalDirection::into_sheet, 1, pname + " edge"));
      Vec3 exit = centre + a * yz(phi1);
      if (std::abs(exit.z() + w) < 1e-9) exit_y.push_back(exit.y());
      if (delta < beta) {
        double phic = phi0 + dir * 0.6 * std::abs(phi1 - phi0);
        wedge.correction = bump_field(Vec3(0.0, 0.0, 0.0) + centre + a * yz(phic), 0.12 * a, yz(phic), Mat3::Zero());
      }
    }
    if (exit_y.size() == 2) {
      double y0 = std::min(exit_y[0], exit_y[1]), y1 = std::max(exit_y[0], exit_y[1]);
      Piece bottom = cap(std::string(names[k]) + "_cap", make_graph_rect(constant_height(-w), -L / 2, L / 2, y0, y1, -1),
                         comp);
      wedge.pieces.push_back(cfg.pieces.size());
      wedge.sign.push_back(1);
      cfg.pieces.push_back(bottom);
    }
    wedge.push = bump_field(Vec3::Zero(), rp, yz(beta), Mat3::Zero());
    s.corrections.emplace(comp, wedge.correction);
    s.lambda[comp] = 1.0 / a;
    Vec3 c = 0.42 * a * yz(beta);
    Vec3 jitter(L / 2 - 0.5 * a, 0.02 * a, 0.02 * a);
    s.sampling.push_back(SamplingRegion{c - jitter, c + jitter, 0.28 * a, 0.33 * a, comp});
    s.wedges.push_back(wedge);
  }
  s.wedge_angle = kPi / 3.0;
  s.checks = {CheckKind::stationarity, CheckKind::stability, CheckKind::breakup_first_variation,
              CheckKind::fd_oracle};
  return s;
}

Scenario scenario_two_balls(double r1, double r2, double separation) {
  if (!(r1 > 0.0) || !(r2 > 0.0) || !(separation > 0.0)) {
    throw DomainError("two balls need positive radii and separation");
  }
  Scenario s;
  s.name = "two_balls";
  s.params = {{"r1", r1}, {"r2", r2}, {"separation", separation}};
  Vec3 c1(-(r1 + separation / 2), 0.0, 0.0), c2(r2 + separation / 2, 0.0, 0.0);
  s.config.pieces.push_back(sheet("ball_1", make_sphere(c1, r1, true), 1));
  s.config.pieces.push_back(sheet("ball_2", make_sphere(c2, r2, true), 2));
  double m = 2.0 * std::max(r1, r2);
  s.config.window = Window::box(Vec3(c1.x() - 2.0 * r1, -m, -m), Vec3(c2.x() + 2.0 * r2, m, m));
  s.lambda = {{1, 2.0 / r1}, {2, 2.0 / r2}};
  int comp = 1;
  for (auto [c, r] : {std::pair<Vec3, double>{c1, r1}, {c2, r2}}) {
    s.sampling.push_back(SamplingRegion{c - Vec3::Constant(r), c + Vec3::Constant(r), 0.6 * r, 0.9 * r, comp});
    s.corrections.emplace(comp, bump_field(c + Vec3(0.0, 0.0, r), 0.5 * r, Vec3::UnitZ(), Mat3::Zero()));
    ++comp;
  }
  s.checks = {CheckKind::stationarity, CheckKind::stability, CheckKind::negative_control, CheckKind::fd_oracle,
              CheckKind::volume_path};
  return s;
}

Scenario scenario_delaunay_neck(double a, double H, double extent) {
  Scenario s;
  s.name = "delaunay_neck";
  s.params = {{"a", a}, {"H", H}, {"extent", extent}};
  if (!(H > 0.0) || !(a > 0.0) || a * H > 1.0 + 1e-12) throw DomainError("unduloid needs 0 < a <= 1/H");
  SurfacePatch patch = delaunay_unduloid(a, H, extent, true);
  const ParamDomain& dom = patch.domain();
  auto end_radius = [&](double u) {
    Vec3 x = patch.jet1(Vec2(u, 0.0)).x;
    return std::hypot(x.x(), x.y());
  };
  double r_lo = end_radius(dom.u.lo), r_hi = end_radius(dom.u.hi);
  s.config.pieces.push_back(sheet("unduloid", patch, 1));
  s.config.pieces.push_back(cap("bottom", make_graph_disk(constant_height(-extent / 2), 0.0, r_lo, -1), 1));
  s.config.pieces.push_back(cap("top", make_graph_disk(constant_height(extent / 2), 0.0, r_hi, 1), 1));
  const double bulge = 2.0 / H - a, scale = 1.0 / H;
  s.config.window = Window::cylinder(Vec3::Zero(), Vec3::UnitZ(), bulge + scale, extent / 2);
  s.config.volume_method = VolumeMethod::vertical;
  s.lambda = {{1, H}};
  s.mean_curvature = H;
  double zc = std::max(0.0, extent / 2 - 1.0 * scale);
  s.sampling.push_back(
      SamplingRegion{Vec3(-bulge, -bulge, -zc), Vec3(bulge, bulge, zc), 0.6 * scale, 0.9 * scale, 1});
  s.corrections.emplace(1, bump_field(Vec3(a, 0.0, 0.0), 0.8 * std::min(a, scale), Vec3::UnitX(), Mat3::Zero()));
  s.curvature_window = Window::cylinder(Vec3::Zero(), Vec3::UnitZ(), bulge + 0.5 * scale, 0.45 * extent);
  s.checks = {CheckKind::stationarity, CheckKind::mean_curvature_constancy, CheckKind::curvature_supremum,
              CheckKind::fd_oracle, CheckKind::volume_path};
  return s;
}

std::vector<ScenarioInfo> list_scenarios() {
  return {
      {"sphere", {{"r", 1.0}}, "round sphere; closed forms, multiplier 2/r"},
      {"cylinder", {{"a", 1.0}, {"L", 6.0}}, "finite cylinder with flat end caps; multiplier 1/a"},
      {"delaunay_neck", {{"a", 0.5}, {"H", 1.0}, {"extent", 4.0}}, "unduloid around its neck; multiplier H"},
      {"touching_half_cylinders", {{"a", 1.0}, {"L", 4.0}}, "two cylinders touching along a line"},
      {"touching_caps", {{"cap_radius", 6.0}, {"R", 1.0}}, "two balls touching at a point; coalescence sweep"},
      {"touching_paraboloids", {{"alpha", 1.0}, {"R", 1.0}}, "paraboloids -alpha r^2 and alpha r^2; coalescence only"},
      {"triple_wedge", {{"a", 1.0}, {"L", 4.0}}, "three lenses meeting along a line at angles pi/3"},
      {"two_balls", {{"r1", 1.0}, {"r2", 2.0}, {"separation", 1.0}}, "two separate drops"},
  };
}

Scenario make_scenario(const std::string& name, const std::map<std::string, double>& params) {
  for (const ScenarioInfo& info : list_scenarios()) {
    if (info.name != name) continue;
    std::map<std::string, double> p;
    for (const auto& [k, v] : info.defaults) p[k] = v;
    std::map<std::string, double> given = params;
    if (name == "touching_caps" && given.count("alpha")) {
      // alpha is the curvature of the osculating paraboloid u = -alpha r^2 of a cap of radius 1 / (2 alpha)
      if (given.count("cap_radius")) throw DomainError("touching_caps takes either alpha or cap_radius, not both");
      double alpha = given.at("alpha");
      if (!(alpha > 0.0)) throw DomainError("touching_caps needs alpha > 0");
      given.erase("alpha");
      given["cap_radius"] = 1.0 / (2.0 * alpha);
    }
    for (const auto& [k, v] : given) {
      if (!p.count(k)) throw DomainError("scenario '" + name + "' has no parameter '" + k + "'");
      p[k] = v;
    }
    if (name == "sphere") return scenario_sphere(p["r"]);
    if (name == "cylinder") return scenario_cylinder(p["a"], p["L"]);
    if (name == "delaunay_neck") return scenario_delaunay_neck(p["a"], p["H"], p["extent"]);
    if (name == "touching_half_cylinders") return scenario_touching_half_cylinders(p["a"], p["L"]);
    if (name == "touching_caps") return scenario_touching_caps(p["cap_radius"], p["R"]);
    if (name == "touching_paraboloids") return scenario_touching_paraboloids(p["alpha"], p["R"]);
    if (name == "triple_wedge") return scenario_triple_wedge(p["a"], p["L"]);
    if (name == "two_balls") return scenario_two_balls(p["r1"], p["r2"], p["separation"]);
  }
  throw DomainError("unknown scenario '" + name + "'");
}

double curvature_supremum(const PieceConfig& cfg, const Window& W, int level) {
  double best = 0.0;
  for_each_node(cfg, level, [&](const Piece&, const PointGeom& g) {
    if (W.depth(g.position) > 0.0) best = std::max(best, std::sqrt(g.A_norm2));
  });
  return best;
}

std::vector<AmbientField> seeded_fields(const Scenario& s, std::uint64_t seed, int count) {
  if (s.sampling.empty()) throw DomainError("scenario '" + s.name + "' declares no sampling regions");
  RandomFieldGenerator gen(seed);
  std::vector<AmbientField> out;
  for (int i = 0; i < count; ++i) out.push_back(gen.next(s.sampling[i % s.sampling.size()]));
  return out;
}

std::vector<CheckRecord> run_check(const Scenario& s, CheckKind kind, const RunOptions& opt) {
  require_level(opt.geometry_resolution);
  require_level(opt.resolution);
  require_level(opt.path_resolution);
  try {
    switch (kind) {
      case CheckKind::closed_form:
        return check_closed_form(s, opt);
      case CheckKind::stationarity:
        return check_stationarity(s, opt);
      case CheckKind::stability:
        return check_stability(s, opt);
      case CheckKind::fd_oracle:
        return check_fd_oracle(s, opt);
      case CheckKind::volume_path:
        return check_volume_path(s, opt);
      case CheckKind::breakup_first_variation:
        return check_breakup(s, opt);
      case CheckKind::coalescence_second_variation:
        return check_coalescence(s, opt);
      case CheckKind::mean_curvature_constancy:
        return check_mean_curvature(s, opt);
      case CheckKind::curvature_supremum:
        return check_curvature_supremum(s, opt);
      case CheckKind::negative_control:
        return check_negative_control(s, opt);
    }
  } catch (const ResolutionError& e) {
    throw ResolutionError(check_context(s, kind) + e.what());
  } catch (const SupportError& e) {
    throw SupportError(check_context(s, kind) + e.what());
  } catch (const SolverError& e) {
    throw SolverError(check_context(s, kind) + e.what());
  } catch (const DomainError& e) {
    throw DomainError(check_context(s, kind) + e.what());
  } catch (const Error& e) {
    throw Error(check_context(s, kind) + e.what());
  }
  return {};
}

std::vector<CheckRecord> run_checks(const Scenario& s, const RunOptions& opt) {
  std::vector<CheckRecord> out;
  for (CheckKind k : s.checks) {
    std::vector<CheckRecord> part = run_check(s, k, opt);
    for (CheckRecord& r : part) {
      r.metadata["scenario"] = s.name;
      r.metadata["check"] = to_string(k);
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::string to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::r0:
      return "R0";
    case SweepParameter::resolution:
      return "resolution";
    case SweepParameter::t_step:
      return "t_step";
  }
  return "?";
}

SweepParameter parse_sweep_parameter(const std::string& name) {
  if (name == "R0") return SweepParameter::r0;
  if (name == "resolution") return SweepParameter::resolution;
  if (name == "t-step" || name == "t_step") return SweepParameter::t_step;
  throw DomainError("unknown sweep parameter '" + name + "' (expected R0, resolution or t-step)");
}

namespace {

double sweep_metric(const std::vector<CheckRecord>& records, const std::string& id, double value) {
  for (const CheckRecord& r : records) {
    if (r.check_id == id && r.value == value) return r.measured;
  }
  throw Error("sweep lost the record " + id);
}

std::vector<CheckRecord> sweep_rates(const std::string& metric, SweepParameter p, const std::vector<double>& values,
                                     const std::vector<double>& measured) {
  auto h = [&](double v) { return p == SweepParameter::resolution ? std::exp2(-v) : v; };
  double size = 0.0;
  for (double m : measured) size = std::max(size, std::abs(m));
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * size;
  std::vector<CheckRecord> out;
  for (std::size_t k = 0; k + 2 < values.size(); ++k) {
    double d0 = std::abs(measured[k + 1] - measured[k]), d1 = std::abs(measured[k + 2] - measured[k + 1]);
    CheckRecord r = make_record("sweep." + metric + ".rate", NAN, 0.0, 0.0, Relation::info);
    r.param = to_string(p);
    r.value = values[k + 1];
    if (d1 <= floor) {
      r.metadata["status"] = "at roundoff";
    } else {
      r.measured = std::log(d0 / d1) / std::log(h(values[k]) / h(values[k + 1]));
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace

std::vector<CheckRecord> run_sweep(const Scenario& s, SweepParameter p, const std::vector<double>& values,
                                   const RunOptions& opt) {
  if (values.size() < 3) throw DomainError("a sweep needs at least 3 values, got " + std::to_string(values.size()));
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (p == SweepParameter::resolution ? !(values[k] > values[k - 1]) : !(values[k] < values[k - 1])) {
      throw DomainError(p == SweepParameter::resolution ? "resolution sweeps must increase"
                                                        : "R0 and t-step sweeps must decrease");
    }
  }
  for (double v : values) {
    if (!(v > 0.0)) throw DomainError("sweep values must be positive, got " + num(v));
  }
  std::vector<CheckRecord> out;
  std::map<std::string, std::vector<double>> table;
  std::vector<std::string> metrics;
  auto column = [&](const std::string& metric, double measured) {
    if (!table.count(metric)) metrics.push_back(metric);
    table[metric].push_back(measured);
  };
  auto row = [&](const std::string& metric, double value, double measured) {
    CheckRecord r = make_record("sweep." + metric, measured, 0.0, 0.0, Relation::info);
    r.param = to_string(p);
    r.value = value;
    out.push_back(r);
    column(metric, measured);
  };

  switch (p) {
    case SweepParameter::r0: {
      if (!s.cusp) throw DomainError("scenario '" + s.name + "' has no cusp pair to sweep R0 on");
      RunOptions o = opt;
      o.r0_fractions.clear();
      for (double v : values) o.r0_fractions.push_back(v / s.cusp->R);
      out = run_check(s, CheckKind::coalescence_second_variation, o);
      for (double f : o.r0_fractions) {
        double R0 = f * s.cusp->R;
        for (const char* m : {"volume_rate", "U1", "U2", "total"}) {
          column(m, sweep_metric(out, std::string("coalescence.") + m, R0));
        }
      }
      break;
    }
    case SweepParameter::resolution: {
      for (double v : values) {
        if (v != std::floor(v)) throw DomainError("resolution levels must be integers, got " + num(v));
        const int level = static_cast<int>(v);
        require_level(level);
        row("area", v, perimeter(s.config, level));
        row("volume", v, total(component_volumes(s.config, level)));
        if (!s.closed_form.empty()) {
          RunOptions o = opt;
          o.geometry_resolution = level;
          for (CheckRecord r : run_check(s, CheckKind::closed_form, o)) {
            r.param = to_string(p);
            r.value = v;
            out.push_back(r);
          }
        }
      }
      break;
    }
    case SweepParameter::t_step: {
      if (s.corrections.empty()) throw DomainError("scenario '" + s.name + "' has no volume-preserving path");
      const int level = opt.path_resolution;
      require_level(level);
      AmbientField X = first_touching_field(s, opt.seed + 3000, level);
      auto path = make_volume_preserving(s.config, X, s.corrections, level, 0.1);
      const double scale = perimeter(s.config, level);
      const double e0 = free_energy(s.config, s.potential, level, false).total;
      std::vector<double> quotient;
      for (double t : values) {
        double q = (free_energy(path->config_at(t), s.potential, level, false).total - e0) / t / scale;
        row("fd_first_variation", t, q);
        quotient.push_back(std::abs(q));
      }
      double worst = 0.0;
      for (std::size_t k = 1; k < quotient.size(); ++k) worst = std::max(worst, quotient[k] / quotient[k - 1]);
      CheckRecord d = make_record("sweep.fd_first_variation.decreasing", worst, 1.0, 0.0, Relation::below);
      d.metadata["normalisation"] = "area of the sheets";
      d.metadata["path"] = path->descriptor();
      out.push_back(d);
      break;
    }
  }
  for (const std::string& m : metrics) {
    for (CheckRecord& r : sweep_rates(m, p, values, table[m])) out.push_back(std::move(r));
  }
  for (CheckRecord& r : out) {
    r.metadata["scenario"] = s.name;
    r.metadata["sweep"] = to_string(p);
  }
  return out;
}

}  // namespace capillary
