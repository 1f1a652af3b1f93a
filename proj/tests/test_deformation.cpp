#include <cmath>
#include <random>

#include "capillary/deformation.hpp"
#include "capillary/error.hpp"
#include "doctest.h"

using namespace capillary;

namespace {

PieceConfig sphere_config() {
  PieceConfig cfg;
  cfg.pieces.push_back(Piece{"sphere", make_sphere(Vec3::Zero(), 1.0, true), 1, PieceRole::sheet});
  cfg.window = Window::box(Vec3::Constant(-2.0), Vec3::Constant(2.0));
  return cfg;
}

CuspPairConfig caps() { return CuspPairConfig::spherical_caps(6.0, 1.0); }

}  // namespace

TEST_CASE("cutoff profile bounds") {
  CutoffChi chi(0.1);
  for (int i = 0; i <= 400; ++i) {
    double r = 0.3 * i / 400.0;
    double v = chi.value(r);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(std::abs(chi.d1(r)) <= 2.0 / 0.1);
    if (r <= 0.1) CHECK(v == 1.0);
    if (r >= 0.2) CHECK(v == 0.0);
  }
  CHECK(chi.d1(0.15) == doctest::Approx(-CutoffChi::kMaxSlope / 0.1));
}

TEST_CASE("radial flow is a semigroup") {
  const double R0 = 1.0 / 6.0;
  RadialFlow flow{CutoffChi(R0)};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    double r = 0.01 + 0.4 * unit(rng), th = 2.0 * kPi * unit(rng);
    Vec3 x(r * std::cos(th), r * std::sin(th), unit(rng) - 0.5);
    double s = 0.1 * unit(rng), t = 0.1 * unit(rng);
    worst = std::max(worst, (flow.map(t, flow.map(s, x)) - flow.map(t + s, x)).norm());
  }
  CHECK(worst <= 1e-9);

  Vec3 far(0.3, 0.25, 0.1);
  CHECK((flow.map(0.05, far) - far).norm() == 0.0);
  RadialJet near = flow.radial(0.05, 0.1);
  CHECK(near.phi == doctest::Approx(0.15).epsilon(1e-15));
  CHECK(near.dphi == 1.0);
}

TEST_CASE("ambient flows") {
  PieceConfig cfg = sphere_config();
  PieceConfig same = flow_ambient(cfg, zero_field(), 0.1);
  CHECK(perimeter(same) == doctest::Approx(4.0 * kPi).epsilon(1e-12));

  PieceConfig grown = flow_ambient(cfg, dilation_field(Vec3::Zero(), 1.5, 1.9), 0.1);
  CHECK(perimeter(grown) == doctest::Approx(4.0 * kPi * std::exp(0.2)).epsilon(1e-6));

  AmbientField lift = translation_field(Vec3::UnitZ(), Vec3::Zero(), 1.3, 1.9);
  PieceConfig moved = flow_ambient(cfg, lift, 0.05);
  const SurfacePatch& p = moved.pieces[0].patch;
  Vec2 q(0.7, 1.1);
  CHECK((p.jet1(q).x - cfg.pieces[0].patch.jet1(q).x - 0.05 * Vec3::UnitZ()).norm() < 1e-10);

  AmbientField wide = dilation_field(Vec3::Zero(), 1.5, 2.5);
  CHECK_THROWS_AS(flow_ambient(cfg, wide, 0.1), SupportError);
}

TEST_CASE("linear displacement by the identity field") {
  PieceConfig cfg = sphere_config();
  Piece& p = cfg.pieces[0];
  AmbientField X = dilation_field(Vec3::Zero(), 1.5, 1.9);
  p.patch = p.patch.with_chart(std::make_shared<DisplacedChart>(
      p.patch.chart_ptr(), std::vector<std::pair<double, AmbientField>>{{0.1, X}}, p.patch.fd_step()));
  CHECK(perimeter(cfg) == doctest::Approx(4.0 * kPi * 1.21).epsilon(1e-10));
}

TEST_CASE("volume-preserving corrections") {
  PieceConfig cfg = sphere_config();
  std::map<int, AmbientField> Y{{1, bump_field(Vec3(0.0, 0.0, -1.0), 0.8, -Vec3::UnitZ(), Mat3::Zero())}};

  SUBCASE("translations need no correction") {
    auto path = make_volume_preserving(cfg, translation_field(Vec3(0.2, 0.1, 0.3), Vec3::Zero(), 1.3, 1.9), Y);
    CHECK(std::abs(path->s_prime_formula().at(1)) < 1e-12);
    for (double t : {0.02, 0.05}) CHECK(std::abs(path->s_at(t).at(1)) < 1e-9);
  }

  SUBCASE("formula for s'(0) matches the solved amplitudes") {
    AmbientField X = bump_field(Vec3(0.0, 0.0, 1.0), 0.8, Vec3::UnitZ(), Mat3::Zero());
    auto path = make_volume_preserving(cfg, X, Y, 4);
    std::vector<Sample> s{{0.0, 0.0}};
    for (double h : {0.01, 0.005, 0.0025}) s.push_back({h, path->s_at(h).at(1)});
    FdEstimate d = fd_derivative(s, 1, Sided::one);
    CHECK(d.value == doctest::Approx(path->s_prime_formula().at(1)).epsilon(1e-6));
    CHECK(path->s_prime_formula().at(1) < 0.0);
    for (double t : {0.01, 0.05}) CHECK(path->volume_drift(t).at(1) <= 1e-9 * path->volume_scale());
    CHECK(path->kind() == DeformationKind::ambient);
    CHECK_THROWS_AS(path->s_at(0.5), DomainError);
  }

  SUBCASE("volume-neutral fields give quadratic corrections") {
    Mat3 A = Mat3::Zero();
    A(0, 0) = 1.0;
    A(1, 1) = -1.0;
    AmbientField X = cutoff_affine_field(Vec3::Zero(), Vec3::Zero(), A, 1.5, 1.9, "shear");
    auto path = make_volume_preserving(cfg, X, Y, 4);
    CHECK(std::abs(path->s_prime_formula().at(1)) < 1e-12);
    double s1 = path->s_at(0.01).at(1), s2 = path->s_at(0.02).at(1);
    CHECK(std::abs(s1) > 0.0);
    CHECK(s2 / s1 == doctest::Approx(4.0).epsilon(0.02));
  }

  SUBCASE("corrections must move the volume") {
    std::map<int, AmbientField> none{{1, zero_field()}};
    CHECK_THROWS_AS(make_volume_preserving(cfg, zero_field(), none), IllPosedError);
  }
}

TEST_CASE("cusp pair geometry") {
  CuspPairConfig pair = CuspPairConfig::paraboloids(1.0, 1.0, SideConvention::liquid_outside);
  CoalescencePath path(pair, CutoffChi(1.0 / 6.0), Potential::zero(), 3);
  PieceConfig base = path.config_at(0.0);
  REQUIRE(base.pieces.size() == path.base().pieces.size());
  for (std::size_t i = 0; i < base.pieces.size(); ++i) {
    CHECK(base.pieces[i].name == path.base().pieces[i].name);
    CHECK(base.pieces[i].patch.chart_ptr() == path.base().pieces[i].patch.chart_ptr());
  }
  CHECK(path.kind() == DeformationKind::coalescence);

  double t = 0.05;
  PieceConfig inner = path.inner_config(t);
  for (double r : {0.01, 0.05, 0.1}) {
    Vec3 x = inner.pieces[0].patch.jet1(Vec2(r, 0.7)).x;
    double rho = std::hypot(x.x(), x.y());
    CHECK(rho == doctest::Approx(r + t).epsilon(1e-14));
    CHECK(x.z() == doctest::Approx(-(rho - t) * (rho - t)).epsilon(1e-12));
  }

  CHECK_THROWS_AS(CoalescencePath(pair, CutoffChi(0.2), Potential::zero(), 3), DomainError);
}

TEST_CASE("volume rate of the coalescence flow") {
  CuspPairConfig pair = CuspPairConfig::paraboloids(1.0, 1.0, SideConvention::liquid_outside);
  double previous = INFINITY;
  for (double R0 : {1.0 / 6.0, 1.0 / 12.0, 1.0 / 24.0}) {
    CoalescencePath path(pair, CutoffChi(R0), Potential::zero(), 3);
    double v = std::abs(path.volume_rate(0.0));
    CHECK(v < previous);
    previous = v;
  }

  CoalescencePath path(pair, CutoffChi(1.0 / 6.0), Potential::zero(), 3);
  std::vector<Sample> vol{{0.0, path.uncorrected_volume(0.0)}};
  for (double h : {0.004, 0.002, 0.001}) vol.push_back({h, path.uncorrected_volume(h)});
  FdEstimate d = fd_derivative(vol, 1, Sided::one);
  CHECK(d.value == doctest::Approx(path.volume_rate(0.0)).epsilon(1e-5));

  PieceConfig flat;
  flat.pieces.push_back(Piece{"flat", make_graph_disk(constant_height(0.0), 0.01, 1.0, 1), 1, PieceRole::sheet});
  AmbientField X = radial_field(CutoffChi(1.0 / 6.0));
  double flux = piece_integral(flat.pieces[0], 3, [&](const Vec3& x, const Vec3& nu) { return X.value(x).dot(nu); });
  CHECK(std::abs(flux) < 1e-15);
}

TEST_CASE("coalescence of touching caps: first variation") {
  CoalescencePath path(caps(), CutoffChi(1.0 / 6.0), Potential::zero(), 3);
  for (double t : {0.01, 0.02}) {
    CoalescenceFirstVariation fv = path.first_variation(t);
    CHECK(fv.boundary_M == doctest::Approx(-2.0 * kPi * t).epsilon(1e-8));
    CHECK(fv.boundary_N == doctest::Approx(-2.0 * kPi * t).epsilon(1e-8));
    CHECK(fv.curvature_M == doctest::Approx(fv.curvature_N).epsilon(1e-10));
    CHECK(fv.potential_M == 0.0);
  }
  CHECK(std::abs(path.volume(0.01) - path.volume(0.0)) <= 1e-9);
  CHECK(std::abs(path.volume(0.02) - path.volume(0.0)) <= 1e-9);

  CoalescenceFirstVariation at0 = path.first_variation(0.0);
  CHECK(at0.boundary_M == 0.0);
  CHECK(std::abs(at0.total) <= 1e-5 * path.volume_scale());

  const double t = 0.01, h = 1e-3;
  double fd = (path.energy(t + h) - path.energy(t - h)) / (2.0 * h);
  CHECK(path.first_variation(t).total == doctest::Approx(fd).epsilon(1e-4));
}

TEST_CASE("coalescence of touching caps: second variation") {
  CoalescencePath path(caps(), CutoffChi(1.0 / 6.0), Potential::zero(), 3);
  CoalescenceSecondVariation sv = path.second_variation({1e-2, 5e-3, 2.5e-3, 1.25e-3});
  CHECK(sv.boundary_rate_M == doctest::Approx(-2.0 * kPi).epsilon(1e-8));
  CHECK(sv.boundary_rate_N == doctest::Approx(-2.0 * kPi).epsilon(1e-8));
  CHECK(sv.total < -3.0 * kPi);
  CHECK(sv.total > -4.0 * kPi);
  CHECK(sv.inner_error < kPi / 4.0);
  CHECK(sv.total == doctest::Approx(sv.fd_total).epsilon(1e-6));
  CHECK(sv.inner_volume_second == doctest::Approx(sv.inner_volume_second_fd).epsilon(1e-3));
  CHECK(sv.outer_volume_second == doctest::Approx(-sv.inner_volume_second).epsilon(1e-9));
}

TEST_CASE("obtuse wedges are rejected") {
  PieceConfig cfg;
  cfg.pieces.push_back(Piece{"plane", make_graph_rect(constant_height(0.0), -1.0, 1.0, 0.0, 1.0, 1), 1,
                             PieceRole::sheet});
  cfg.window = Window::box(Vec3(-2.0, -2.0, -2.0), Vec3(2.0, 2.0, 2.0));
  Wedge w;
  w.name = "half space";
  w.pieces = {0};
  w.sign = {1};
  w.junction = {segment_curve(Vec3(-1.0, 0.0, 0.0), Vec3(1.0, 0.0, 0.0), Vec3::UnitY(),
                              ConormalDirection::into_sheet, 1)};
  w.push = bump_field(Vec3::Zero(), 0.5, Vec3::UnitY(), Mat3::Zero());
  w.correction = bump_field(Vec3(0.0, 0.7, 0.0), 0.2, Vec3::UnitZ(), Mat3::Zero());
  CHECK(wedge_angle(w) == doctest::Approx(kPi));
  CHECK_THROWS_AS(wedge_breakup_path(cfg, Potential::zero(), {w}), UnsupportedError);
}
