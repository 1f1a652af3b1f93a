#include <cmath>
#include <random>

#include "capillary/energy.hpp"
#include "capillary/error.hpp"
#include "doctest.h"

using namespace capillary;

namespace {

PieceConfig balls(std::vector<std::pair<Vec3, double>> placements) {
  PieceConfig cfg;
  int c = 1;
  for (auto [center, r] : placements) {
    cfg.pieces.push_back(Piece{"ball" + std::to_string(c), make_sphere(center, r, true), c, PieceRole::sheet});
    ++c;
  }
  cfg.window = Window::box(Vec3::Constant(-5.0), Vec3::Constant(5.0));
  return cfg;
}

PieceConfig cusp_between() {
  PieceConfig cfg;
  cfg.pieces.push_back(Piece{"lower", make_graph_disk(paraboloid_height(-1.0), 0.0, 1.0, -1), 1, PieceRole::sheet});
  cfg.pieces.push_back(Piece{"upper", make_graph_disk(paraboloid_height(1.0), 0.0, 1.0, 1), 1, PieceRole::sheet});
  cfg.window = Window::cylinder(Vec3::Zero(), Vec3::UnitZ(), 1.0, 2.0);
  cfg.volume_method = VolumeMethod::vertical;
  return cfg;
}

}  // namespace

TEST_CASE("potential evaluation") {
  auto [v0, g0] = potential_eval(Potential::zero(), Vec3(1.0, 2.0, 3.0));
  CHECK(v0 == 0.0);
  CHECK(g0.norm() == 0.0);
  auto [v1, g1] = potential_eval(Potential::linear_gravity(9.81, 1.0, 2), Vec3(0.0, 0.0, 2.0));
  CHECK(v1 == doctest::Approx(19.62));
  CHECK((g1 - Vec3(0.0, 0.0, 9.81)).norm() < 1e-14);
  auto [v2, g2] = potential_eval(Potential::polynomial({Monomial{1.0, 2, 0, 0}}), Vec3(3.0, 0.0, 0.0));
  CHECK(v2 == doctest::Approx(9.0));
  CHECK((g2 - Vec3(6.0, 0.0, 0.0)).norm() < 1e-14);
}

TEST_CASE("potential gradients match finite differences") {
  std::vector<Potential> pots{
      Potential::linear_gravity(2.0, 0.5, 0),
      Potential::polynomial({Monomial{1.5, 2, 1, 0}, Monomial{-0.5, 0, 0, 3}, Monomial{2.0, 1, 1, 1}}),
  };
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (const Potential& g : pots) {
    for (int n = 0; n < 20; ++n) {
      Vec3 x(u(rng), u(rng), u(rng));
      Vec3 grad = g.gradient(x);
      for (int i = 0; i < 3; ++i) {
        double h = 1e-5;
        Vec3 e = Vec3::Unit(i);
        double fd = (g.value(x + h * e) - g.value(x - h * e)) / (2.0 * h);
        CHECK(std::abs(fd - grad[i]) <= 1e-8 * std::max(1.0, std::abs(grad[i])));
      }
    }
  }
}

TEST_CASE("primitive integrates the potential vertically") {
  Potential g = Potential::polynomial({Monomial{2.0, 1, 0, 2}, Monomial{1.0, 0, 0, 0}});
  Vec3 x(0.7, -0.3, 1.2);
  double h = 1e-5;
  double dz = (g.primitive(x + h * Vec3::UnitZ()) - g.primitive(x - h * Vec3::UnitZ())) / (2.0 * h);
  CHECK(dz == doctest::Approx(g.value(x)).epsilon(1e-9));
  CHECK(g.primitive(Vec3(0.7, -0.3, 0.0)) == 0.0);
}

TEST_CASE("free energy of the unit ball") {
  PieceConfig cfg = balls({{Vec3::Zero(), 1.0}});
  EnergyBreakdown e0 = free_energy(cfg, Potential::zero());
  CHECK(e0.total == doctest::Approx(4.0 * kPi).epsilon(1e-12));
  CHECK(e0.total == e0.perimeter + e0.potential_term);
  EnergyBreakdown e1 = free_energy(cfg, Potential::constant(1.0));
  CHECK(e1.total == doctest::Approx(4.0 * kPi + 4.0 * kPi / 3.0).epsilon(1e-12));
  EnergyBreakdown eg = free_energy(cfg, Potential::linear_gravity(1.0, 1.0, 2));
  CHECK(std::abs(eg.potential_term) < 1e-13);
  CHECK(e0.volumes.size() == 1);
}

TEST_CASE("constant potential multiplies the volume") {
  PieceConfig cfg = balls({{Vec3(1.0, 1.0, 1.0), 0.7}, {Vec3(-2.0, 0.5, -1.0), 1.3}});
  EnergyBreakdown e = free_energy(cfg, Potential::constant(2.5));
  CHECK(e.potential_term == doctest::Approx(2.5 * (e.volumes.at(1) + e.volumes.at(2))).epsilon(1e-12));
  // a shifted ball sees the gravity potential at its centre height
  EnergyBreakdown eg = free_energy(cfg, Potential::linear_gravity(1.0, 1.0, 2));
  double expected = 1.0 * e.volumes.at(1) + (-1.0) * e.volumes.at(2);
  CHECK(eg.potential_term == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("component volumes") {
  PieceConfig two = balls({{Vec3(-2.0, 0.0, 0.0), 1.0}, {Vec3(2.0, 0.0, 0.0), 1.0}});
  auto v = component_volumes(two);
  REQUIRE(v.size() == 2);
  CHECK(v.at(1) == doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-12));
  CHECK(v.at(2) == doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-12));

  auto cusp = component_volumes(cusp_between());
  REQUIRE(cusp.size() == 1);
  CHECK(cusp.at(1) == doctest::Approx(kPi).epsilon(1e-12));
}

TEST_CASE("divergence-theorem volume matches slab integration") {
  // region between z = -(x^2 + y^2) / 4 - 0.3 and z = 0.2 + 0.1 x over the unit disk
  auto lower = [](const Vec2& p) {
    HeightJet j;
    j.value = -0.25 * p.squaredNorm() - 0.3;
    j.grad = -0.5 * p;
    j.hess = -0.5 * Mat2::Identity();
    return j;
  };
  auto upper = [](const Vec2& p) {
    HeightJet j;
    j.value = 0.2 + 0.1 * p.x();
    j.grad = Vec2(0.1, 0.0);
    j.hess = Mat2::Zero();
    return j;
  };
  PieceConfig cfg;
  cfg.pieces.push_back(Piece{"lower", make_graph_disk(lower, 0.0, 1.0, -1), 1, PieceRole::sheet});
  cfg.pieces.push_back(Piece{"upper", make_graph_disk(upper, 0.0, 1.0, 1), 1, PieceRole::sheet});
  cfg.window = Window::cylinder(Vec3::Zero(), Vec3::UnitZ(), 1.0, 2.0);
  cfg.volume_method = VolumeMethod::vertical;
  // slab oracle: integral of (0.5 + r^2/4) over the disk = pi/2 + pi/8
  CHECK(component_volumes(cfg).at(1) == doctest::Approx(kPi / 2.0 + kPi / 8.0).epsilon(1e-8));
}

TEST_CASE("energy is invariant under reparametrisation") {
  auto map = [](const Vec2& p) {
    return Vec3(std::sin(p.x()) * std::cos(p.y()), std::sin(p.x()) * std::sin(p.y()), -std::cos(p.x()));
  };
  ParamDomain dom;
  dom.u = ParamInterval{0.0, kPi, false, {}, 4};
  dom.v = ParamInterval{0.0, 2.0 * kPi, true, {}, 4};
  // the natural normal of this chart points inward
  SurfacePatch p(PatchKind::explicit_chart, dom, std::make_shared<ExplicitChart>(map, 1e-4), -1);
  PieceConfig a = balls({{Vec3::Zero(), 1.0}});
  PieceConfig b = a;
  b.pieces[0].patch = p;
  Potential g = Potential::polynomial({Monomial{1.0, 0, 0, 2}, Monomial{0.5, 1, 0, 0}});
  CHECK(free_energy(b, g).total == doctest::Approx(free_energy(a, g).total).epsilon(1e-7));
}

TEST_CASE("potentials without a primitive are unsupported") {
  Potential g = Potential::custom([](const Vec3& x) { return std::sin(x.x()); },
                                  [](const Vec3& x) { return Vec3(std::cos(x.x()), 0.0, 0.0); });
  CHECK_THROWS_AS(free_energy(balls({{Vec3::Zero(), 1.0}}), g), UnsupportedError);
}

TEST_CASE("open components are rejected") {
  PieceConfig cfg;
  cfg.pieces.push_back(Piece{"upper", make_graph_disk(paraboloid_height(1.0), 0.0, 1.0, 1), 1, PieceRole::sheet});
  cfg.window = Window::cylinder(Vec3::Zero(), Vec3::UnitZ(), 1.0, 2.0);
  cfg.volume_method = VolumeMethod::vertical;
  CHECK_THROWS_AS(component_volumes(cfg), DomainError);
}
