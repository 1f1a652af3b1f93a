#include <cmath>

#include "capillary/config.hpp"
#include "capillary/delaunay.hpp"
#include "capillary/energy.hpp"
#include "capillary/error.hpp"
#include "capillary/surface.hpp"
#include "doctest.h"

using namespace capillary;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

double grid_weight_sum(const QuadratureGrid& g) {
  double s = 0.0;
  for (double w : g.weights) s += w;
  return s;
}

}  // namespace

TEST_CASE("grid weights sum to the parameter measure") {
  SurfacePatch s = make_sphere(Vec3::Zero(), 1.0);
  for (int level = 1; level <= 4; ++level) {
    QuadratureGrid g = make_grid(s.domain(), level);
    CHECK(rel(grid_weight_sum(g), s.domain().measure()) < 1e-12);
    CHECK(g.level == level);
  }
  SurfacePatch d = make_graph_disk(constant_height(0.0), 0.1, 2.0, 1, {0.5, 0.7});
  CHECK(rel(grid_weight_sum(make_grid(d.domain(), 3)), d.domain().measure()) < 1e-12);
}

TEST_CASE("resolution level zero is rejected") {
  SurfacePatch s = make_sphere(Vec3::Zero(), 1.0);
  CHECK_THROWS_AS(make_grid(s.domain(), 0), ResolutionError);
}

TEST_CASE("unit sphere closed forms") {
  SurfacePatch out = make_sphere(Vec3::Zero(), 1.0, true);
  SurfacePatch in = make_sphere(Vec3::Zero(), 1.0, false);
  QuadratureGrid g = make_grid(out.domain(), kDefaultResolution);
  CHECK(rel(patch_area(out, g), 4.0 * kPi) < 1e-12);
  for (Vec2 p : {Vec2(0.3, 0.1), Vec2(1.5, 2.0), Vec2(2.9, 5.0)}) {
    PointGeom go = eval_geometry(out, p);
    PointGeom gi = eval_geometry(in, p);
    CHECK(go.H == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(gi.H == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(go.A_norm2 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(go.normal.dot(go.position) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(go.H * go.H <= 2.0 * go.A_norm2 + 1e-12);
  }
  Piece piece{"sphere", out, 1, PieceRole::sheet};
  std::vector<Piece> ps{piece};
  CHECK(rel(enclosed_volume(ps, VolumeMethod::closed), 4.0 * kPi / 3.0) < 1e-12);
  CHECK(rel(enclosed_volume(ps, VolumeMethod::vertical), 4.0 * kPi / 3.0) < 1e-12);
  std::vector<Piece> flipped{Piece{"inward", in, 1, PieceRole::sheet}};
  CHECK_THROWS_AS(enclosed_volume(flipped, VolumeMethod::closed), OrientationError);
}

TEST_CASE("cylinder and hemisphere") {
  for (double a : {1.0, 2.0, 0.25}) {
    SurfacePatch c = make_cylinder(a, -1.0, 1.0, Frame{}, false);
    PointGeom g = eval_geometry(c, Vec2(0.2, 1.0));
    CHECK(g.H == doctest::Approx(1.0 / a).epsilon(1e-12));
    CHECK(g.A_norm2 == doctest::Approx(1.0 / (a * a)).epsilon(1e-12));
    CHECK(c.kind() == PatchKind::cylinder);
  }
  SurfacePatch hemi = make_graph_disk(sphere_cap_height(1.0, -1), 0.0, 1.0 - 1e-14);
  // the polar graph of a hemisphere has an integrable edge singularity; use the revolution chart instead
  Profile prof = [](double s) {
    return ProfileJet{std::sin(s), -std::cos(s), std::cos(s), std::sin(s), -std::sin(s), std::cos(s)};
  };
  SurfacePatch half = make_revolution(prof, 0.0, kPi / 2.0, Frame{}, -1);
  CHECK(rel(patch_area(half, make_grid(half.domain(), 3)), 2.0 * kPi) < 1e-12);
  (void)hemi;
}

TEST_CASE("graph of r^2 has H = 4 at the critical point") {
  SurfacePatch p = make_graph_rect(paraboloid_height(1.0), -1.0, 1.0, -1.0, 1.0);
  PointGeom g = eval_geometry(p, Vec2(0.0, 0.0));
  CHECK(g.H == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(g.normal.z() == doctest::Approx(1.0));
  SurfacePatch flat = make_graph_disk(constant_height(0.0), 0.0, 1.0);
  CHECK(rel(patch_area(flat, make_grid(flat.domain(), 3)), kPi) < 1e-13);
  CHECK(eval_geometry(flat, Vec2(0.5, 1.0)).A_norm2 == doctest::Approx(0.0));
}

TEST_CASE("analytic and finite-difference geometry agree") {
  std::vector<SurfacePatch> patches{
      make_sphere(Vec3(0.1, 0.2, 0.3), 1.3),
      make_cylinder(0.7, -1.0, 1.0),
      make_graph_disk(sphere_cap_height(3.0, 1), 0.0, 2.0),
      make_graph_rect(cylinder_cap_height(1.0, -1), -1.0, 1.0, -0.5, 0.5),
      make_graph_disk(paraboloid_height(0.4), 0.0, 1.5),
      delaunay_unduloid(0.5, 1.0, 2.0),
  };
  for (const SurfacePatch& p : patches) {
    QuadratureGrid g = make_grid(p.domain(), 1);
    for (std::size_t i = 0; i < g.nodes.size(); i += 7) {
      PointGeom a = eval_geometry(p, g.nodes[i]);
      // polar-type charts squeeze the theta direction near their axis; roundoff dominates there
      if (a.area_element < 0.05 * std::abs(p.jet1(g.nodes[i]).xu.norm())) continue;
      PointGeom f = eval_geometry_fd(p, g.nodes[i]);
      double scale = 1.0 + std::abs(a.H);
      CHECK(std::abs(a.H - f.H) < 1e-7 * scale);
      CHECK(std::abs(a.A_norm2 - f.A_norm2) < 1e-7 * (1.0 + a.A_norm2));
      CHECK(rel(f.area_element, a.area_element) < 1e-7);
      CHECK((a.normal - f.normal).norm() < 1e-7);
    }
  }
}

TEST_CASE("explicit charts reproduce the sphere") {
  auto map = [](const Vec2& p) {
    return Vec3(std::sin(p.x()) * std::cos(p.y()), std::sin(p.x()) * std::sin(p.y()), -std::cos(p.x()));
  };
  ParamDomain dom;
  dom.u = ParamInterval{0.0, kPi, false, {}, 4};
  dom.v = ParamInterval{0.0, 2.0 * kPi, true, {}, 4};
  SurfacePatch p(PatchKind::explicit_chart, dom, std::make_shared<ExplicitChart>(map, 1e-4), 1);
  PointGeom g = eval_geometry(p, Vec2(1.0, 0.5));
  CHECK(g.H == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(rel(patch_area(p, make_grid(dom, 3)), 4.0 * kPi) < 1e-7);
}

TEST_CASE("area converges under refinement") {
  SurfacePatch p = make_graph_disk(sphere_cap_height(2.0, 1), 0.0, 1.5);
  double exact = 2.0 * kPi * 2.0 * (2.0 - std::sqrt(4.0 - 1.5 * 1.5));
  double e1 = std::abs(patch_area(p, make_grid(p.domain(), 1)) - exact);
  double e2 = std::abs(patch_area(p, make_grid(p.domain(), 2)) - exact);
  CHECK(e2 < e1);
  CHECK((e2 == 0.0 || std::log2(e1 / e2) >= 2.0));
}

TEST_CASE("immersion failure names the node") {
  auto map = [](const Vec2& p) { return Vec3(p.x(), 0.0, 0.0); };
  ParamDomain dom;
  dom.u = ParamInterval{0.0, 1.0, false, {}, 1};
  dom.v = ParamInterval{0.0, 1.0, false, {}, 1};
  SurfacePatch p(PatchKind::explicit_chart, dom, std::make_shared<ExplicitChart>(map, 1e-4), 1);
  CHECK_THROWS_AS(eval_geometry(p, Vec2(0.5, 0.5)), ImmersionError);
}

TEST_CASE("unduloid has constant mean curvature") {
  SurfacePatch u = delaunay_unduloid(0.5, 1.0, 3.0, false);
  QuadratureGrid g = make_grid(u.domain(), 2);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); i += 3) worst = std::max(worst, std::abs(eval_geometry(u, g.nodes[i]).H - 1.0));
  CHECK(worst < 1e-6);
  // the chart's own derivatives are checked against finite differences of the integrated positions
  const Chart& ch = u.chart();
  ExplicitChart fd([&ch](const Vec2& p) { return ch.jet1(p).x; }, u.fd_step());
  for (Vec2 p : {Vec2(0.3, 0.2), Vec2(-1.1, 4.0)}) {
    PointGeom a = geometry_from_jet(fd.jet2(p), u.orientation());
    CHECK(std::abs(a.H - 1.0) < 1e-6);
  }
  SurfacePatch cyl = delaunay_unduloid(1.0, 1.0, 2.0);
  CHECK(cyl.kind() == PatchKind::cylinder);
  CHECK_THROWS_AS(delaunay_unduloid(1e-5, 1.0, 2.0), DomainError);
  CHECK_THROWS_AS(delaunay_unduloid(1.5, 1.0, 2.0), DomainError);
  CHECK_THROWS_AS(delaunay_unduloid(-0.5, 1.0, 2.0), DomainError);
}

TEST_CASE("region between two paraboloids") {
  SurfacePatch low = make_graph_disk(paraboloid_height(-1.0), 0.0, 1.0, -1);
  SurfacePatch high = make_graph_disk(paraboloid_height(1.0), 0.0, 1.0, 1);
  std::vector<Piece> ps{{"u", low, 1, PieceRole::sheet}, {"v", high, 1, PieceRole::sheet}};
  // the lateral wall r = 1 is vertical and is omitted
  CHECK(rel(enclosed_volume(ps, VolumeMethod::vertical), kPi) < 1e-8);
  CHECK(enclosed_volume(std::span<const Piece>{}, VolumeMethod::closed) == 0.0);
}
