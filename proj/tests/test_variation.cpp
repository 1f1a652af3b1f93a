#include <cmath>

#include "capillary/curve.hpp"
#include "capillary/error.hpp"
#include "capillary/fd.hpp"
#include "capillary/variation.hpp"
#include "doctest.h"

using namespace capillary;

namespace {

PieceConfig sphere_config(double r, double half_width) {
  PieceConfig cfg;
  cfg.pieces.push_back(Piece{"sphere", make_sphere(Vec3::Zero(), r, true), 1, PieceRole::sheet});
  cfg.window = Window::box(Vec3::Constant(-half_width), Vec3::Constant(half_width));
  return cfg;
}

AmbientField dilation() { return dilation_field(Vec3::Zero(), 1.5, 1.9); }

NormalPerturbation scalar(std::function<double(const Vec3&)> f, std::function<Vec3(const Vec3&)> df) {
  return ambient_scalar([f, df](const Vec3& x) { return std::make_pair(f(x), df(x)); }, "scalar");
}

}  // namespace

TEST_CASE("first variation of the unit sphere under dilation and translation") {
  PieceConfig cfg = sphere_config(1.0, 2.0);
  Potential g = Potential::zero();
  CHECK(first_variation_ambient(cfg, g, dilation()) == doctest::Approx(8.0 * kPi).epsilon(1e-10));
  CHECK(first_variation_curvature_form(cfg, g, dilation()) == doctest::Approx(8.0 * kPi).epsilon(1e-10));
  AmbientField tr = translation_field(Vec3(0.3, -0.2, 0.7), Vec3::Zero(), 1.5, 1.9);
  CHECK(std::abs(first_variation_ambient(cfg, g, tr)) < 1e-10);
  CHECK(total(first_variation_volume(cfg, dilation())) == doctest::Approx(4.0 * kPi).epsilon(1e-10));
  CHECK(std::abs(total(first_variation_volume(cfg, tr))) < 1e-10);
}

TEST_CASE("fields must be supported inside the window") {
  PieceConfig cfg = sphere_config(1.0, 2.0);
  AmbientField wide = dilation_field(Vec3::Zero(), 1.5, 2.5);
  CHECK_THROWS_AS(first_variation_ambient(cfg, Potential::zero(), wide), SupportError);
}

TEST_CASE("Lagrange multiplier of spheres") {
  RandomFieldGenerator gen(7);
  SamplingRegion region{Vec3::Constant(-0.7), Vec3::Constant(0.7), 0.6, 0.9, 1};
  std::vector<AmbientField> fields{dilation()};
  for (int i = 0; i < 10; ++i) fields.push_back(gen.next(region));

  MultiplierEstimate unit = lagrange_multiplier(sphere_config(1.0, 2.0), Potential::zero(), fields, 5);
  CHECK(unit.lambda.at(1) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(unit.residual.at(1) < 1e-5);

  MultiplierEstimate shifted = lagrange_multiplier(sphere_config(1.0, 2.0), Potential::constant(1.0), fields, 5);
  CHECK(shifted.lambda.at(1) == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(shifted.residual.at(1) < 1e-5);

  std::vector<AmbientField> big{dilation_field(Vec3::Zero(), 4.5, 5.5)};
  MultiplierEstimate four = lagrange_multiplier(sphere_config(4.0, 6.0), Potential::zero(), big);
  CHECK(four.lambda.at(1) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("batched field rates agree with the single-field variations") {
  PieceConfig cfg = sphere_config(1.0, 2.0);
  Potential g = Potential::zero();
  RandomFieldGenerator gen(7);
  std::vector<AmbientField> fields;
  for (int i = 0; i < 6; ++i) fields.push_back(gen.next(SamplingRegion{Vec3::Constant(-0.8), Vec3::Constant(0.8), 0.6, 0.9, 1}));
  MultiplierEstimate est = lagrange_multiplier(cfg, g, fields, 3);
  REQUIRE(est.rates.size() == fields.size());
  CHECK(est.area.at(1) == doctest::Approx(4.0 * kPi).epsilon(1e-12));
  for (std::size_t k = 0; k < fields.size(); ++k) {
    CHECK(est.rates[k].energy.at(1) == doctest::Approx(first_variation_ambient(cfg, g, fields[k], 3)).epsilon(1e-12));
    CHECK(est.rates[k].volume.at(1) == doctest::Approx(total(first_variation_volume(cfg, fields[k], 3))).epsilon(1e-12));
  }

  JacobiGram gram = jacobi_gram(cfg, g, fields, 3);
  for (std::size_t a = 0; a < fields.size(); ++a) {
    double q = second_variation_ambient(cfg, g, normal_component(fields[a]), 2.0, 3).quadratic_form;
    CHECK(gram.jacobi(a, a) == doctest::Approx(q).epsilon(1e-10));
    for (std::size_t b = 0; b < fields.size(); ++b) {
      double q_ab = jacobi_bilinear(cfg, g, normal_component(fields[a]), normal_component(fields[b]), 3);
      CHECK(gram.jacobi(a, b) == doctest::Approx(q_ab).epsilon(1e-10).scale(1.0));
    }
  }
  CHECK(gram.l2.isApprox(gram.l2.transpose()));
  CHECK(gram.l2.ldlt().isPositive());
}

TEST_CASE("multiplier is ill-posed without volume-changing fields") {
  std::vector<AmbientField> fields{translation_field(Vec3::UnitX(), Vec3::Zero(), 1.5, 1.9)};
  CHECK_THROWS_AS(lagrange_multiplier(sphere_config(1.0, 2.0), Potential::zero(), fields), IllPosedError);
}

TEST_CASE("quadratic form on spherical harmonics") {
  PieceConfig cfg = sphere_config(1.0, 2.0);
  Potential g = Potential::zero();
  NormalPerturbation l1 = scalar([](const Vec3& x) { return x.z(); }, [](const Vec3&) { return Vec3::UnitZ(); });
  NormalPerturbation l2 = scalar([](const Vec3& x) { return x.x() * x.y(); },
                                 [](const Vec3& x) { return Vec3(x.y(), x.x(), 0.0); });
  SecondVariation s1 = second_variation_ambient(cfg, g, l1, 2.0);
  CHECK(std::abs(s1.value) < 1e-10);
  CHECK(s1.stationarity_defect < 1e-10);
  CHECK_FALSE(s1.stationarity_warning);
  // integral of (xy)^2 over the unit sphere is 4 pi / 15
  SecondVariation s2 = second_variation_ambient(cfg, g, l2, 2.0);
  CHECK(s2.value == doctest::Approx(4.0 * 4.0 * kPi / 15.0).epsilon(1e-10));

  double ab = jacobi_bilinear(cfg, g, l1, l2);
  CHECK(std::abs(ab) < 1e-10);
  NormalPerturbation sum = scalar([](const Vec3& x) { return x.z() + x.x() * x.y(); },
                                  [](const Vec3& x) { return Vec3(x.y(), x.x(), 1.0); });
  double q = second_variation_ambient(cfg, g, sum, 2.0).quadratic_form;
  CHECK(q == doctest::Approx(s1.quadratic_form + s2.quadratic_form + 2.0 * ab).epsilon(1e-10));
}

TEST_CASE("wrong multiplier raises the stationarity warning") {
  PieceConfig cfg = sphere_config(1.0, 2.0);
  NormalPerturbation one = scalar([](const Vec3&) { return 1.0; }, [](const Vec3&) { return Vec3::Zero(); });
  SecondVariation s = second_variation_ambient(cfg, Potential::zero(), one, 1.0);
  CHECK(s.stationarity_warning);
  CHECK(s.stationarity_defect == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("second-order volume of dilations and rotations") {
  PieceConfig cfg = sphere_config(1.0, 2.0);
  CHECK(total(second_order_volume(cfg, dilation(), zero_field())) == doctest::Approx(8.0 * kPi).epsilon(1e-10));
  AmbientField rot = rotation_field(Vec3(0.2, -0.5, 1.0), Vec3::Zero(), 1.5, 1.9);
  CHECK(std::abs(total(second_order_volume(cfg, rot, flow_acceleration(rot)))) < 1e-10);
}

TEST_CASE("closed-form second variation along linear paths and flows") {
  PieceConfig cfg = sphere_config(1.0, 2.0);
  AmbientField X = dilation();
  CHECK(second_variation_general(cfg, Potential::zero(), X, PathKind::linear) ==
        doctest::Approx(8.0 * kPi).epsilon(1e-10));
  CHECK(second_variation_general(cfg, Potential::zero(), X, PathKind::flow) ==
        doctest::Approx(16.0 * kPi).epsilon(1e-10));
  CHECK(second_variation_general(cfg, Potential::constant(1.0), X, PathKind::linear) ==
        doctest::Approx(16.0 * kPi).epsilon(1e-10));
  CHECK(second_variation_general(cfg, Potential::constant(1.0), X, PathKind::flow) ==
        doctest::Approx(28.0 * kPi).epsilon(1e-10));
}

TEST_CASE("conormal term on a shrinking circle") {
  for (double t : {0.1, 0.05}) {
    Mat3 P = Mat3::Identity();
    P(2, 2) = 0.0;
    AmbientField dr = global_affine_field(Vec3::Zero(), P / t, Vec3::Zero(), "d_r on the circle");
    BoundaryCurve away = circle_curve(Vec3::Zero(), t, Vec3::UnitZ(), ConormalDirection::away_from_sheet, 2);
    ConormalTerm c = boundary_conormal_term(away, dr);
    CHECK(c.per_sheet == doctest::Approx(-2.0 * kPi * t).epsilon(1e-12));
    CHECK(c.term == doctest::Approx(-4.0 * kPi * t).epsilon(1e-12));
    BoundaryCurve into = circle_curve(Vec3::Zero(), t, Vec3::UnitZ(), ConormalDirection::into_sheet, 2);
    ConormalTerm ci = boundary_conormal_term(into, dr);
    CHECK(ci.per_sheet == doctest::Approx(2.0 * kPi * t).epsilon(1e-12));
    CHECK(ci.term == doctest::Approx(c.term).epsilon(1e-12));
    CHECK(curve_length(into) == doctest::Approx(2.0 * kPi * t).epsilon(1e-12));
  }
}

TEST_CASE("Richardson finite differences") {
  std::vector<double> hs = geometric_steps(0.2, 5);
  std::vector<Sample> two{{0.0, std::cos(0.0)}};
  std::vector<Sample> one{{0.0, std::exp(0.0)}};
  for (double h : hs) {
    two.push_back({h, std::sin(h) + std::cos(h)});
    two.push_back({-h, std::sin(-h) + std::cos(-h)});
    one.push_back({h, std::exp(h)});
  }
  FdEstimate d1 = fd_derivative(two, 1, Sided::two);
  CHECK(d1.value == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(d1.observed_order == doctest::Approx(2.0).epsilon(0.05));
  FdEstimate d2 = fd_derivative(two, 2, Sided::two);
  CHECK(d2.value == doctest::Approx(-1.0).epsilon(1e-8));
  FdEstimate e1 = fd_derivative(one, 1, Sided::one);
  CHECK(e1.value == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(e1.observed_order == doctest::Approx(1.0).epsilon(0.05));
  FdEstimate e2 = fd_derivative(one, 2, Sided::one);
  CHECK(e2.value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(e2.error < 1e-4);

  std::vector<Sample> bad{{0.1, 1.0}, {0.2, 1.0}, {0.05, 1.0}, {0.025, 1.0}};
  CHECK_THROWS_AS(fd_derivative(bad, 1, Sided::one), DomainError);
  std::vector<Sample> few{{0.1, 1.0}, {0.05, 1.0}};
  CHECK_THROWS(fd_derivative(few, 1, Sided::one));
}
