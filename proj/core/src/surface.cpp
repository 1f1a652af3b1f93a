#include "capillary/surface.hpp"

#include <cmath>
#include <sstream>

#include "capillary/error.hpp"

namespace capillary {

ChartJet fd_second(const Chart& chart, const Vec2& p, double h) {
  ChartJet j = chart.jet1(p);
  ChartJet up = chart.jet1(p + Vec2(h, 0.0));
  ChartJet um = chart.jet1(p - Vec2(h, 0.0));
  ChartJet vp = chart.jet1(p + Vec2(0.0, h));
  ChartJet vm = chart.jet1(p - Vec2(0.0, h));
  j.xuu = (up.xu - um.xu) / (2.0 * h);
  j.xvv = (vp.xv - vm.xv) / (2.0 * h);
  j.xuv = 0.5 * ((up.xv - um.xv) / (2.0 * h) + (vp.xu - vm.xu) / (2.0 * h));
  return j;
}

ChartJet fd_jet(const std::function<Vec3(const Vec2&)>& map, const Vec2& p, double h) {
  // fourth-order central stencils
  static constexpr int kOff[4] = {-2, -1, 1, 2};
  static constexpr double kD1[4] = {1.0, -8.0, 8.0, -1.0};
  auto at = [&](int i, int j) { return map(p + Vec2(i * h, j * h)); };
  Vec3 c = at(0, 0);
  Vec3 u[4], v[4];
  for (int k = 0; k < 4; ++k) {
    u[k] = at(kOff[k], 0);
    v[k] = at(0, kOff[k]);
  }
  ChartJet j;
  j.x = c;
  j.xu = j.xv = j.xuv = Vec3::Zero();
  for (int k = 0; k < 4; ++k) {
    j.xu += kD1[k] * u[k];
    j.xv += kD1[k] * v[k];
  }
  j.xu /= 12.0 * h;
  j.xv /= 12.0 * h;
  j.xuu = (-u[0] + 16.0 * u[1] - 30.0 * c + 16.0 * u[2] - u[3]) / (12.0 * h * h);
  j.xvv = (-v[0] + 16.0 * v[1] - 30.0 * c + 16.0 * v[2] - v[3]) / (12.0 * h * h);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) j.xuv += kD1[a] * kD1[b] * at(kOff[a], kOff[b]);
  }
  j.xuv /= 144.0 * h * h;
  return j;
}

HeightFunction constant_height(double c) {
  return [c](const Vec2&) { return HeightJet{c, Vec2::Zero(), Mat2::Zero()}; };
}

HeightFunction paraboloid_height(double alpha) {
  return [alpha](const Vec2& q) {
    HeightJet j;
    j.value = alpha * q.squaredNorm();
    j.grad = 2.0 * alpha * q;
    j.hess = 2.0 * alpha * Mat2::Identity();
    return j;
  };
}

HeightFunction sphere_cap_height(double a, int sign) {
  if (!(a > 0.0)) throw DomainError("sphere cap radius must be positive");
  const double sg = sign < 0 ? -1.0 : 1.0;
  return [a, sg](const Vec2& q) {
    double r2 = q.squaredNorm();
    if (r2 >= a * a) throw DomainError("point outside the spherical cap");
    double w = std::sqrt(a * a - r2);
    HeightJet j;
    j.value = sg * (a - w);
    j.grad = sg * q / w;
    j.hess = sg * (Mat2::Identity() / w + q * q.transpose() / (w * w * w));
    return j;
  };
}

HeightFunction cylinder_cap_height(double a, int sign) {
  if (!(a > 0.0)) throw DomainError("cylinder radius must be positive");
  const double sg = sign < 0 ? -1.0 : 1.0;
  return [a, sg](const Vec2& q) {
    double y = q.y();
    if (y * y >= a * a) throw DomainError("point outside the cylindrical cap");
    double w = std::sqrt(a * a - y * y);
    HeightJet j;
    j.value = sg * (a - w);
    j.grad = Vec2(0.0, sg * y / w);
    j.hess = Mat2::Zero();
    j.hess(1, 1) = sg * (a * a) / (w * w * w);
    return j;
  };
}

HeightFieldChart::HeightFieldChart(HeightFunction h, ParamStyle style, Vec2 center)
    : h_(std::move(h)), style_(style), center_(center) {}

ChartJet HeightFieldChart::jet2(const Vec2& p) const {
  ChartJet j;
  if (style_ == ParamStyle::cartesian) {
    Vec2 q = center_ + p;
    HeightJet hj = h_(q);
    j.x = Vec3(q.x(), q.y(), hj.value);
    j.xu = Vec3(1.0, 0.0, hj.grad.x());
    j.xv = Vec3(0.0, 1.0, hj.grad.y());
    j.xuu = Vec3(0.0, 0.0, hj.hess(0, 0));
    j.xuv = Vec3(0.0, 0.0, hj.hess(0, 1));
    j.xvv = Vec3(0.0, 0.0, hj.hess(1, 1));
    return j;
  }
  const double r = p.x(), c = std::cos(p.y()), s = std::sin(p.y());
  Vec2 er(c, s), et(-r * s, r * c), ett(-r * c, -r * s), ert(-s, c);
  Vec2 q = center_ + r * er;
  HeightJet hj = h_(q);
  j.x = Vec3(q.x(), q.y(), hj.value);
  j.xu = Vec3(c, s, hj.grad.dot(er));
  j.xv = Vec3(et.x(), et.y(), hj.grad.dot(et));
  j.xuu = Vec3(0.0, 0.0, er.dot(hj.hess * er));
  j.xuv = Vec3(-s, c, er.dot(hj.hess * et) + hj.grad.dot(ert));
  j.xvv = Vec3(ett.x(), ett.y(), et.dot(hj.hess * et) + hj.grad.dot(ett));
  return j;
}

ChartJet HeightFieldChart::jet1(const Vec2& p) const { return jet2(p); }

RevolutionChart::RevolutionChart(Profile profile, Frame frame) : profile_(std::move(profile)), frame_(frame) {}

ChartJet RevolutionChart::jet2(const Vec2& p) const {
  ProfileJet pj = profile_(p.x());
  const double c = std::cos(p.y()), s = std::sin(p.y());
  Vec3 rhat = c * frame_.e1 + s * frame_.e2;
  Vec3 that = -s * frame_.e1 + c * frame_.e2;
  ChartJet j;
  j.x = frame_.origin + pj.rho * rhat + pj.z * frame_.axis;
  j.xu = pj.drho * rhat + pj.dz * frame_.axis;
  j.xv = pj.rho * that;
  j.xuu = pj.ddrho * rhat + pj.ddz * frame_.axis;
  j.xuv = pj.drho * that;
  j.xvv = -pj.rho * rhat;
  return j;
}

ChartJet RevolutionChart::jet1(const Vec2& p) const { return jet2(p); }

ExplicitChart::ExplicitChart(std::function<Vec3(const Vec2&)> map, double h) : map_(std::move(map)), h_(h) {
  if (!(h > 0.0)) throw DomainError("explicit chart step must be positive");
}

ChartJet ExplicitChart::jet1(const Vec2& p) const { return fd_jet(map_, p, h_); }
ChartJet ExplicitChart::jet2(const Vec2& p) const { return fd_jet(map_, p, h_); }

std::string to_string(PatchKind kind) {
  switch (kind) {
    case PatchKind::height_field: return "height_field";
    case PatchKind::revolution: return "revolution";
    case PatchKind::cylinder: return "cylinder";
    case PatchKind::explicit_chart: return "explicit_chart";
    case PatchKind::deformed: return "deformed";
  }
  return "unknown";
}

SurfacePatch::SurfacePatch(PatchKind kind, ParamDomain domain, std::shared_ptr<const Chart> chart, int orientation)
    : kind_(kind), domain_(std::move(domain)), chart_(std::move(chart)), orientation_(orientation < 0 ? -1 : 1) {
  if (!chart_) throw DomainError("surface patch without a chart");
}

double SurfacePatch::fd_step() const {
  return 1e-4 * std::hypot(domain_.u.hi - domain_.u.lo, domain_.v.hi - domain_.v.lo);
}

SurfacePatch SurfacePatch::flipped() const { return SurfacePatch(kind_, domain_, chart_, -orientation_); }

SurfacePatch SurfacePatch::with_chart(std::shared_ptr<const Chart> chart) const {
  return SurfacePatch(PatchKind::deformed, domain_, std::move(chart), orientation_);
}

SurfacePatch SurfacePatch::with_domain(ParamDomain domain) const {
  return SurfacePatch(kind_, std::move(domain), chart_, orientation_);
}

SurfaceFrame surface_frame(const ChartJet& jet, int orientation) {
  Vec3 n = jet.xu.cross(jet.xv);
  double J = n.norm();
  double scale = jet.xu.norm() * jet.xv.norm();
  if (!(J > 1e-13 * scale) || !(scale > 0.0)) {
    std::ostringstream os;
    os << "chart is not an immersion at (" << jet.x.x() << ", " << jet.x.y() << ", " << jet.x.z() << ")";
    throw ImmersionError(os.str());
  }
  double E = jet.xu.squaredNorm(), F = jet.xu.dot(jet.xv), G = jet.xv.squaredNorm();
  Mat2 ginv;
  ginv << G, -F, -F, E;
  ginv /= J * J;
  return SurfaceFrame{jet.x, jet.xu, jet.xv, (orientation < 0 ? -1.0 : 1.0) * n / J, J, ginv};
}

PointGeom geometry_from_jet(const ChartJet& jet, int orientation) {
  SurfaceFrame fr = surface_frame(jet, orientation);
  Mat2 II;
  II << jet.xuu.dot(fr.nu), jet.xuv.dot(fr.nu), jet.xuv.dot(fr.nu), jet.xvv.dot(fr.nu);
  Mat2 S = fr.ginv * II;
  PointGeom g;
  g.position = fr.x;
  g.normal = fr.nu;
  g.H = S.trace();
  g.A_norm2 = (S * S).trace();
  g.area_element = fr.J;
  return g;
}

PointGeom eval_geometry(const SurfacePatch& patch, const Vec2& p) {
  if (!patch.domain().contains(p)) throw DomainError("parameter point outside the patch domain");
  return geometry_from_jet(patch.jet2(p), patch.orientation());
}

PointGeom eval_geometry_fd(const SurfacePatch& patch, const Vec2& p) {
  const Chart& chart = patch.chart();
  auto map = [&chart](const Vec2& q) { return chart.jet1(q).x; };
  return geometry_from_jet(fd_jet(map, p, patch.fd_step()), patch.orientation());
}

double patch_area(const SurfacePatch& patch, const QuadratureGrid& grid) {
  return integrate_patch(patch, grid, false, [](const ChartJet&, const SurfaceFrame&, const Vec2&) { return 1.0; });
}

namespace {

ParamInterval periodic_angle() {
  ParamInterval iv;
  iv.lo = 0.0;
  iv.hi = 2.0 * kPi;
  iv.periodic = true;
  iv.base_panels = 4;
  return iv;
}

ParamInterval interval(double lo, double hi, std::vector<double> breaks, int base = 4) {
  ParamInterval iv;
  iv.lo = lo;
  iv.hi = hi;
  iv.breaks = std::move(breaks);
  iv.base_panels = base;
  return iv;
}

}  // namespace

SurfacePatch make_revolution(Profile profile, double s0, double s1, const Frame& frame, int orientation,
                             PatchKind kind, std::vector<double> breaks) {
  ParamDomain dom;
  dom.u = interval(s0, s1, std::move(breaks));
  dom.v = periodic_angle();
  return SurfacePatch(kind, dom, std::make_shared<RevolutionChart>(std::move(profile), frame), orientation);
}

SurfacePatch make_sphere(const Vec3& center, double radius, bool outward) {
  if (!(radius > 0.0)) throw DomainError("sphere radius must be positive");
  Profile prof = [radius](double s) {
    double c = std::cos(s), sn = std::sin(s);
    return ProfileJet{radius * sn, -radius * c, radius * c, radius * sn, -radius * sn, radius * c};
  };
  Frame fr;
  fr.origin = center;
  return make_revolution(prof, 0.0, kPi, fr, outward ? -1 : 1);
}

SurfacePatch make_cylinder(double radius, double z0, double z1, const Frame& frame, bool outward) {
  if (!(radius > 0.0)) throw DomainError("cylinder radius must be positive");
  Profile prof = [radius](double s) { return ProfileJet{radius, s, 0.0, 1.0, 0.0, 0.0}; };
  return make_revolution(prof, z0, z1, frame, outward ? -1 : 1, PatchKind::cylinder);
}

SurfacePatch make_graph_disk(HeightFunction h, double r_inner, double r_outer, int orientation,
                             std::vector<double> radial_breaks) {
  if (!(r_outer > r_inner) || r_inner < 0.0) throw DomainError("invalid graph annulus");
  ParamDomain dom;
  dom.u = interval(r_inner, r_outer, std::move(radial_breaks));
  dom.v = periodic_angle();
  dom.exclusion_radius = r_inner;
  return SurfacePatch(PatchKind::height_field, dom,
                      std::make_shared<HeightFieldChart>(std::move(h), ParamStyle::polar), orientation);
}

SurfacePatch make_graph_rect(HeightFunction h, double x0, double x1, double y0, double y1, int orientation,
                             std::vector<double> x_breaks, std::vector<double> y_breaks) {
  ParamDomain dom;
  dom.u = interval(x0, x1, std::move(x_breaks));
  dom.v = interval(y0, y1, std::move(y_breaks));
  return SurfacePatch(PatchKind::height_field, dom,
                      std::make_shared<HeightFieldChart>(std::move(h), ParamStyle::cartesian), orientation);
}

}  // namespace capillary
