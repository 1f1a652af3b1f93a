#pragma once

#include <functional>
#include <memory>
#include <string>

#include "capillary/quadrature.hpp"
#include "capillary/types.hpp"

namespace capillary {

/// Position and parameter derivatives of a chart at one parameter point.
struct ChartJet {
  Vec3 x = Vec3::Zero();
  Vec3 xu = Vec3::Zero();
  Vec3 xv = Vec3::Zero();
  Vec3 xuu = Vec3::Zero();
  Vec3 xuv = Vec3::Zero();
  Vec3 xvv = Vec3::Zero();
};

class Chart {
 public:
  virtual ~Chart() = default;
  /// Position and first derivatives; the second-derivative slots are unspecified.
  virtual ChartJet jet1(const Vec2& p) const = 0;
  virtual ChartJet jet2(const Vec2& p) const = 0;
};

/// Completes a first-order jet with second derivatives from central differences of jet1.
ChartJet fd_second(const Chart& chart, const Vec2& p, double h);

/// Full jet from central differences of a position map.
ChartJet fd_jet(const std::function<Vec3(const Vec2&)>& map, const Vec2& p, double h);

struct HeightJet {
  double value = 0.0;
  Vec2 grad = Vec2::Zero();
  Mat2 hess = Mat2::Zero();
};
using HeightFunction = std::function<HeightJet(const Vec2&)>;

HeightFunction constant_height(double c);
/// alpha * (x^2 + y^2)
HeightFunction paraboloid_height(double alpha);
/// sign * (a - sqrt(a^2 - x^2 - y^2)): the lower (sign < 0) or upper cap of a ball of radius a touching z = 0.
HeightFunction sphere_cap_height(double a, int sign);
/// sign * (a - sqrt(a^2 - y^2)): a cylinder of radius a along the x axis touching z = 0.
HeightFunction cylinder_cap_height(double a, int sign);

struct ProfileJet {
  double rho = 0.0;
  double z = 0.0;
  double drho = 0.0;
  double dz = 0.0;
  double ddrho = 0.0;
  double ddz = 0.0;
};
using Profile = std::function<ProfileJet(double)>;

/// Right-handed frame used to place surfaces of revolution.
struct Frame {
  Vec3 origin = Vec3::Zero();
  Vec3 e1 = Vec3::UnitX();
  Vec3 e2 = Vec3::UnitY();
  Vec3 axis = Vec3::UnitZ();
};

enum class ParamStyle { cartesian, polar };

class HeightFieldChart final : public Chart {
 public:
  HeightFieldChart(HeightFunction h, ParamStyle style, Vec2 center = Vec2::Zero());
  ChartJet jet1(const Vec2& p) const override;
  ChartJet jet2(const Vec2& p) const override;
  const HeightFunction& height() const { return h_; }
  ParamStyle style() const { return style_; }

 private:
  HeightFunction h_;
  ParamStyle style_;
  Vec2 center_;
};

/// X(s, theta) = origin + rho(s) (cos theta e1 + sin theta e2) + z(s) axis.
class RevolutionChart final : public Chart {
 public:
  RevolutionChart(Profile profile, Frame frame);
  ChartJet jet1(const Vec2& p) const override;
  ChartJet jet2(const Vec2& p) const override;

 private:
  Profile profile_;
  Frame frame_;
};

/// Arbitrary position map; derivatives by central differences with a fixed step.
class ExplicitChart final : public Chart {
 public:
  ExplicitChart(std::function<Vec3(const Vec2&)> map, double h);
  ChartJet jet1(const Vec2& p) const override;
  ChartJet jet2(const Vec2& p) const override;

 private:
  std::function<Vec3(const Vec2&)> map_;
  double h_;
};

enum class PatchKind { height_field, revolution, cylinder, explicit_chart, deformed };

std::string to_string(PatchKind kind);

class SurfacePatch {
 public:
  SurfacePatch(PatchKind kind, ParamDomain domain, std::shared_ptr<const Chart> chart, int orientation = 1);

  PatchKind kind() const { return kind_; }
  const ParamDomain& domain() const { return domain_; }
  const Chart& chart() const { return *chart_; }
  std::shared_ptr<const Chart> chart_ptr() const { return chart_; }
  int orientation() const { return orientation_; }
  /// Step used for finite-difference charts: parameter-domain diameter times 1e-4.
  double fd_step() const;

  ChartJet jet1(const Vec2& p) const { return chart_->jet1(p); }
  ChartJet jet2(const Vec2& p) const { return chart_->jet2(p); }

  SurfacePatch flipped() const;
  SurfacePatch with_chart(std::shared_ptr<const Chart> chart) const;
  SurfacePatch with_domain(ParamDomain domain) const;

 private:
  PatchKind kind_;
  ParamDomain domain_;
  std::shared_ptr<const Chart> chart_;
  int orientation_;
};

struct PointGeom {
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::Zero();
  double H = 0.0;  // sum of principal curvatures, mean-curvature vector = H * normal
  double A_norm2 = 0.0;
  double area_element = 0.0;
};

/// First-order frame at a node: position, oriented unit normal, Jacobian and inverse metric.
struct SurfaceFrame {
  Vec3 x;
  Vec3 xu;
  Vec3 xv;
  Vec3 nu;
  double J;
  Mat2 ginv;
};

SurfaceFrame surface_frame(const ChartJet& jet, int orientation);
PointGeom geometry_from_jet(const ChartJet& jet, int orientation);

PointGeom eval_geometry(const SurfacePatch& patch, const Vec2& p);
/// Same quantities from central differences of the chart positions alone.
PointGeom eval_geometry_fd(const SurfacePatch& patch, const Vec2& p);

double patch_area(const SurfacePatch& patch, const QuadratureGrid& grid);

/// Sum over nodes of weight * J * f(jet, frame, parameter), reduced pairwise.
template <class F>
double integrate_patch(const SurfacePatch& patch, const QuadratureGrid& grid, bool second_order, F&& f);

// ----- built-in surfaces -----

SurfacePatch make_sphere(const Vec3& center, double radius, bool outward = true);
SurfacePatch make_cylinder(double radius, double z0, double z1, const Frame& frame = {}, bool outward = true);
SurfacePatch make_graph_disk(HeightFunction h, double r_inner, double r_outer, int orientation = 1,
                             std::vector<double> radial_breaks = {});
SurfacePatch make_graph_rect(HeightFunction h, double x0, double x1, double y0, double y1, int orientation = 1,
                             std::vector<double> x_breaks = {}, std::vector<double> y_breaks = {});
SurfacePatch make_revolution(Profile profile, double s0, double s1, const Frame& frame, int orientation,
                             PatchKind kind = PatchKind::revolution, std::vector<double> breaks = {});

}  // namespace capillary

#include "capillary/surface_impl.hpp"
