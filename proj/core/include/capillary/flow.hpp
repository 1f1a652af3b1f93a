#pragma once

#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "capillary/config.hpp"
#include "capillary/fields.hpp"
#include "capillary/surface.hpp"

namespace capillary {

/// chi(r) = 1 on r <= R0, 0 on r >= 2 R0, quintic smoothstep in between (C^2).
class CutoffChi {
 public:
  explicit CutoffChi(double R0);
  double R0() const { return R0_; }
  double value(double r) const;
  double d1(double r) const;
  double d2(double r) const;
  static constexpr double kMaxSlope = 1.875;  // sup |chi'| * R0

 private:
  double R0_;
};

struct RadialJet {
  double phi = 0.0;    // radius after time t
  double dphi = 0.0;   // d phi / d r
  double ddphi = 0.0;  // d^2 phi / d r^2
};

/// Flow of the horizontal field chi(r) d_r.
class RadialFlow {
 public:
  explicit RadialFlow(CutoffChi chi) : chi_(chi) {}
  const CutoffChi& chi() const { return chi_; }
  RadialJet radial(double t, double r) const;
  Vec3 map(double t, const Vec3& x) const;

 private:
  CutoffChi chi_;
};

/// The ambient (singular on the axis) field chi(r) d_r.
AmbientField radial_field(const CutoffChi& chi);

/// (r, theta) -> (phi_t(r) cos theta, phi_t(r) sin theta, h(r cos theta, r sin theta)).
class RadialFlowChart final : public Chart {
 public:
  RadialFlowChart(HeightFunction h, RadialFlow flow, double t);
  ChartJet jet1(const Vec2& p) const override;
  ChartJet jet2(const Vec2& p) const override;

 private:
  RadialJet radial(double r) const;

  HeightFunction h_;
  RadialFlow flow_;
  double t_;
  mutable std::mutex mutex_;
  mutable std::map<double, RadialJet> cache_;  // quadrature grids share radii across theta
};

/// base chart composed with x -> x + sum c_i Y_i(x).
class DisplacedChart final : public Chart {
 public:
  DisplacedChart(std::shared_ptr<const Chart> base, std::vector<std::pair<double, AmbientField>> terms, double h);
  ChartJet jet1(const Vec2& p) const override;
  ChartJet jet2(const Vec2& p) const override;

 private:
  bool active(const Vec3& x) const;
  std::shared_ptr<const Chart> base_;
  std::vector<std::pair<double, AmbientField>> terms_;
  double h_;
};

/// base chart composed with the time-t flow of X.
class FlowedChart final : public Chart {
 public:
  FlowedChart(std::shared_ptr<const Chart> base, AmbientField X, double t, double h);
  ChartJet jet1(const Vec2& p) const override;
  ChartJet jet2(const Vec2& p) const override;

 private:
  std::shared_ptr<const Chart> base_;
  AmbientField X_;
  double t_;
  double h_;
};

/// Position and Jacobian of the time-t flow of X started at x.
std::pair<Vec3, Mat3> integrate_flow(const AmbientField& X, const Vec3& x, double t);

PieceConfig flow_ambient(const PieceConfig& cfg, const AmbientField& X, double t);

}  // namespace capillary
